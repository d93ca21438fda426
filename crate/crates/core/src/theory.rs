//! Base theory abstraction: the two supported theories (linear integer
//! arithmetic and strings with prefix order), their standard models, and
//! uniform entry points for validity, satisfiability and ground evaluation.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fol::{Formula, Term, SORT_INT, SORT_STRING};
use crate::lia;
use crate::strings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryId {
    Lia,
    /// Strings over the alphabet `0..=max_letter`.
    Str { max_letter: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theory {
    pub id: TheoryId,
}

/// An element of a standard model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TheoryElement {
    Int(i64),
    Word(Vec<u32>),
}

impl fmt::Display for TheoryElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryElement::Int(k) => write!(f, "{k}"),
            TheoryElement::Word(w) if w.is_empty() => write!(f, "eps"),
            TheoryElement::Word(w) => {
                let parts: Vec<String> = w.iter().map(|d| d.to_string()).collect();
                write!(f, "\"{}\"", parts.join("."))
            }
        }
    }
}

impl Theory {
    pub fn lia() -> Theory {
        Theory { id: TheoryId::Lia }
    }

    pub fn str(max_letter: u32) -> Theory {
        Theory { id: TheoryId::Str { max_letter } }
    }

    /// The single theory sort.
    pub fn sort(&self) -> &'static str {
        match self.id {
            TheoryId::Lia => SORT_INT,
            TheoryId::Str { .. } => SORT_STRING,
        }
    }

    /// The interpreted strict order of the theory.
    pub fn order_rel(&self) -> &'static str {
        match self.id {
            TheoryId::Lia => "<",
            TheoryId::Str { .. } => "prefix",
        }
    }

    pub fn less(&self, a: Term, b: Term) -> Formula {
        Formula::Rel(self.order_rel().to_string(), vec![a, b])
    }

    /// The designated base point used by constructions: `0` or the empty word.
    pub fn reg_term(&self) -> Term {
        match self.id {
            TheoryId::Lia => Term::Int(0),
            TheoryId::Str { .. } => Term::Epsilon,
        }
    }

    /// Validity over the standard model; free theory variables are
    /// universally quantified.
    pub fn valid(&self, f: &Formula) -> Result<bool> {
        match self.id {
            TheoryId::Lia => lia::lia_valid(f),
            TheoryId::Str { max_letter } => strings::str_valid(f, max_letter),
        }
    }

    pub fn sat(&self, f: &Formula) -> Result<bool> {
        match self.id {
            TheoryId::Lia => lia::lia_sat(f),
            TheoryId::Str { max_letter } => strings::str_sat(f, max_letter),
        }
    }

    pub fn element_term(&self, e: &TheoryElement) -> Term {
        match e {
            TheoryElement::Int(k) => Term::Int(*k),
            TheoryElement::Word(w) => Term::word(w),
        }
    }

    /// Ground truth of the interpreted order between two elements.
    pub fn element_less(&self, a: &TheoryElement, b: &TheoryElement) -> bool {
        match (a, b) {
            (TheoryElement::Int(x), TheoryElement::Int(y)) => x < y,
            (TheoryElement::Word(x), TheoryElement::Word(y)) => {
                x.len() < y.len() && y[..x.len()] == *x
            }
            _ => false,
        }
    }

    /// Direct evaluation of a ground term.
    pub fn eval_term(
        &self,
        t: &Term,
        env: &BTreeMap<String, TheoryElement>,
    ) -> Result<TheoryElement> {
        match t {
            Term::Var { name, .. } => env
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("unbound variable {name}"))),
            Term::Int(k) => Ok(TheoryElement::Int(*k)),
            Term::Epsilon => Ok(TheoryElement::Word(Vec::new())),
            Term::Append(inner, d) => match self.eval_term(inner, env)? {
                TheoryElement::Word(mut w) => {
                    w.push(*d);
                    Ok(TheoryElement::Word(w))
                }
                other => Err(Error::Invalid(format!("append to non-word {other}"))),
            },
            Term::App(f, args) if f == "+" && args.len() == 2 => {
                match (self.eval_term(&args[0], env)?, self.eval_term(&args[1], env)?) {
                    (TheoryElement::Int(x), TheoryElement::Int(y)) => {
                        Ok(TheoryElement::Int(x.checked_add(y).ok_or_else(|| {
                            Error::Invalid("integer overflow".to_string())
                        })?))
                    }
                    _ => Err(Error::Invalid("sum of non-integers".to_string())),
                }
            }
            Term::App(f, args) if args.len() == 1 && strings::is_defined_symbol(f) => {
                match self.eval_term(&args[0], env)? {
                    TheoryElement::Word(w) => strings::eval_defined(f, &w)
                        .map(TheoryElement::Word)
                        .ok_or_else(|| Error::Invalid(format!("undefined symbol {f}"))),
                    other => Err(Error::Invalid(format!("{f} applied to non-word {other}"))),
                }
            }
            Term::Ite(c, a, b) => {
                if self.eval(c, env)? {
                    self.eval_term(a, env)
                } else {
                    self.eval_term(b, env)
                }
            }
            _ => Err(Error::Fragment(format!("term outside the theory language: {t:?}"))),
        }
    }

    /// Truth of `f` under `env`. Quantifier-free formulas are evaluated
    /// directly; quantified subformulas fall back to the decision procedure
    /// after grounding the environment.
    pub fn eval(&self, f: &Formula, env: &BTreeMap<String, TheoryElement>) -> Result<bool> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Eq(a, b) => Ok(self.eval_term(a, env)? == self.eval_term(b, env)?),
            Formula::Rel(r, ts) if r == self.order_rel() && ts.len() == 2 => {
                let a = self.eval_term(&ts[0], env)?;
                let b = self.eval_term(&ts[1], env)?;
                Ok(self.element_less(&a, &b))
            }
            Formula::Rel(r, _) => Err(Error::Fragment(format!("uninterpreted relation {r}"))),
            Formula::ReMatch(r, t) => match self.eval_term(t, env)? {
                TheoryElement::Word(w) => Ok(r.matches(&w)),
                other => Err(Error::Invalid(format!("regex applied to non-word {other}"))),
            },
            Formula::Not(g) => Ok(!self.eval(g, env)?),
            Formula::And(gs) => {
                for g in gs {
                    if !self.eval(g, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.eval(g, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!self.eval(a, env)? || self.eval(b, env)?),
            Formula::Forall(..) | Formula::Exists(..) => {
                let binding: BTreeMap<String, Term> =
                    env.iter().map(|(v, e)| (v.clone(), self.element_term(e))).collect();
                self.valid(&f.substitute(&binding))
            }
        }
    }

    /// Elements of the standard model up to the given size: integers in
    /// `-bound..=bound`, or words of length at most `bound`, in order.
    pub fn enumerate(&self, bound: usize) -> Vec<TheoryElement> {
        match self.id {
            TheoryId::Lia => {
                let b = bound as i64;
                (-b..=b).map(TheoryElement::Int).collect()
            }
            TheoryId::Str { max_letter } => {
                let mut out = vec![TheoryElement::Word(Vec::new())];
                let mut layer = vec![Vec::new()];
                for _ in 0..bound {
                    let mut next = Vec::new();
                    for w in &layer {
                        for a in 0..=max_letter {
                            let mut w2 = w.clone();
                            w2.push(a);
                            next.push(w2);
                        }
                    }
                    out.extend(next.iter().cloned().map(TheoryElement::Word));
                    layer = next;
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantified_fallback_agrees_with_direct_eval() {
        let th = Theory::str(1);
        // exists y. x strict-prefix y, with x bound in the environment
        let f = Formula::exists(
            "y",
            SORT_STRING,
            Formula::Rel(
                "prefix".into(),
                vec![Term::var("x", SORT_STRING), Term::var("y", SORT_STRING)],
            ),
        );
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), TheoryElement::Word(vec![0, 1]));
        assert!(th.eval(&f, &env).unwrap());
    }

    #[test]
    fn defined_symbols_evaluate() {
        let th = Theory::str(2);
        let env: BTreeMap<String, TheoryElement> = BTreeMap::new();
        let t = Term::App("parent".into(), vec![Term::word(&[0, 0])]);
        assert_eq!(th.eval_term(&t, &env).unwrap(), TheoryElement::Word(vec![0, 0, 0]));
        let t2 = Term::App("trim1".into(), vec![Term::word(&[1, 2])]);
        assert_eq!(th.eval_term(&t2, &env).unwrap(), TheoryElement::Word(vec![1]));
    }

    #[test]
    fn integer_eval() {
        let th = Theory::lia();
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), TheoryElement::Int(3));
        let f = th.less(
            Term::App("+".into(), vec![Term::var("x", SORT_INT), Term::Int(-1)]),
            Term::var("x", SORT_INT),
        );
        assert!(th.eval(&f, &env).unwrap());
    }

    #[test]
    fn enumeration_orders() {
        let th = Theory::lia();
        assert_eq!(
            th.enumerate(2),
            vec![
                TheoryElement::Int(-2),
                TheoryElement::Int(-1),
                TheoryElement::Int(0),
                TheoryElement::Int(1),
                TheoryElement::Int(2)
            ]
        );
        let ts = Theory::str(1);
        assert_eq!(ts.enumerate(1).len(), 3);
    }
}
