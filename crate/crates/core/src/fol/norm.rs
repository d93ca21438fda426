//! Negation normal form, prenexing and Skolemization.

use std::collections::{BTreeMap, BTreeSet};

use super::{fresh_name, Formula, Signature, Term};
use crate::error::{Error, Result};

/// Pushes negations down to atoms and removes implications.
pub fn nnf(f: &Formula) -> Formula {
    fn pos(f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Rel(..) | Formula::Eq(..)
            | Formula::ReMatch(..) => f.clone(),
            Formula::Not(g) => neg(g),
            Formula::And(gs) => Formula::and(gs.iter().map(pos).collect()),
            Formula::Or(gs) => Formula::or(gs.iter().map(pos).collect()),
            Formula::Implies(a, b) => Formula::or(vec![neg(a), pos(b)]),
            Formula::Forall(v, s, body) => Formula::Forall(v.clone(), s.clone(), Box::new(pos(body))),
            Formula::Exists(v, s, body) => Formula::Exists(v.clone(), s.clone(), Box::new(pos(body))),
        }
    }
    fn neg(f: &Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Rel(..) | Formula::Eq(..) | Formula::ReMatch(..) => {
                Formula::Not(Box::new(f.clone()))
            }
            Formula::Not(g) => pos(g),
            Formula::And(gs) => Formula::or(gs.iter().map(neg).collect()),
            Formula::Or(gs) => Formula::and(gs.iter().map(neg).collect()),
            Formula::Implies(a, b) => Formula::and(vec![pos(a), neg(b)]),
            Formula::Forall(v, s, body) => Formula::Exists(v.clone(), s.clone(), Box::new(neg(body))),
            Formula::Exists(v, s, body) => Formula::Forall(v.clone(), s.clone(), Box::new(neg(body))),
        }
    }
    pos(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quant {
    Forall,
    Exists,
}

/// Negation normal form with all quantifiers pulled to an outermost prefix.
/// Bound variables are renamed apart as needed.
pub fn nnf_prenex(f: &Formula) -> Formula {
    let g = nnf(f);
    let mut used: BTreeSet<String> = g.free_vars().into_keys().collect();
    let (prefix, matrix) = pull(&g, &mut used);
    let mut out = matrix;
    for (q, v, s) in prefix.into_iter().rev() {
        out = match q {
            Quant::Forall => Formula::Forall(v, s, Box::new(out)),
            Quant::Exists => Formula::Exists(v, s, Box::new(out)),
        };
    }
    out
}

fn pull(f: &Formula, used: &mut BTreeSet<String>) -> (Vec<(Quant, String, String)>, Formula) {
    match f {
        Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
            let q = if matches!(f, Formula::Forall(..)) { Quant::Forall } else { Quant::Exists };
            let name = fresh_name(v, used);
            used.insert(name.clone());
            let body = if name == *v {
                (**body).clone()
            } else {
                body.subst_var(v, &Term::var(&name, s))
            };
            let (mut prefix, matrix) = pull(&body, used);
            prefix.insert(0, (q, name, s.clone()));
            (prefix, matrix)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let mut prefix = Vec::new();
            let mut parts = Vec::new();
            for g in gs {
                let (p, m) = pull(g, used);
                prefix.extend(p);
                parts.push(m);
            }
            let matrix = if matches!(f, Formula::And(..)) {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            };
            (prefix, matrix)
        }
        // NNF input: negations sit on atoms, implications are gone
        _ => (Vec::new(), f.clone()),
    }
}

/// Replaces the existential prefix of a prenex-NNF sentence with fresh Skolem
/// constants/functions, returning the universal formula and the extended
/// signature. Skolem symbols are named `skN` deterministically.
pub fn skolemize(f: &Formula, sig: &Signature) -> Result<(Formula, Signature)> {
    let mut sig = sig.clone();
    let mut counter = 0usize;
    let mut fresh_sk = |sig: &Signature| {
        loop {
            let name = format!("sk{counter}");
            counter += 1;
            if !sig.constants.contains_key(&name)
                && !sig.functions.contains_key(&name)
                && !sig.relations.contains_key(&name)
            {
                return name;
            }
        }
    };

    let mut universals: Vec<(String, String)> = Vec::new();
    let mut cur = f.clone();
    let mut binding: BTreeMap<String, Term> = BTreeMap::new();
    let mut prefix: Vec<(String, String)> = Vec::new();
    loop {
        match cur {
            Formula::Forall(v, s, body) => {
                universals.push((v.clone(), s.clone()));
                prefix.push((v, s));
                cur = *body;
            }
            Formula::Exists(v, s, body) => {
                let name = fresh_sk(&sig);
                let replacement = if universals.is_empty() {
                    sig.add_constant(&name, &s)?;
                    Term::Const(name)
                } else {
                    let args: Vec<&str> = universals.iter().map(|(_, s)| s.as_str()).collect();
                    sig.add_function(&name, &args, &s)?;
                    Term::App(
                        name,
                        universals.iter().map(|(v, s)| Term::var(v, s)).collect(),
                    )
                };
                binding.insert(v, replacement);
                cur = *body;
            }
            matrix => {
                if has_quantifier(&matrix) {
                    return Err(Error::Invalid(
                        "skolemize expects a prenex formula".to_string(),
                    ));
                }
                let mut out = matrix.substitute(&binding);
                for (v, s) in prefix.into_iter().rev() {
                    out = Formula::Forall(v, s, Box::new(out));
                }
                return Ok((out, sig));
            }
        }
    }
}

fn has_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => true,
        Formula::Not(g) => has_quantifier(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().any(has_quantifier),
        Formula::Implies(a, b) => has_quantifier(a) || has_quantifier(b),
        _ => false,
    }
}
