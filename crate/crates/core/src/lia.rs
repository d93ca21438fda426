//! Decision procedure for linear integer arithmetic with order, by Cooper's
//! quantifier elimination. Divisibility constraints are internal only: they
//! are introduced during elimination and never appear in input formulas.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fol::{Formula, Term, SORT_INT};

/// Linear term `sum coeffs[v] * v + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Lin {
    coeffs: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl Lin {
    fn constant(c: impl Into<BigInt>) -> Lin {
        Lin { coeffs: BTreeMap::new(), constant: c.into() }
    }

    fn var(v: &str) -> Lin {
        Lin {
            coeffs: [(v.to_string(), BigInt::one())].into(),
            constant: BigInt::zero(),
        }
    }

    fn add(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(v.clone()).or_insert_with(BigInt::zero);
            *e += c;
        }
        out.constant += &other.constant;
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&self, k: &BigInt) -> Lin {
        if k.is_zero() {
            return Lin::constant(0);
        }
        Lin {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    fn sub(&self, other: &Lin) -> Lin {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    fn coeff(&self, v: &str) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Removes `v` and returns the term with `v` replaced by `e` (coefficient
    /// of `v` must be taken into account by the caller via `scale`).
    fn subst(&self, v: &str, e: &Lin) -> Lin {
        let c = self.coeff(v);
        let mut rest = self.clone();
        rest.coeffs.remove(v);
        rest.add(&e.scale(&c))
    }

    fn is_ground(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Quantifier-free formula over `t < 0` and `m | t` atoms.
#[derive(Debug, Clone)]
enum Qff {
    T,
    F,
    /// `t < 0`
    Lt(Lin),
    /// `m | t` (positive) or its negation
    Dvd(bool, BigInt, Lin),
    And(Vec<Qff>),
    Or(Vec<Qff>),
}

impl Qff {
    fn negate(self) -> Qff {
        match self {
            Qff::T => Qff::F,
            Qff::F => Qff::T,
            // not (t < 0) == -t - 1 < 0
            Qff::Lt(t) => Qff::Lt(t.scale(&BigInt::from(-1)).add(&Lin::constant(-1))),
            Qff::Dvd(pos, m, t) => Qff::Dvd(!pos, m, t),
            Qff::And(fs) => Qff::Or(fs.into_iter().map(Qff::negate).collect()),
            Qff::Or(fs) => Qff::And(fs.into_iter().map(Qff::negate).collect()),
        }
    }

    fn eval_ground(&self) -> Result<bool> {
        match self {
            Qff::T => Ok(true),
            Qff::F => Ok(false),
            Qff::Lt(t) if t.is_ground() => Ok(t.constant.is_negative()),
            Qff::Dvd(pos, m, t) if t.is_ground() => {
                Ok((t.constant.mod_floor(m).is_zero()) == *pos)
            }
            Qff::And(fs) => {
                for f in fs {
                    if !f.eval_ground()? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Qff::Or(fs) => {
                for f in fs {
                    if f.eval_ground()? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            _ => Err(Error::Invalid("free variable survived elimination".to_string())),
        }
    }

    fn subst(&self, v: &str, e: &Lin) -> Qff {
        match self {
            Qff::T => Qff::T,
            Qff::F => Qff::F,
            Qff::Lt(t) => Qff::Lt(t.subst(v, e)),
            Qff::Dvd(pos, m, t) => Qff::Dvd(*pos, m.clone(), t.subst(v, e)),
            Qff::And(fs) => Qff::And(fs.iter().map(|f| f.subst(v, e)).collect()),
            Qff::Or(fs) => Qff::Or(fs.iter().map(|f| f.subst(v, e)).collect()),
        }
    }
}

fn lin_of_term(t: &Term) -> Result<Lin> {
    match t {
        Term::Var { name, .. } => Ok(Lin::var(name)),
        Term::Int(k) => Ok(Lin::constant(*k)),
        Term::App(f, args) if f == "+" && args.len() == 2 => {
            Ok(lin_of_term(&args[0])?.add(&lin_of_term(&args[1])?))
        }
        _ => Err(Error::Fragment(format!("term outside linear arithmetic: {t:?}"))),
    }
}

/// Translates and eliminates quantifiers on the fly.
fn translate(f: &Formula) -> Result<Qff> {
    match f {
        Formula::True => Ok(Qff::T),
        Formula::False => Ok(Qff::F),
        Formula::Rel(r, ts) if r == "<" && ts.len() == 2 => {
            Ok(Qff::Lt(lin_of_term(&ts[0])?.sub(&lin_of_term(&ts[1])?)))
        }
        Formula::Rel(r, _) => Err(Error::Fragment(format!("uninterpreted relation {r}"))),
        Formula::Eq(a, b) => {
            // a = b  ==  a - b < 1 and b - a < 1
            let d = lin_of_term(a)?.sub(&lin_of_term(b)?);
            Ok(Qff::And(vec![
                Qff::Lt(d.add(&Lin::constant(-1))),
                Qff::Lt(d.scale(&BigInt::from(-1)).add(&Lin::constant(-1))),
            ]))
        }
        Formula::ReMatch(..) => {
            Err(Error::Fragment("regular predicate in integer formula".to_string()))
        }
        Formula::Not(g) => Ok(translate(g)?.negate()),
        Formula::And(gs) => Ok(Qff::And(gs.iter().map(translate).collect::<Result<_>>()?)),
        Formula::Or(gs) => Ok(Qff::Or(gs.iter().map(translate).collect::<Result<_>>()?)),
        Formula::Implies(a, b) => Ok(Qff::Or(vec![translate(a)?.negate(), translate(b)?])),
        Formula::Exists(v, s, body) => {
            if s != SORT_INT {
                return Err(Error::Fragment(format!("non-integer quantifier over {s}")));
            }
            Ok(eliminate(v, translate(body)?))
        }
        Formula::Forall(v, s, body) => {
            if s != SORT_INT {
                return Err(Error::Fragment(format!("non-integer quantifier over {s}")));
            }
            Ok(eliminate(v, translate(body)?.negate()).negate())
        }
    }
}

/// Cooper elimination of `exists v. f` for quantifier-free `f`.
fn eliminate(v: &str, f: Qff) -> Qff {
    // delta = lcm of |coefficients| of v
    let mut delta = BigInt::one();
    collect_coeffs(&f, v, &mut delta);
    if delta.is_one() && !mentions(&f, v) {
        return f;
    }
    // normalize all coefficients of v to +-delta, then set delta*v = v
    let normalized = normalize(&f, v, &delta);
    let with_dvd = if delta.is_one() {
        normalized
    } else {
        Qff::And(vec![normalized, Qff::Dvd(true, delta.clone(), Lin::var(v))])
    };
    // m = lcm of divisibility moduli
    let mut m = BigInt::one();
    collect_moduli(&with_dvd, &mut m);
    let lowers = lower_bounds(&with_dvd, v);
    let minus_inf = drop_bounds(&with_dvd, v);
    let mut cases = Vec::new();
    let mut j = BigInt::one();
    while j <= m {
        cases.push(minus_inf.subst(v, &Lin::constant(j.clone())));
        for b in &lowers {
            cases.push(with_dvd.subst(v, &b.add(&Lin::constant(j.clone()))));
        }
        j += 1;
    }
    Qff::Or(cases)
}

fn mentions(f: &Qff, v: &str) -> bool {
    match f {
        Qff::Lt(t) | Qff::Dvd(_, _, t) => !t.coeff(v).is_zero(),
        Qff::And(fs) | Qff::Or(fs) => fs.iter().any(|g| mentions(g, v)),
        _ => false,
    }
}

fn collect_coeffs(f: &Qff, v: &str, delta: &mut BigInt) {
    match f {
        Qff::Lt(t) | Qff::Dvd(_, _, t) => {
            let c = t.coeff(v);
            if !c.is_zero() {
                *delta = delta.lcm(&c.abs());
            }
        }
        Qff::And(fs) | Qff::Or(fs) => fs.iter().for_each(|g| collect_coeffs(g, v, delta)),
        _ => {}
    }
}

/// Multiplies every atom so the coefficient of `v` is `+-delta`, then renames
/// `delta*v` back to `v` (coefficient `+-1`).
fn normalize(f: &Qff, v: &str, delta: &BigInt) -> Qff {
    match f {
        Qff::Lt(t) => {
            let c = t.coeff(v);
            if c.is_zero() {
                return Qff::Lt(t.clone());
            }
            let k = delta / c.abs();
            let mut t2 = t.scale(&k);
            // coefficient is now +-delta; substitute unit coefficient
            let sign = if c.is_negative() { -BigInt::one() } else { BigInt::one() };
            t2.coeffs.insert(v.to_string(), sign);
            Qff::Lt(t2)
        }
        Qff::Dvd(pos, m, t) => {
            let c = t.coeff(v);
            if c.is_zero() {
                return Qff::Dvd(*pos, m.clone(), t.clone());
            }
            let k = delta / c.abs();
            let mut t2 = t.scale(&k);
            let sign = if c.is_negative() { -BigInt::one() } else { BigInt::one() };
            t2.coeffs.insert(v.to_string(), sign);
            Qff::Dvd(*pos, m * k.abs(), t2)
        }
        Qff::And(fs) => Qff::And(fs.iter().map(|g| normalize(g, v, delta)).collect()),
        Qff::Or(fs) => Qff::Or(fs.iter().map(|g| normalize(g, v, delta)).collect()),
        _ => f.clone(),
    }
}

fn collect_moduli(f: &Qff, m: &mut BigInt) {
    match f {
        Qff::Dvd(_, k, _) => *m = m.lcm(k),
        Qff::And(fs) | Qff::Or(fs) => fs.iter().for_each(|g| collect_moduli(g, m)),
        _ => {}
    }
}

/// Terms `b` such that `b < v` occurs (coefficient of `v` is `-1`).
fn lower_bounds(f: &Qff, v: &str) -> Vec<Lin> {
    match f {
        Qff::Lt(t) => {
            if t.coeff(v) == -BigInt::one() {
                // t = -v + b' < 0, i.e. b' < v; the bound is b'
                let mut b = t.clone();
                b.coeffs.remove(v);
                vec![b]
            } else {
                Vec::new()
            }
        }
        Qff::And(fs) | Qff::Or(fs) => fs.iter().flat_map(|g| lower_bounds(g, v)).collect(),
        _ => Vec::new(),
    }
}

/// The limit of `f` as `v` goes to negative infinity.
fn drop_bounds(f: &Qff, v: &str) -> Qff {
    match f {
        Qff::Lt(t) => {
            let c = t.coeff(v);
            if c.is_zero() {
                Qff::Lt(t.clone())
            } else if c.is_negative() {
                Qff::F // b < v fails at negative infinity
            } else {
                Qff::T // v < b holds at negative infinity
            }
        }
        Qff::And(fs) => Qff::And(fs.iter().map(|g| drop_bounds(g, v)).collect()),
        Qff::Or(fs) => Qff::Or(fs.iter().map(|g| drop_bounds(g, v)).collect()),
        _ => f.clone(),
    }
}

/// Validity over the standard integers; free integer variables are
/// universally quantified.
pub fn lia_valid(f: &Formula) -> Result<bool> {
    let mut closed = f.clone();
    for (v, s) in f.free_vars() {
        if s != SORT_INT {
            return Err(Error::Fragment(format!("non-integer variable {v}")));
        }
        closed = Formula::forall(&v, &s, closed);
    }
    translate(&closed)?.eval_ground()
}

/// Satisfiability; free variables are existentially quantified.
pub fn lia_sat(f: &Formula) -> Result<bool> {
    Ok(!lia_valid(&f.clone().negate())?)
}

/// A quantifier-free linear-arithmetic formula that can be evaluated
/// pointwise under integer assignments, exposing single-variable
/// existential elimination so the two can be compared.
#[derive(Debug, Clone)]
pub struct QfLia(Qff);

impl QfLia {
    /// Translates a formula into quantifier-free form; any quantifiers in
    /// the input are eliminated on the fly.
    pub fn of(f: &Formula) -> Result<QfLia> {
        Ok(QfLia(translate(f)?))
    }

    /// Existentially eliminates `v`: the result holds under an assignment
    /// iff some integer value for `v` makes `self` hold.
    pub fn eliminate_exists(&self, v: &str) -> QfLia {
        QfLia(eliminate(v, self.0.clone()))
    }

    /// Evaluates under an assignment covering every free variable.
    pub fn eval(&self, env: &BTreeMap<String, i64>) -> Result<bool> {
        let mut f = self.0.clone();
        for (v, val) in env {
            f = f.subst(v, &Lin::constant(*val));
        }
        f.eval_ground()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n, SORT_INT)
    }

    fn lt(a: Term, b: Term) -> Formula {
        Formula::Rel("<".into(), vec![a, b])
    }

    fn plus(a: Term, b: Term) -> Term {
        Term::App("+".into(), vec![a, b])
    }

    #[test]
    fn elimination_agrees_pointwise() {
        // exists y. x < y and y < x + 3, which holds for every x
        let f = Formula::And(vec![
            lt(v("x"), v("y")),
            lt(v("y"), plus(v("x"), Term::Int(3))),
        ]);
        let full = QfLia::of(&f).unwrap();
        let elim = full.eliminate_exists("y");
        for x in -5..=5i64 {
            let direct = (-10..=10).any(|y| {
                full.eval(&[("x".to_string(), x), ("y".to_string(), y)].into()).unwrap()
            });
            assert_eq!(elim.eval(&[("x".to_string(), x)].into()).unwrap(), direct);
        }
    }

    #[test]
    fn order_axioms_hold() {
        assert!(lia_valid(&lt(v("x"), v("x")).negate()).unwrap());
        let trans = Formula::implies(
            Formula::and(vec![lt(v("x"), v("y")), lt(v("y"), v("z"))]),
            lt(v("x"), v("z")),
        );
        assert!(lia_valid(&trans).unwrap());
        let total = Formula::or(vec![
            lt(v("x"), v("y")),
            lt(v("y"), v("x")),
            Formula::Eq(v("x"), v("y")),
        ]);
        assert!(lia_valid(&total).unwrap());
    }

    #[test]
    fn density_fails_discreteness_holds() {
        // exists z between any x < y: false over the integers
        let dense = Formula::implies(
            lt(v("x"), v("y")),
            Formula::exists(
                "z",
                SORT_INT,
                Formula::and(vec![lt(v("x"), v("z")), lt(v("z"), v("y"))]),
            ),
        );
        assert!(!lia_valid(&dense).unwrap());
        // every x has a successor with nothing in between
        let succ = Formula::exists(
            "y",
            SORT_INT,
            Formula::and(vec![
                lt(v("x"), v("y")),
                Formula::forall(
                    "z",
                    SORT_INT,
                    Formula::and(vec![lt(v("x"), v("z")), lt(v("z"), v("y"))]).negate(),
                ),
            ]),
        );
        assert!(lia_valid(&succ).unwrap());
    }

    #[test]
    fn coefficient_normalization() {
        // forall x. exists y. x = y + y or x = y + y + 1
        let twice = plus(v("y"), v("y"));
        let f = Formula::exists(
            "y",
            SORT_INT,
            Formula::or(vec![
                Formula::Eq(v("x"), twice.clone()),
                Formula::Eq(v("x"), plus(twice, Term::Int(1))),
            ]),
        );
        assert!(lia_valid(&f).unwrap());
        // forall x. exists y. x = y + y is false
        let g = Formula::exists(
            "y",
            SORT_INT,
            Formula::Eq(v("x"), plus(v("y"), v("y"))),
        );
        assert!(!lia_valid(&g).unwrap());
    }

    #[test]
    fn ground_arithmetic() {
        assert!(lia_valid(&lt(Term::Int(1), Term::Int(2))).unwrap());
        assert!(!lia_valid(&lt(Term::Int(2), Term::Int(2))).unwrap());
        assert!(lia_sat(&Formula::Eq(plus(Term::Int(1), Term::Int(1)), Term::Int(2))).unwrap());
    }
}
