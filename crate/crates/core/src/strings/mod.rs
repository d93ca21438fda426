//! Decision procedure for the string base theory: words over a finite
//! numeric alphabet with the empty word, single-letter append, strict prefix,
//! and regular membership predicates. Formulas are decided by compiling to
//! synchronous multi-track automata over padded encodings.

pub mod automaton;
pub mod compile;
pub mod defined;

use crate::error::Result;
use crate::fol::{Formula, SORT_STRING};

pub use automaton::SyncAutomaton;
pub use compile::{regex_automaton, Lowerer, VarAutomaton};
pub use defined::{beta, definition, eval_defined, is_defined_symbol};

/// Largest letter appearing in appends or regexes of `f` (0 if none).
pub fn formula_max_letter(f: &Formula) -> u32 {
    use crate::fol::Term;
    fn term(t: &Term, m: &mut u32) {
        match t {
            Term::Append(inner, d) => {
                *m = (*m).max(*d);
                term(inner, m);
            }
            Term::App(name, args) => {
                if let Some(j) = defined::defined_index(name) {
                    *m = (*m).max(j);
                }
                args.iter().for_each(|a| term(a, m));
            }
            Term::Ite(c, a, b) => {
                go(c, m);
                term(a, m);
                term(b, m);
            }
            _ => {}
        }
    }
    fn go(f: &Formula, m: &mut u32) {
        match f {
            Formula::Rel(_, ts) => ts.iter().for_each(|t| term(t, m)),
            Formula::Eq(a, b) => {
                term(a, m);
                term(b, m);
            }
            Formula::ReMatch(r, t) => {
                if let Some(l) = r.max_letter() {
                    *m = (*m).max(l);
                }
                term(t, m);
            }
            Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => go(g, m),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, m)),
            Formula::Implies(a, b) => {
                go(a, m);
                go(b, m);
            }
            _ => {}
        }
    }
    let mut m = 0;
    go(f, &mut m);
    m
}

/// Validity over the standard word model; free string variables are
/// universally quantified. `max_letter` fixes the alphabet `0..=max_letter`
/// and must cover every letter in the formula.
pub fn str_valid(f: &Formula, max_letter: u32) -> Result<bool> {
    let mut closed = f.clone();
    for (v, s) in f.free_vars() {
        debug_assert_eq!(s, SORT_STRING);
        closed = Formula::forall(&v, &s, closed);
    }
    let mut lw = Lowerer::new(&closed, max_letter);
    let lowered = lw.lower(&closed)?;
    let va = compile::compile(&lowered, max_letter)?;
    debug_assert!(va.vars.is_empty());
    Ok(va.aut.accepts(&[]))
}

/// Satisfiability; free variables are existentially quantified.
pub fn str_sat(f: &Formula, max_letter: u32) -> Result<bool> {
    Ok(!str_valid(&f.clone().negate(), max_letter)?)
}

/// A satisfying assignment for the free string variables, if any.
pub fn str_model(f: &Formula, max_letter: u32) -> Result<Option<Vec<(String, Vec<u32>)>>> {
    let mut lw = Lowerer::new(f, max_letter);
    let lowered = lw.lower(f)?;
    let va = compile::compile(&lowered, max_letter)?;
    let mut samples = va.aut.sample(1);
    Ok(samples.pop().map(|tuple| va.vars.into_iter().zip(tuple).collect()))
}
