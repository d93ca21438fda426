//! Compilation of string formulas to synchronous multi-track automata.
//!
//! Compilation works on *flat* atoms: regular membership of a variable,
//! strict prefix between variables, and equality between a variable and a
//! straightline term (a variable or the empty word followed by appends). The
//! lowering pass brings arbitrary formulas into that shape by pulling
//! if-then-else out of terms, expanding defined symbols through their
//! defining formulas, and naming compound arguments with fresh existentials.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fol::{fresh_name, Formula, Term, SORT_STRING};
use crate::re::Regex;
use crate::strings::automaton::{Label, SyncAutomaton};
use crate::strings::defined;

/// An automaton whose tracks are named by (sorted) variable names.
#[derive(Debug, Clone)]
pub struct VarAutomaton {
    pub vars: Vec<String>,
    pub aut: SyncAutomaton,
}

impl VarAutomaton {
    fn constant(value: bool, max_letter: u32) -> VarAutomaton {
        let mut aut = SyncAutomaton::empty(0, max_letter);
        if value {
            aut.accepting.insert(0);
        }
        VarAutomaton { vars: Vec::new(), aut }
    }

    /// Extends both automata to the union of their variable sets.
    fn align(&self, other: &VarAutomaton) -> (Vec<String>, SyncAutomaton, SyncAutomaton) {
        let merged: Vec<String> = {
            let mut s: BTreeSet<String> = self.vars.iter().cloned().collect();
            s.extend(other.vars.iter().cloned());
            s.into_iter().collect()
        };
        let mut a = self.aut.clone();
        let mut b = other.aut.clone();
        for (i, v) in merged.iter().enumerate() {
            if !self.vars.contains(v) {
                a = a.insert_track(i);
            }
            if !other.vars.contains(v) {
                b = b.insert_track(i);
            }
        }
        (merged, a, b)
    }

    fn track(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }
}

/// Straightline term: an optional variable base followed by appended letters.
fn straightline(t: &Term) -> Option<(Option<String>, Vec<u32>)> {
    match t {
        Term::Var { name, .. } => Some((Some(name.clone()), Vec::new())),
        Term::Epsilon => Some((None, Vec::new())),
        Term::Append(inner, d) => {
            let (base, mut suffix) = straightline(inner)?;
            suffix.push(*d);
            Some((base, suffix))
        }
        _ => None,
    }
}

fn as_var(t: &Term) -> Option<&str> {
    match t {
        Term::Var { name, .. } => Some(name),
        _ => None,
    }
}

/// First if-then-else occurring inside `t`, with the two resolutions of `t`.
fn split_ite(t: &Term) -> Option<(Formula, Term, Term)> {
    match t {
        Term::Ite(c, a, b) => Some(((**c).clone(), (**a).clone(), (**b).clone())),
        Term::App(f, args) => {
            for (i, arg) in args.iter().enumerate() {
                if let Some((c, yes, no)) = split_ite(arg) {
                    let mut ayes = args.clone();
                    let mut ano = args.clone();
                    ayes[i] = yes;
                    ano[i] = no;
                    return Some((c, Term::App(f.clone(), ayes), Term::App(f.clone(), ano)));
                }
            }
            None
        }
        Term::Append(inner, d) => split_ite(inner).map(|(c, yes, no)| {
            (c, Term::Append(Box::new(yes), *d), Term::Append(Box::new(no), *d))
        }),
        _ => None,
    }
}

/// Innermost application of a defined symbol inside `t`.
fn find_defined(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, args) => {
            for arg in args {
                if let Some(found) = find_defined(arg) {
                    return Some(found);
                }
            }
            if defined::is_defined_symbol(f) && args.len() == 1 {
                Some(t.clone())
            } else {
                None
            }
        }
        Term::Append(inner, _) => find_defined(inner),
        Term::Ite(_, a, b) => find_defined(a).or_else(|| find_defined(b)),
        _ => None,
    }
}

fn replace_term(t: &Term, target: &Term, by: &Term) -> Term {
    if t == target {
        return by.clone();
    }
    match t {
        Term::App(f, args) => {
            Term::App(f.clone(), args.iter().map(|a| replace_term(a, target, by)).collect())
        }
        Term::Append(inner, d) => Term::Append(Box::new(replace_term(inner, target, by)), *d),
        Term::Ite(c, a, b) => Term::Ite(
            c.clone(),
            Box::new(replace_term(a, target, by)),
            Box::new(replace_term(b, target, by)),
        ),
        _ => t.clone(),
    }
}

fn atom_terms(f: &Formula) -> Vec<&Term> {
    match f {
        Formula::Rel(_, ts) => ts.iter().collect(),
        Formula::Eq(a, b) => vec![a, b],
        Formula::ReMatch(_, t) => vec![t],
        _ => Vec::new(),
    }
}

fn map_atom_terms(f: &Formula, g: &impl Fn(&Term) -> Term) -> Formula {
    match f {
        Formula::Rel(r, ts) => Formula::Rel(r.clone(), ts.iter().map(g).collect()),
        Formula::Eq(a, b) => Formula::Eq(g(a), g(b)),
        Formula::ReMatch(r, t) => Formula::ReMatch(r.clone(), g(t)),
        _ => f.clone(),
    }
}

pub struct Lowerer {
    used: BTreeSet<String>,
    max_letter: u32,
    budget: usize,
}

impl Lowerer {
    pub fn new(f: &Formula, max_letter: u32) -> Lowerer {
        let mut used: BTreeSet<String> = f.free_vars().keys().cloned().collect();
        collect_bound(f, &mut used);
        Lowerer { used, max_letter, budget: 100_000 }
    }

    fn fresh(&mut self) -> String {
        let n = fresh_name("u", &self.used);
        self.used.insert(n.clone());
        n
    }

    pub fn lower(&mut self, f: &Formula) -> Result<Formula> {
        self.budget = self
            .budget
            .checked_sub(1)
            .ok_or_else(|| Error::Budget("lowering blow-up".to_string()))?;
        match f {
            Formula::True | Formula::False => Ok(f.clone()),
            Formula::Not(g) => Ok(self.lower(g)?.negate()),
            Formula::And(gs) => {
                Ok(Formula::and(gs.iter().map(|g| self.lower(g)).collect::<Result<_>>()?))
            }
            Formula::Or(gs) => {
                Ok(Formula::or(gs.iter().map(|g| self.lower(g)).collect::<Result<_>>()?))
            }
            Formula::Implies(a, b) => Ok(Formula::implies(self.lower(a)?, self.lower(b)?)),
            Formula::Forall(v, s, body) => Ok(Formula::forall(v, s, self.lower(body)?)),
            Formula::Exists(v, s, body) => Ok(Formula::exists(v, s, self.lower(body)?)),
            _ => self.lower_atom(f),
        }
    }

    fn lower_atom(&mut self, atom: &Formula) -> Result<Formula> {
        // 1. pull if-then-else to the formula level
        for t in atom_terms(atom) {
            if let Some((c, yes, no)) = split_ite(t) {
                let t = t.clone();
                let yes_atom = map_atom_terms(atom, &|u| replace_term(u, &t, &yes));
                let no_atom = map_atom_terms(atom, &|u| replace_term(u, &t, &no));
                let c_lo = self.lower(&c)?;
                return Ok(Formula::or(vec![
                    Formula::and(vec![c_lo.clone(), self.lower(&yes_atom)?]),
                    Formula::and(vec![c_lo.negate(), self.lower(&no_atom)?]),
                ]));
            }
        }
        // 2. expand defined symbols through their defining formulas
        for t in atom_terms(atom) {
            if let Some(app) = find_defined(t) {
                let (name, arg) = match &app {
                    Term::App(f, args) => (f.clone(), args[0].clone()),
                    _ => unreachable!(),
                };
                let u = self.fresh();
                let def = defined::definition(&name, &arg, &u, self.max_letter)
                    .ok_or_else(|| Error::Unsupported(format!("undefined symbol {name}")))?;
                let uvar = Term::var(&u, SORT_STRING);
                let rest = map_atom_terms(atom, &|s| replace_term(s, &app, &uvar));
                let inner = Formula::and(vec![def, rest]);
                return Ok(Formula::exists(&u, SORT_STRING, self.lower(&inner)?));
            }
        }
        // 3. name compound arguments so every atom is flat
        match atom {
            Formula::ReMatch(r, t) => {
                if as_var(t).is_some() {
                    return Ok(atom.clone());
                }
                let (_, _) = straightline(t)
                    .ok_or_else(|| Error::Fragment(format!("non-string term in {atom:?}")))?;
                let u = self.fresh();
                let uvar = Term::var(&u, SORT_STRING);
                Ok(Formula::exists(
                    &u,
                    SORT_STRING,
                    Formula::and(vec![
                        Formula::Eq(uvar.clone(), t.clone()),
                        Formula::ReMatch(r.clone(), uvar),
                    ]),
                ))
            }
            Formula::Eq(a, b) => {
                let sa = straightline(a);
                let sb = straightline(b);
                if sa.is_none() || sb.is_none() {
                    return Err(Error::Fragment(format!("non-string equality {atom:?}")));
                }
                if as_var(a).is_some() {
                    return Ok(atom.clone());
                }
                if as_var(b).is_some() {
                    return Ok(Formula::Eq(b.clone(), a.clone()));
                }
                let u = self.fresh();
                let uvar = Term::var(&u, SORT_STRING);
                Ok(Formula::exists(
                    &u,
                    SORT_STRING,
                    Formula::and(vec![
                        Formula::Eq(uvar.clone(), a.clone()),
                        Formula::Eq(uvar, b.clone()),
                    ]),
                ))
            }
            Formula::Rel(r, ts) if r == "prefix" && ts.len() == 2 => {
                let mut names = Vec::new();
                let mut wrap = Vec::new();
                for t in ts {
                    match as_var(t) {
                        Some(v) => names.push(v.to_string()),
                        None => {
                            straightline(t).ok_or_else(|| {
                                Error::Fragment(format!("non-string term in {atom:?}"))
                            })?;
                            let u = self.fresh();
                            wrap.push((u.clone(), t.clone()));
                            names.push(u);
                        }
                    }
                }
                let mut out = Formula::Rel(
                    r.clone(),
                    names.iter().map(|n| Term::var(n, SORT_STRING)).collect(),
                );
                for (u, t) in wrap.into_iter().rev() {
                    out = Formula::exists(
                        &u,
                        SORT_STRING,
                        Formula::and(vec![
                            Formula::Eq(Term::var(&u, SORT_STRING), t),
                            out,
                        ]),
                    );
                }
                Ok(out)
            }
            _ => Err(Error::Fragment(format!("atom not in the string language: {atom:?}"))),
        }
    }
}

fn collect_bound(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Not(g) => collect_bound(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_bound(g, out)),
        Formula::Implies(a, b) => {
            collect_bound(a, out);
            collect_bound(b, out);
        }
        Formula::Forall(v, _, g) | Formula::Exists(v, _, g) => {
            out.insert(v.clone());
            collect_bound(g, out);
        }
        _ => {}
    }
}

/// Thompson construction, then epsilon elimination, as a 1-track automaton.
pub fn regex_automaton(r: &Regex, max_letter: u32) -> SyncAutomaton {
    struct Nfa {
        states: usize,
        eps: Vec<(usize, usize)>,
        steps: Vec<(usize, u32, usize)>,
    }
    fn build(r: &Regex, nfa: &mut Nfa) -> (usize, usize) {
        let fresh = |nfa: &mut Nfa| {
            nfa.states += 1;
            nfa.states - 1
        };
        match r {
            Regex::Epsilon => {
                let q = fresh(nfa);
                (q, q)
            }
            Regex::Letter(a) => {
                let p = fresh(nfa);
                let q = fresh(nfa);
                nfa.steps.push((p, *a, q));
                (p, q)
            }
            Regex::Concat(x, y) => {
                let (p1, q1) = build(x, nfa);
                let (p2, q2) = build(y, nfa);
                nfa.eps.push((q1, p2));
                (p1, q2)
            }
            Regex::Alt(x, y) => {
                let p = fresh(nfa);
                let q = fresh(nfa);
                let (p1, q1) = build(x, nfa);
                let (p2, q2) = build(y, nfa);
                nfa.eps.extend([(p, p1), (p, p2), (q1, q), (q2, q)]);
                (p, q)
            }
            Regex::Star(x) => {
                let p = fresh(nfa);
                let (p1, q1) = build(x, nfa);
                nfa.eps.extend([(p, p1), (q1, p)]);
                (p, p)
            }
        }
    }
    let mut nfa = Nfa { states: 0, eps: Vec::new(), steps: Vec::new() };
    let (start, end) = build(r, &mut nfa);
    // epsilon closures
    let mut closure: Vec<BTreeSet<usize>> = (0..nfa.states).map(|q| [q].into()).collect();
    loop {
        let mut changed = false;
        for (p, q) in &nfa.eps {
            let qs = closure[*q].clone();
            for s in qs {
                if closure[*p].insert(s) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = SyncAutomaton::empty(1, max_letter);
    out.states = nfa.states.max(1);
    out.initial = start;
    for p in 0..nfa.states {
        if closure[p].contains(&end) {
            out.accepting.insert(p);
        }
        for q in &closure[p] {
            for (s, a, r2) in &nfa.steps {
                if s == q {
                    out.transitions.push((p, vec![Some(*a)], *r2));
                }
            }
        }
    }
    out.transitions.sort();
    out.transitions.dedup();
    out
}

/// `x = base . suffix` over the named tracks.
fn eq_automaton(
    x: &str,
    base: Option<&str>,
    suffix: &[u32],
    max_letter: u32,
) -> VarAutomaton {
    match base {
        None => {
            // ground word
            let mut aut = SyncAutomaton::empty(1, max_letter);
            aut.states = suffix.len() + 1;
            for (i, d) in suffix.iter().enumerate() {
                aut.transitions.push((i, vec![Some(*d)], i + 1));
            }
            aut.accepting.insert(suffix.len());
            VarAutomaton { vars: vec![x.to_string()], aut }
        }
        Some(y) if y == x => {
            // x = x . suffix holds iff suffix is empty
            if suffix.is_empty() {
                VarAutomaton {
                    vars: vec![x.to_string()],
                    aut: SyncAutomaton::universal(1, max_letter),
                }
            } else {
                VarAutomaton {
                    vars: vec![x.to_string()],
                    aut: SyncAutomaton::empty(1, max_letter),
                }
            }
        }
        Some(y) => {
            let mut vars = vec![x.to_string(), y.to_string()];
            vars.sort();
            let tx = vars.iter().position(|v| v == x).unwrap();
            let ty = 1 - tx;
            let mut aut = SyncAutomaton::empty(2, max_letter);
            aut.states = suffix.len() + 1;
            for a in 0..=max_letter {
                let mut l: Label = vec![None, None];
                l[tx] = Some(a);
                l[ty] = Some(a);
                aut.transitions.push((0, l, 0));
            }
            for (i, d) in suffix.iter().enumerate() {
                let mut l: Label = vec![None, None];
                l[tx] = Some(*d);
                aut.transitions.push((i, l, i + 1));
            }
            aut.accepting.insert(suffix.len());
            VarAutomaton { vars, aut }
        }
    }
}

/// Strict prefix `x` of `y` over the named tracks.
fn prefix_automaton(x: &str, y: &str, max_letter: u32) -> VarAutomaton {
    if x == y {
        return VarAutomaton {
            vars: vec![x.to_string()],
            aut: SyncAutomaton::empty(1, max_letter),
        };
    }
    let mut vars = vec![x.to_string(), y.to_string()];
    vars.sort();
    let tx = vars.iter().position(|v| v == x).unwrap();
    let ty = 1 - tx;
    let mut aut = SyncAutomaton::empty(2, max_letter);
    aut.states = 2;
    for a in 0..=max_letter {
        let mut same: Label = vec![None, None];
        same[tx] = Some(a);
        same[ty] = Some(a);
        aut.transitions.push((0, same, 0));
        let mut longer: Label = vec![None, None];
        longer[ty] = Some(a);
        aut.transitions.push((0, longer.clone(), 1));
        aut.transitions.push((1, longer, 1));
    }
    aut.accepting.insert(1);
    VarAutomaton { vars, aut }
}

/// Compiles a lowered formula. All quantifiers must range over strings.
pub fn compile(f: &Formula, max_letter: u32) -> Result<VarAutomaton> {
    match f {
        Formula::True => Ok(VarAutomaton::constant(true, max_letter)),
        Formula::False => Ok(VarAutomaton::constant(false, max_letter)),
        Formula::ReMatch(r, t) => {
            let x = as_var(t)
                .ok_or_else(|| Error::Fragment("regex argument is not a variable".to_string()))?;
            if r.max_letter().map(|m| m > max_letter).unwrap_or(false) {
                return Err(Error::Fragment("regex letter outside the alphabet".to_string()));
            }
            Ok(VarAutomaton {
                vars: vec![x.to_string()],
                aut: regex_automaton(r, max_letter)
                    .intersect(&crate::strings::automaton::valid_enc(1, max_letter)),
            })
        }
        Formula::Eq(a, b) => {
            let x = as_var(a)
                .ok_or_else(|| Error::Fragment("equality not flat after lowering".to_string()))?;
            let (base, suffix) = straightline(b)
                .ok_or_else(|| Error::Fragment("equality not flat after lowering".to_string()))?;
            if suffix.iter().any(|d| *d > max_letter) {
                return Err(Error::Fragment("letter outside the alphabet".to_string()));
            }
            Ok(eq_automaton(x, base.as_deref(), &suffix, max_letter))
        }
        Formula::Rel(r, ts) if r == "prefix" && ts.len() == 2 => {
            let x = as_var(&ts[0])
                .ok_or_else(|| Error::Fragment("prefix not flat after lowering".to_string()))?;
            let y = as_var(&ts[1])
                .ok_or_else(|| Error::Fragment("prefix not flat after lowering".to_string()))?;
            Ok(prefix_automaton(x, y, max_letter))
        }
        Formula::Rel(r, _) => Err(Error::Fragment(format!("uninterpreted relation {r}"))),
        Formula::Not(g) => {
            let va = compile(g, max_letter)?;
            Ok(VarAutomaton { vars: va.vars, aut: va.aut.complement() })
        }
        Formula::And(gs) => {
            let mut acc = VarAutomaton::constant(true, max_letter);
            for g in gs {
                let vg = compile(g, max_letter)?;
                let (vars, a, b) = acc.align(&vg);
                acc = VarAutomaton { vars, aut: a.intersect(&b) };
            }
            Ok(acc)
        }
        Formula::Or(gs) => {
            let mut acc = VarAutomaton::constant(false, max_letter);
            for g in gs {
                let vg = compile(g, max_letter)?;
                let (vars, a, b) = acc.align(&vg);
                acc = VarAutomaton { vars, aut: a.union(&b) };
            }
            Ok(acc)
        }
        Formula::Implies(a, b) => compile(
            &Formula::or(vec![(**a).clone().negate(), (**b).clone()]),
            max_letter,
        ),
        Formula::Exists(v, s, body) => {
            if s != SORT_STRING {
                return Err(Error::Fragment(format!("non-string quantifier over {s}")));
            }
            let mut va = compile(body, max_letter)?;
            if let Some(i) = va.track(v) {
                va.aut = va.aut.project(i);
                va.vars.remove(i);
            }
            Ok(va)
        }
        Formula::Forall(v, s, body) => {
            let inner = Formula::exists(v, s, (**body).clone().negate());
            let va = compile(&inner.negate(), max_letter)?;
            Ok(va)
        }
    }
}
