//! Many-sorted first-order syntax: signatures, terms, formulas, substitution.
//!
//! One AST serves both the object language and the base-theory languages.
//! The theory-specific constructs (integer literals, `+`, `<`, the string
//! constructors and regular predicates) are built-in symbols recognized by
//! the sort checker; everything else is declared in a [`Signature`].

mod norm;
mod parse;
mod print;
mod qa;

pub use norm::{nnf, nnf_prenex, skolemize};
pub use parse::{parse_file, parse_formula, parse_signature_decls, parse_term, FolFile};
pub use print::{print_formula, print_signature, print_term};
pub use qa::{qa_graph, EdgeProvenance, QaGraph};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::re::Regex;

/// Name of the built-in integer sort of the LIA base theory.
pub const SORT_INT: &str = "int";
/// Name of the built-in string sort of the STR base theory.
pub const SORT_STRING: &str = "string";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    /// Whether this is the distinguished self-cycle sort.
    pub infinite: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub sorts: Vec<Sort>,
    pub constants: BTreeMap<String, String>,
    pub functions: BTreeMap<String, (Vec<String>, String)>,
    pub relations: BTreeMap<String, Vec<String>>,
    /// Designated strict-order symbol on the distinguished sort.
    pub order: Option<String>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn add_sort(&mut self, name: &str, infinite: bool) -> Result<()> {
        if self.sorts.iter().any(|s| s.name == name) {
            return Err(Error::sort(name, "duplicate sort"));
        }
        if infinite && self.sorts.iter().any(|s| s.infinite) {
            return Err(Error::sort(name, "a signature has at most one distinguished sort"));
        }
        self.sorts.push(Sort { name: name.to_string(), infinite });
        Ok(())
    }

    fn check_fresh_symbol(&self, name: &str) -> Result<()> {
        if self.constants.contains_key(name)
            || self.functions.contains_key(name)
            || self.relations.contains_key(name)
        {
            return Err(Error::sort(name, "duplicate symbol"));
        }
        Ok(())
    }

    fn check_sort_known(&self, name: &str) -> Result<()> {
        if self.has_sort(name) {
            Ok(())
        } else {
            Err(Error::sort(name, "unknown sort"))
        }
    }

    pub fn has_sort(&self, name: &str) -> bool {
        name == SORT_INT || name == SORT_STRING || self.sorts.iter().any(|s| s.name == name)
    }

    pub fn add_constant(&mut self, name: &str, sort: &str) -> Result<()> {
        self.check_fresh_symbol(name)?;
        self.check_sort_known(sort)?;
        self.constants.insert(name.to_string(), sort.to_string());
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, args: &[&str], result: &str) -> Result<()> {
        self.check_fresh_symbol(name)?;
        for a in args {
            self.check_sort_known(a)?;
        }
        self.check_sort_known(result)?;
        self.functions
            .insert(name.to_string(), (args.iter().map(|s| s.to_string()).collect(), result.to_string()));
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, args: &[&str]) -> Result<()> {
        self.check_fresh_symbol(name)?;
        for a in args {
            self.check_sort_known(a)?;
        }
        self.relations
            .insert(name.to_string(), args.iter().map(|s| s.to_string()).collect());
        Ok(())
    }

    /// Designates `name` as the order symbol; it must be a declared binary
    /// relation with both arguments of the distinguished sort.
    pub fn set_order(&mut self, name: &str) -> Result<()> {
        let inf = self
            .infinite_sort()
            .ok_or_else(|| Error::sort(name, "no distinguished sort declared"))?
            .to_string();
        match self.relations.get(name) {
            Some(args) if args.len() == 2 && args[0] == inf && args[1] == inf => {
                self.order = Some(name.to_string());
                Ok(())
            }
            Some(_) => Err(Error::sort(
                name,
                "order symbol must be binary over the distinguished sort",
            )),
            None => Err(Error::sort(name, "order symbol is not a declared relation")),
        }
    }

    pub fn infinite_sort(&self) -> Option<&str> {
        self.sorts.iter().find(|s| s.infinite).map(|s| s.name.as_str())
    }

    pub fn symbol_names(&self) -> BTreeSet<String> {
        self.constants
            .keys()
            .chain(self.functions.keys())
            .chain(self.relations.keys())
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var { name: String, sort: String },
    Const(String),
    /// LIA integer literal `c_z`.
    Int(i64),
    App(String, Vec<Term>),
    /// STR letter append `l_d(t)`.
    Append(Box<Term>, u32),
    /// STR empty word.
    Epsilon,
    /// If-then-else term (STR defined-symbol schemas).
    Ite(Box<Formula>, Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    /// STR regular predicate `/r/(t)`.
    ReMatch(Regex, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, String, Box<Formula>),
    Exists(String, String, Box<Formula>),
}

impl Term {
    pub fn var(name: &str, sort: &str) -> Term {
        Term::Var { name: name.to_string(), sort: sort.to_string() }
    }

    /// Ground word as an append chain over epsilon.
    pub fn word(letters: &[u32]) -> Term {
        letters.iter().fold(Term::Epsilon, |t, &l| Term::Append(Box::new(t), l))
    }

    /// Inverse of [`Term::word`], when the term is a ground append chain.
    pub fn as_word(&self) -> Option<Vec<u32>> {
        match self {
            Term::Epsilon => Some(Vec::new()),
            Term::Append(t, l) => {
                let mut w = t.as_word()?;
                w.push(*l);
                Some(w)
            }
            _ => None,
        }
    }

    pub fn free_vars(&self, out: &mut BTreeMap<String, String>) {
        match self {
            Term::Var { name, sort } => {
                out.insert(name.clone(), sort.clone());
            }
            Term::Const(_) | Term::Int(_) | Term::Epsilon => {}
            Term::App(_, args) => {
                for a in args {
                    a.free_vars(out);
                }
            }
            Term::Append(t, _) => t.free_vars(out),
            Term::Ite(c, a, b) => {
                for (v, s) in c.free_vars() {
                    out.insert(v, s);
                }
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut fv = BTreeMap::new();
        self.free_vars(&mut fv);
        fv.is_empty()
    }

    pub fn substitute(&self, binding: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var { name, .. } => match binding.get(name) {
                Some(t) => t.clone(),
                None => self.clone(),
            },
            Term::Const(_) | Term::Int(_) | Term::Epsilon => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(binding)).collect())
            }
            Term::Append(t, l) => Term::Append(Box::new(t.substitute(binding)), *l),
            Term::Ite(c, a, b) => Term::Ite(
                Box::new(c.substitute(binding)),
                Box::new(a.substitute(binding)),
                Box::new(b.substitute(binding)),
            ),
        }
    }
}

impl Formula {
    /// Conjunction without redundant nesting; empty input is `true`.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::True);
        if fs.iter().any(|f| *f == Formula::False) {
            return Formula::False;
        }
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// Disjunction without redundant nesting; empty input is `false`.
    pub fn or(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::False);
        if fs.iter().any(|f| *f == Formula::True) {
            return Formula::True;
        }
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn negate(self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(f) => *f,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (a, Formula::False) => a.negate(),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    pub fn forall(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), sort.to_string(), Box::new(body))
    }

    pub fn exists(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), sort.to_string(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeMap<String, String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeMap<String, String>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Rel(_, ts) => {
                    for t in ts {
                        term_free(t, bound, out);
                    }
                }
                Formula::Eq(a, b) => {
                    term_free(a, bound, out);
                    term_free(b, bound, out);
                }
                Formula::ReMatch(_, t) => term_free(t, bound, out),
                Formula::Not(g) => go(g, bound, out),
                Formula::And(gs) | Formula::Or(gs) => {
                    for g in gs {
                        go(g, bound, out);
                    }
                }
                Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, _, body) | Formula::Exists(v, _, body) => {
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        fn term_free(t: &Term, bound: &mut Vec<String>, out: &mut BTreeMap<String, String>) {
            match t {
                Term::Var { name, sort } => {
                    if !bound.iter().any(|b| b == name) {
                        out.insert(name.clone(), sort.clone());
                    }
                }
                Term::Const(_) | Term::Int(_) | Term::Epsilon => {}
                Term::App(_, args) => {
                    for a in args {
                        term_free(a, bound, out);
                    }
                }
                Term::Append(inner, _) => term_free(inner, bound, out),
                Term::Ite(c, a, b) => {
                    go(c, bound, out);
                    term_free(a, bound, out);
                    term_free(b, bound, out);
                }
            }
        }
        let mut out = BTreeMap::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of free variables.
    pub fn substitute(&self, binding: &BTreeMap<String, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Rel(r, ts) => {
                Formula::Rel(r.clone(), ts.iter().map(|t| t.substitute(binding)).collect())
            }
            Formula::Eq(a, b) => Formula::Eq(a.substitute(binding), b.substitute(binding)),
            Formula::ReMatch(r, t) => Formula::ReMatch(r.clone(), t.substitute(binding)),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute(binding))),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.substitute(binding)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(binding)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substitute(binding)),
                Box::new(b.substitute(binding)),
            ),
            Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
                let mut inner = binding.clone();
                inner.remove(v);
                // rename the binder if a substituted term would be captured
                let captures = inner.values().any(|t| {
                    let mut fv = BTreeMap::new();
                    t.free_vars(&mut fv);
                    fv.contains_key(v)
                });
                let (v2, body2) = if captures {
                    let mut used: BTreeSet<String> = body.free_vars().keys().cloned().collect();
                    for t in inner.values() {
                        let mut fv = BTreeMap::new();
                        t.free_vars(&mut fv);
                        used.extend(fv.into_keys());
                    }
                    let fresh = fresh_name(v, &used);
                    let mut ren = BTreeMap::new();
                    ren.insert(v.clone(), Term::var(&fresh, s));
                    (fresh, body.substitute(&ren))
                } else {
                    (v.clone(), (**body).clone())
                };
                let inner_body = body2.substitute(&inner);
                match self {
                    Formula::Forall(..) => Formula::Forall(v2, s.clone(), Box::new(inner_body)),
                    _ => Formula::Exists(v2, s.clone(), Box::new(inner_body)),
                }
            }
        }
    }

    /// Substitutes the single variable `var` with `t`.
    pub fn subst_var(&self, var: &str, t: &Term) -> Formula {
        let mut b = BTreeMap::new();
        b.insert(var.to_string(), t.clone());
        self.substitute(&b)
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(|f| f.conjuncts()).collect(),
            f => vec![f],
        }
    }
}

/// A name based on `base` not occurring in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    for i in 0.. {
        let cand = format!("{base}{i}");
        if !used.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Computes the sort of a term. Variables are trusted to carry their own
/// sorts; `env` is consulted only to reject conflicting annotations.
pub fn sort_of_term(t: &Term, sig: &Signature) -> Result<String> {
    match t {
        Term::Var { sort, .. } => Ok(sort.clone()),
        Term::Int(_) => Ok(SORT_INT.to_string()),
        Term::Epsilon => Ok(SORT_STRING.to_string()),
        Term::Append(inner, _) => {
            expect_sort(inner, SORT_STRING, sig)?;
            Ok(SORT_STRING.to_string())
        }
        Term::Const(c) => sig
            .constants
            .get(c)
            .cloned()
            .ok_or_else(|| Error::sort(c, "unknown constant")),
        Term::App(f, args) => {
            if f == "+" {
                if args.len() != 2 {
                    return Err(Error::sort(f, "+ takes two arguments"));
                }
                expect_sort(&args[0], SORT_INT, sig)?;
                expect_sort(&args[1], SORT_INT, sig)?;
                return Ok(SORT_INT.to_string());
            }
            if crate::strings::is_defined_symbol(f) {
                if args.len() != 1 {
                    return Err(Error::sort(f, "defined string symbols are unary"));
                }
                expect_sort(&args[0], SORT_STRING, sig)?;
                return Ok(SORT_STRING.to_string());
            }
            let (params, result) = sig
                .functions
                .get(f)
                .ok_or_else(|| Error::sort(f, "unknown function"))?;
            if params.len() != args.len() {
                return Err(Error::sort(f, format!("expected {} arguments", params.len())));
            }
            for (a, p) in args.iter().zip(params) {
                expect_sort(a, p, sig)?;
            }
            Ok(result.clone())
        }
        Term::Ite(c, a, b) => {
            check_formula(c, sig)?;
            let sa = sort_of_term(a, sig)?;
            let sb = sort_of_term(b, sig)?;
            if sa != sb {
                return Err(Error::sort("ite", "branch sorts differ"));
            }
            Ok(sa)
        }
    }
}

fn expect_sort(t: &Term, want: &str, sig: &Signature) -> Result<()> {
    let got = sort_of_term(t, sig)?;
    if got != want {
        return Err(Error::sort(
            print_term(t),
            format!("expected sort {want}, found {got}"),
        ));
    }
    Ok(())
}

/// Checks well-sortedness of a formula over `sig` (plus base-theory builtins).
pub fn check_formula(f: &Formula, sig: &Signature) -> Result<()> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Rel(r, ts) => {
            if r == "<" || r == "prefix" {
                let want = if r == "<" { SORT_INT } else { SORT_STRING };
                if ts.len() != 2 {
                    return Err(Error::sort(r, "binary relation"));
                }
                expect_sort(&ts[0], want, sig)?;
                expect_sort(&ts[1], want, sig)
            } else {
                let params = sig
                    .relations
                    .get(r)
                    .ok_or_else(|| Error::sort(r, "unknown relation"))?;
                if params.len() != ts.len() {
                    return Err(Error::sort(r, format!("expected {} arguments", params.len())));
                }
                for (t, p) in ts.iter().zip(params) {
                    expect_sort(t, p, sig)?;
                }
                Ok(())
            }
        }
        Formula::Eq(a, b) => {
            let sa = sort_of_term(a, sig)?;
            let sb = sort_of_term(b, sig)?;
            if sa != sb {
                return Err(Error::sort("=", format!("equality between sorts {sa} and {sb}")));
            }
            Ok(())
        }
        Formula::ReMatch(_, t) => expect_sort(t, SORT_STRING, sig),
        Formula::Not(g) => check_formula(g, sig),
        Formula::And(gs) | Formula::Or(gs) => {
            for g in gs {
                check_formula(g, sig)?;
            }
            Ok(())
        }
        Formula::Implies(a, b) => {
            check_formula(a, sig)?;
            check_formula(b, sig)
        }
        Formula::Forall(_, s, body) | Formula::Exists(_, s, body) => {
            if !sig.has_sort(s) {
                return Err(Error::sort(s, "unknown sort in binder"));
            }
            check_formula(body, sig)
        }
    }
}
