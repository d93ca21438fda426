//! Order-axiom library, fragment membership checks, and the
//! satisfiability-preserving translation from the multi-sorted ordered
//! self-cycle fragment to its single-sorted star form, with model
//! back-translation.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::finite::FiniteStructure;
use crate::fol::{
    fresh_name, nnf_prenex, qa_graph, skolemize, sort_of_term, Formula, Signature, Term,
};

/// The six supported order flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Tot,
    TotProsucc,
    TotRegpred,
    Pref,
    PrefProsucc,
    PrefRegpred,
}

impl Flavor {
    pub fn parse(s: &str) -> Result<Flavor> {
        Ok(match s {
            "tot" => Flavor::Tot,
            "tot-prosucc" => Flavor::TotProsucc,
            "tot-regpred" => Flavor::TotRegpred,
            "pref" => Flavor::Pref,
            "pref-prosucc" => Flavor::PrefProsucc,
            "pref-regpred" => Flavor::PrefRegpred,
            other => return Err(Error::Invalid(format!("unknown order flavor {other}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Tot => "tot",
            Flavor::TotProsucc => "tot-prosucc",
            Flavor::TotRegpred => "tot-regpred",
            Flavor::Pref => "pref",
            Flavor::PrefProsucc => "pref-prosucc",
            Flavor::PrefRegpred => "pref-regpred",
        }
    }

    pub fn is_total(&self) -> bool {
        matches!(self, Flavor::Tot | Flavor::TotProsucc | Flavor::TotRegpred)
    }

    pub fn is_progressive(&self) -> bool {
        matches!(self, Flavor::TotProsucc | Flavor::PrefProsucc)
    }

    pub fn is_regressive(&self) -> bool {
        matches!(self, Flavor::TotRegpred | Flavor::PrefRegpred)
    }
}

fn order_parts(sig: &Signature) -> Result<(String, String)> {
    let order = sig
        .order
        .clone()
        .ok_or_else(|| Error::Invalid("signature has no designated order".to_string()))?;
    let sort = sig
        .infinite_sort()
        .ok_or_else(|| Error::Invalid("signature has no distinguished sort".to_string()))?
        .to_string();
    Ok((order, sort))
}

/// Irreflexivity and transitivity of the designated order.
pub fn build_strict(sig: &Signature) -> Result<Formula> {
    let (ord, s) = order_parts(sig)?;
    let lt = |a: &str, b: &str| {
        Formula::Rel(ord.clone(), vec![Term::var(a, &s), Term::var(b, &s)])
    };
    let irrefl = Formula::forall("x", &s, lt("x", "x").negate());
    let trans = Formula::forall(
        "x",
        &s,
        Formula::forall(
            "y",
            &s,
            Formula::forall(
                "z",
                &s,
                Formula::implies(
                    Formula::and(vec![lt("x", "y"), lt("y", "z")]),
                    lt("x", "z"),
                ),
            ),
        ),
    );
    Ok(Formula::and(vec![irrefl, trans]))
}

/// Unary functions from the distinguished sort to itself.
pub fn self_functions(sig: &Signature) -> Vec<String> {
    let Some(s) = sig.infinite_sort() else { return Vec::new() };
    sig.functions
        .iter()
        .filter(|(_, (args, result))| args.len() == 1 && args[0] == s && result == s)
        .map(|(f, _)| f.clone())
        .collect()
}

/// Materializes the order axiom of a flavor over the signature.
pub fn build_axiom(flavor: Flavor, sig: &Signature) -> Result<Formula> {
    let (ord, s) = order_parts(sig)?;
    let lt = |a: Term, b: Term| Formula::Rel(ord.clone(), vec![a, b]);
    let v = |n: &str| Term::var(n, &s);
    let mut parts = vec![build_strict(sig)?];
    if flavor.is_total() {
        parts.push(Formula::forall(
            "x",
            &s,
            Formula::forall(
                "y",
                &s,
                Formula::or(vec![
                    Formula::Eq(v("x"), v("y")),
                    lt(v("x"), v("y")),
                    lt(v("y"), v("x")),
                ]),
            ),
        ));
    } else {
        // downwards totality: elements below a common element are comparable
        parts.push(Formula::forall(
            "x",
            &s,
            Formula::forall(
                "y",
                &s,
                Formula::forall(
                    "z",
                    &s,
                    Formula::implies(
                        Formula::and(vec![lt(v("x"), v("z")), lt(v("y"), v("z"))]),
                        Formula::or(vec![
                            Formula::Eq(v("x"), v("y")),
                            lt(v("x"), v("y")),
                            lt(v("y"), v("x")),
                        ]),
                    ),
                ),
            ),
        ));
    }
    if flavor.is_progressive() {
        for f in self_functions(sig) {
            parts.push(Formula::forall(
                "x",
                &s,
                lt(v("x"), Term::App(f.clone(), vec![v("x")])),
            ));
        }
        // successor existence
        parts.push(Formula::forall(
            "x",
            &s,
            Formula::exists(
                "y",
                &s,
                Formula::and(vec![
                    lt(v("x"), v("y")),
                    Formula::forall(
                        "z",
                        &s,
                        Formula::implies(
                            lt(v("x"), v("z")),
                            Formula::or(vec![Formula::Eq(v("z"), v("y")), lt(v("y"), v("z"))]),
                        ),
                    ),
                ]),
            ),
        ));
    }
    if flavor.is_regressive() {
        for f in self_functions(sig) {
            parts.push(Formula::forall(
                "x",
                &s,
                lt(Term::App(f.clone(), vec![v("x")]), v("x")),
            ));
        }
        // predecessor existence
        parts.push(Formula::forall(
            "x",
            &s,
            Formula::exists(
                "y",
                &s,
                Formula::and(vec![
                    lt(v("y"), v("x")),
                    Formula::forall(
                        "z",
                        &s,
                        Formula::implies(
                            lt(v("z"), v("x")),
                            Formula::or(vec![Formula::Eq(v("z"), v("y")), lt(v("z"), v("y"))]),
                        ),
                    ),
                ]),
            ),
        ));
    }
    Ok(Formula::and(parts))
}

#[derive(Debug, Clone)]
pub struct FragmentReport {
    pub member: bool,
    pub findings: Vec<String>,
}

impl FragmentReport {
    fn ok() -> FragmentReport {
        FragmentReport { member: true, findings: Vec::new() }
    }

    fn fail(findings: Vec<String>) -> FragmentReport {
        FragmentReport { member: false, findings }
    }
}

/// Stratified fragment: the quantifier-alternation graph must be acyclic.
pub fn check_sf(f: &Formula, sig: &Signature) -> FragmentReport {
    let g = qa_graph(f, sig);
    if g.is_acyclic() {
        FragmentReport::ok()
    } else {
        FragmentReport::fail(vec!["quantifier-alternation graph has a cycle".to_string()])
    }
}

fn collect_vars(f: &Formula, out: &mut BTreeMap<String, String>) {
    f.free_vars().into_iter().for_each(|(v, s)| {
        out.insert(v, s);
    });
    match f {
        Formula::Not(g) => collect_vars(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_vars(g, out)),
        Formula::Implies(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Formula::Forall(v, s, g) | Formula::Exists(v, s, g) => {
            out.insert(v.clone(), s.clone());
            collect_vars(g, out);
        }
        _ => {}
    }
}

fn collect_symbols(f: &Formula, funs: &mut BTreeSet<String>, rels: &mut BTreeSet<String>) {
    fn term(t: &Term, funs: &mut BTreeSet<String>) {
        if let Term::App(g, args) = t {
            funs.insert(g.clone());
            args.iter().for_each(|a| term(a, funs));
        }
    }
    match f {
        Formula::Rel(r, ts) => {
            rels.insert(r.clone());
            ts.iter().for_each(|t| term(t, funs));
        }
        Formula::Eq(a, b) => {
            term(a, funs);
            term(b, funs);
        }
        Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => {
            collect_symbols(g, funs, rels)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            gs.iter().for_each(|g| collect_symbols(g, funs, rels))
        }
        Formula::Implies(a, b) => {
            collect_symbols(a, funs, rels);
            collect_symbols(b, funs, rels);
        }
        _ => {}
    }
}

fn nested_terms_ground(f: &Formula, sig: &Signature, s_inf: &str, bad: &mut Vec<String>) {
    fn check_term(t: &Term, top: bool, sig: &Signature, s_inf: &str, bad: &mut Vec<String>) {
        if let Term::App(g, args) = t {
            if !top {
                if let Some((_, result)) = sig.functions.get(g) {
                    if result == s_inf && !t.is_ground() {
                        bad.push(format!("non-ground nested distinguished-sort term {g}(..)"));
                    }
                }
            }
            args.iter().for_each(|a| check_term(a, false, sig, s_inf, bad));
        }
    }
    match f {
        Formula::Rel(_, ts) => ts.iter().for_each(|t| check_term(t, true, sig, s_inf, bad)),
        Formula::Eq(a, b) => {
            check_term(a, true, sig, s_inf, bad);
            check_term(b, true, sig, s_inf, bad);
        }
        Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => {
            nested_terms_ground(g, sig, s_inf, bad)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            gs.iter().for_each(|g| nested_terms_ground(g, sig, s_inf, bad))
        }
        Formula::Implies(a, b) => {
            nested_terms_ground(a, sig, s_inf, bad);
            nested_terms_ground(b, sig, s_inf, bad);
        }
        _ => {}
    }
}

/// Checks the four conditions of the ordered self-cycle fragment: a single
/// distinguished-sort variable; at most one distinguished argument per
/// symbol; a quantifier-alternation graph whose only cycles are self-loops at
/// the distinguished sort with no other outgoing edges from it; and
/// groundness of nested distinguished-sort function terms.
pub fn check_osc(f: &Formula, sig: &Signature) -> FragmentReport {
    let Some(s_inf) = sig.infinite_sort().map(str::to_string) else {
        return FragmentReport::fail(vec!["no distinguished sort".to_string()]);
    };
    let mut findings = Vec::new();

    // condition 1: a single distinguished-sort variable
    let mut vars = BTreeMap::new();
    collect_vars(f, &mut vars);
    let inf_vars: Vec<&String> =
        vars.iter().filter(|(_, s)| **s == s_inf).map(|(v, _)| v).collect();
    if inf_vars.len() > 1 {
        findings.push(format!(
            "uses {} distinguished-sort variables ({})",
            inf_vars.len(),
            inf_vars.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ));
    }

    // condition 2: at most one distinguished argument per used symbol
    let mut funs = BTreeSet::new();
    let mut rels = BTreeSet::new();
    collect_symbols(f, &mut funs, &mut rels);
    for g in &funs {
        if let Some((args, _)) = sig.functions.get(g) {
            if args.iter().filter(|a| **a == s_inf).count() > 1 {
                findings.push(format!("function {g} takes several distinguished arguments"));
            }
        }
    }
    for r in &rels {
        if Some(r.as_str()) == sig.order.as_deref() {
            continue;
        }
        if let Some(args) = sig.relations.get(r) {
            if args.iter().filter(|a| **a == s_inf).count() > 1 {
                findings.push(format!("relation {r} takes several distinguished arguments"));
            }
        }
    }

    // condition 3: self-loops only at the distinguished sort; no other
    // outgoing edges from it
    let g = qa_graph(f, sig);
    for edge in g.edges_excluding_self_loop(&s_inf) {
        if edge.0 == s_inf && edge.1 != s_inf {
            findings.push(format!("edge from the distinguished sort to {}", edge.1));
        }
    }
    let pruned = crate::fol::QaGraph {
        vertices: g.vertices.clone(),
        edges: g
            .edges
            .iter()
            .filter(|(from, to, _)| !(from == &s_inf && to == &s_inf))
            .cloned()
            .collect(),
    };
    if !pruned.is_acyclic() {
        findings.push("alternation cycle outside the distinguished sort".to_string());
    }

    // condition 4: nested distinguished-sort function terms are ground
    nested_terms_ground(f, sig, &s_inf, &mut findings);

    if findings.is_empty() {
        FragmentReport::ok()
    } else {
        FragmentReport::fail(findings)
    }
}

/// Checks the star form: single-sorted, unary symbols beside the binary
/// order, positive combinations of single-universal quantifier-free
/// formulas, terms limited to constants, the variable, and `f(x)`.
pub fn check_osc_star(f: &Formula, sig: &Signature) -> FragmentReport {
    let mut findings = Vec::new();
    if sig.sorts.len() != 1 {
        findings.push(format!("{} sorts in the signature (need exactly 1)", sig.sorts.len()));
    }
    for (g, (args, _)) in &sig.functions {
        if args.len() != 1 {
            findings.push(format!("function {g} is not unary"));
        }
    }
    for (r, args) in &sig.relations {
        if Some(r.as_str()) == sig.order.as_deref() {
            if args.len() != 2 {
                findings.push(format!("order {r} is not binary"));
            }
        } else if args.len() != 1 {
            findings.push(format!("relation {r} is not unary"));
        }
    }

    fn check_combination(f: &Formula, findings: &mut Vec<String>) {
        match f {
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().for_each(|g| check_combination(g, findings))
            }
            Formula::Forall(v, _, body) => check_matrix(body, v, findings),
            Formula::True | Formula::False => {}
            other if is_quantifier_free(other) && other.free_vars().is_empty() => {
                // a ground formula is a degenerate universal
                check_matrix(other, "", findings);
            }
            _ => findings.push("not a positive combination of universal formulas".to_string()),
        }
    }
    fn is_quantifier_free(f: &Formula) -> bool {
        match f {
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Not(g) => is_quantifier_free(g),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(is_quantifier_free),
            Formula::Implies(a, b) => is_quantifier_free(a) && is_quantifier_free(b),
            _ => true,
        }
    }
    fn check_matrix(f: &Formula, var: &str, findings: &mut Vec<String>) {
        match f {
            Formula::Forall(..) | Formula::Exists(..) => {
                findings.push("nested quantifier in a universal matrix".to_string())
            }
            Formula::Not(g) => check_matrix(g, var, findings),
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().for_each(|g| check_matrix(g, var, findings))
            }
            Formula::Implies(a, b) => {
                check_matrix(a, var, findings);
                check_matrix(b, var, findings);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| check_term(t, var, findings)),
            Formula::Eq(a, b) => {
                check_term(a, var, findings);
                check_term(b, var, findings);
            }
            _ => {}
        }
    }
    fn check_term(t: &Term, var: &str, findings: &mut Vec<String>) {
        match t {
            Term::Const(_) => {}
            Term::Var { name, .. } if name == var => {}
            Term::Var { name, .. } => findings.push(format!("stray variable {name}")),
            Term::App(_, args)
                if args.len() == 1
                    && matches!(&args[0], Term::Var { name, .. } if name == var) => {}
            other => findings.push(format!("term not of the allowed shapes: {other:?}")),
        }
    }
    check_combination(f, &mut findings);

    if findings.is_empty() {
        FragmentReport::ok()
    } else {
        FragmentReport::fail(findings)
    }
}

// --- translation ---

/// How a fresh symbol of the translated formula relates to the original
/// signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecOrigin {
    /// Relation specialized at ground arguments: position -> class index.
    Relation { orig: String, ground_args: Vec<(usize, usize)> },
    /// Function specialized at ground arguments.
    Function { orig: String, ground_args: Vec<(usize, usize)> },
    /// Constant standing for a flattened ground term of the distinguished
    /// sort.
    Flatten { term: Term },
    /// Skolem symbol introduced before translation.
    Skolem,
}

/// One disjunct of the translated formula.
#[derive(Debug, Clone)]
pub struct Case {
    /// Per non-distinguished sort: the equivalence classes of its ground
    /// terms (indices into `Certificate::ground_terms`).
    pub partitions: BTreeMap<String, Vec<Vec<usize>>>,
    /// Truth assignment to the canonical purely non-distinguished atoms.
    pub atoms: BTreeMap<Formula, bool>,
    pub formula: Formula,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    /// Ground terms of each non-distinguished sort, in enumeration order.
    pub ground_terms: BTreeMap<String, Vec<Term>>,
    /// Whether the input was already in star form (no work done).
    pub identity: bool,
    pub symbols: BTreeMap<String, SpecOrigin>,
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub formula: Formula,
    pub signature: Signature,
    pub certificate: Certificate,
}

/// Ground terms per non-distinguished sort, closing constants under the
/// functions among non-distinguished sorts. Finite by fragment condition 3.
fn ground_terms(sig: &Signature, s_inf: &str) -> Result<BTreeMap<String, Vec<Term>>> {
    let mut by_sort: BTreeMap<String, Vec<Term>> = sig
        .sorts
        .iter()
        .filter(|s| s.name != s_inf)
        .map(|s| (s.name.clone(), Vec::new()))
        .collect();
    for (c, sort) in &sig.constants {
        if sort != s_inf {
            by_sort.get_mut(sort).unwrap().push(Term::Const(c.clone()));
        }
    }
    let mut budget = 10_000usize;
    loop {
        let mut grown = false;
        for (f, (args, result)) in &sig.functions {
            if result == s_inf || args.iter().any(|a| a == s_inf) {
                continue;
            }
            let pools: Vec<Vec<Term>> =
                args.iter().map(|a| by_sort.get(a).cloned().unwrap_or_default()).collect();
            for tuple in cross(&pools) {
                let t = Term::App(f.clone(), tuple);
                let pool = by_sort.get_mut(result).unwrap();
                if !pool.contains(&t) {
                    pool.push(t);
                    grown = true;
                    budget = budget
                        .checked_sub(1)
                        .ok_or_else(|| Error::Budget("ground term explosion".to_string()))?;
                }
            }
        }
        if !grown {
            return Ok(by_sort);
        }
    }
}

fn cross(pools: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for p in pools {
        let mut next = Vec::new();
        for prefix in &out {
            for t in p {
                let mut v = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All partitions of `0..n` into equivalence classes, each class sorted.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for smaller in set_partitions(n - 1) {
        // put n-1 into each existing class, or alone
        for i in 0..smaller.len() {
            let mut p = smaller.clone();
            p[i].push(n - 1);
            out.push(p);
        }
        let mut p = smaller.clone();
        p.push(vec![n - 1]);
        out.push(p);
    }
    out
}

struct Translator<'a> {
    sig: &'a Signature,
    s_inf: String,
    ground: BTreeMap<String, Vec<Term>>,
    /// class representative term per (sort, ground term index), per case
    symbols: BTreeMap<String, SpecOrigin>,
    out_sig: Signature,
    budget: usize,
}

impl<'a> Translator<'a> {
    fn class_of(
        &self,
        partitions: &BTreeMap<String, Vec<Vec<usize>>>,
        sort: &str,
        t: &Term,
    ) -> Result<usize> {
        let idx = self
            .ground
            .get(sort)
            .and_then(|g| g.iter().position(|u| u == t))
            .ok_or_else(|| Error::Invalid(format!("unknown ground term {t:?}")))?;
        partitions
            .get(sort)
            .and_then(|p| p.iter().position(|class| class.contains(&idx)))
            .ok_or_else(|| Error::Invalid(format!("term {t:?} not covered by the partition")))
    }

    fn used(&self) -> BTreeSet<String> {
        let mut u = self.sig.symbol_names();
        u.extend(self.out_sig.symbol_names());
        u
    }

    /// Fresh unary/constant symbol for a specialization, reusing an existing
    /// one for the same origin.
    fn specialized(&mut self, origin: SpecOrigin, base: &str, unary: bool) -> Result<String> {
        if let Some((name, _)) = self.symbols.iter().find(|(_, o)| **o == origin) {
            return Ok(name.clone());
        }
        let name = fresh_name(base, &self.used());
        match &origin {
            SpecOrigin::Relation { .. } => {
                self.out_sig.add_relation(&name, &[&self.s_inf])?;
            }
            SpecOrigin::Function { .. } if unary => {
                self.out_sig.add_function(&name, &[&self.s_inf], &self.s_inf.clone())?;
            }
            SpecOrigin::Function { .. } | SpecOrigin::Flatten { .. } => {
                self.out_sig.add_constant(&name, &self.s_inf.clone())?;
            }
            SpecOrigin::Skolem => {}
        }
        self.symbols.insert(name.clone(), origin);
        Ok(name)
    }

    /// Rewrites a term of the distinguished sort under a case's partition.
    fn term(
        &mut self,
        t: &Term,
        partitions: &BTreeMap<String, Vec<Vec<usize>>>,
    ) -> Result<Term> {
        match t {
            Term::Var { .. } | Term::Const(_) => Ok(t.clone()),
            Term::App(f, args) => {
                let (arg_sorts, result) = self
                    .sig
                    .functions
                    .get(f)
                    .ok_or_else(|| Error::Invalid(format!("unknown function {f}")))?
                    .clone();
                if result != self.s_inf {
                    return Err(Error::Fragment(format!(
                        "term {f}(..) of a non-distinguished sort in a mixed position"
                    )));
                }
                let mut ground_args = Vec::new();
                let mut inf_arg = None;
                for (i, (a, sort)) in args.iter().zip(&arg_sorts).enumerate() {
                    if sort == &self.s_inf {
                        inf_arg = Some(self.term(a, partitions)?);
                    } else {
                        ground_args.push((i, self.class_of(partitions, sort, a)?));
                    }
                }
                if ground_args.is_empty() {
                    let inner = inf_arg.expect("unary distinguished function");
                    return Ok(Term::App(f.clone(), vec![inner]));
                }
                let origin = SpecOrigin::Function { orig: f.clone(), ground_args };
                match inf_arg {
                    Some(inner) => {
                        let name = self.specialized(origin, f, true)?;
                        Ok(Term::App(name, vec![inner]))
                    }
                    None => {
                        let name = self.specialized(origin, f, false)?;
                        Ok(Term::Const(name))
                    }
                }
            }
            _ => Err(Error::Fragment(format!("theory term in an object formula: {t:?}"))),
        }
    }

    /// Rewrites an atom under a case.
    fn atom(
        &mut self,
        f: &Formula,
        partitions: &BTreeMap<String, Vec<Vec<usize>>>,
        atoms: &BTreeMap<Formula, bool>,
    ) -> Result<Formula> {
        match f {
            Formula::Eq(a, b) => {
                let sa = sort_of_term(a, self.sig)?;
                let sb = sort_of_term(b, self.sig)?;
                if sa != sb {
                    return Ok(Formula::False);
                }
                if sa != self.s_inf {
                    // both ground by fragment conditions
                    let ca = self.class_of(partitions, &sa, a)?;
                    let cb = self.class_of(partitions, &sb, b)?;
                    return Ok(if ca == cb { Formula::True } else { Formula::False });
                }
                Ok(Formula::Eq(self.term(a, partitions)?, self.term(b, partitions)?))
            }
            Formula::Rel(r, ts) => {
                let arg_sorts = self
                    .sig
                    .relations
                    .get(r)
                    .ok_or_else(|| Error::Invalid(format!("unknown relation {r}")))?
                    .clone();
                let pure = arg_sorts.iter().all(|s| s != &self.s_inf);
                if pure {
                    // canonical form: replace each argument by its class rep
                    let canon = self.canonical_pure_atom(f, partitions)?;
                    return Ok(match atoms.get(&canon) {
                        Some(true) => Formula::True,
                        Some(false) => Formula::False,
                        None => {
                            return Err(Error::Invalid(format!(
                                "unassigned ground atom {canon:?}"
                            )))
                        }
                    });
                }
                let mut ground_args = Vec::new();
                let mut inf_args = Vec::new();
                for (i, (t, sort)) in ts.iter().zip(&arg_sorts).enumerate() {
                    if sort == &self.s_inf {
                        inf_args.push(self.term(t, partitions)?);
                    } else {
                        ground_args.push((i, self.class_of(partitions, sort, t)?));
                    }
                }
                if ground_args.is_empty() {
                    return Ok(Formula::Rel(r.clone(), inf_args));
                }
                let origin = SpecOrigin::Relation { orig: r.clone(), ground_args };
                let name = self.specialized(origin, r, true)?;
                Ok(Formula::Rel(name, inf_args))
            }
            _ => Err(Error::Invalid("not an atom".to_string())),
        }
    }

    /// A purely non-distinguished ground atom with arguments replaced by
    /// class representatives (the least ground-term index of each class).
    fn canonical_pure_atom(
        &self,
        f: &Formula,
        partitions: &BTreeMap<String, Vec<Vec<usize>>>,
    ) -> Result<Formula> {
        let Formula::Rel(r, ts) = f else {
            return Err(Error::Invalid("not a relation atom".to_string()));
        };
        let arg_sorts = self.sig.relations.get(r).unwrap().clone();
        let mut canon = Vec::new();
        for (t, sort) in ts.iter().zip(&arg_sorts) {
            let class = self.class_of(partitions, sort, t)?;
            let rep = partitions[sort][class]
                .iter()
                .min()
                .copied()
                .expect("nonempty class");
            canon.push(self.ground[sort][rep].clone());
        }
        Ok(Formula::Rel(r.clone(), canon))
    }

    fn rewrite(
        &mut self,
        f: &Formula,
        partitions: &BTreeMap<String, Vec<Vec<usize>>>,
        atoms: &BTreeMap<Formula, bool>,
    ) -> Result<Formula> {
        self.budget = self
            .budget
            .checked_sub(1)
            .ok_or_else(|| Error::Budget("translation blow-up".to_string()))?;
        match f {
            Formula::True | Formula::False => Ok(f.clone()),
            Formula::Rel(..) | Formula::Eq(..) => self.atom(f, partitions, atoms),
            Formula::Not(g) => Ok(self.rewrite(g, partitions, atoms)?.negate()),
            Formula::And(gs) => Ok(Formula::and(
                gs.iter().map(|g| self.rewrite(g, partitions, atoms)).collect::<Result<_>>()?,
            )),
            Formula::Or(gs) => Ok(Formula::or(
                gs.iter().map(|g| self.rewrite(g, partitions, atoms)).collect::<Result<_>>()?,
            )),
            Formula::Implies(a, b) => Ok(Formula::implies(
                self.rewrite(a, partitions, atoms)?,
                self.rewrite(b, partitions, atoms)?,
            )),
            Formula::Forall(v, s, g) => {
                Ok(Formula::forall(v, s, self.rewrite(g, partitions, atoms)?))
            }
            Formula::Exists(..) => {
                Err(Error::Invalid("existential after skolemization".to_string()))
            }
            Formula::ReMatch(..) => {
                Err(Error::Invalid("regular predicate in object formula".to_string()))
            }
        }
    }
}

/// Collects the purely non-distinguished ground atoms of `f`, canonicalized
/// under the given partition.
fn pure_atoms(
    tr: &Translator,
    f: &Formula,
    partitions: &BTreeMap<String, Vec<Vec<usize>>>,
    out: &mut BTreeSet<Formula>,
) -> Result<()> {
    match f {
        Formula::Rel(r, _) => {
            if let Some(args) = tr.sig.relations.get(r) {
                if args.iter().all(|s| s != &tr.s_inf) {
                    out.insert(tr.canonical_pure_atom(f, partitions)?);
                }
            }
            Ok(())
        }
        Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => {
            pure_atoms(tr, g, partitions, out)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            gs.iter().try_for_each(|g| pure_atoms(tr, g, partitions, out))
        }
        Formula::Implies(a, b) => {
            pure_atoms(tr, a, partitions, out)?;
            pure_atoms(tr, b, partitions, out)
        }
        _ => Ok(()),
    }
}

/// Flattens ground distinguished-sort function applications, replacing each
/// innermost `f(t)` (with `t` ground) by a fresh constant and adding
/// `forall x. x = t -> f(x) = c`.
fn flatten_ground(tr: &mut Translator, f: Formula) -> Result<(Formula, Vec<Formula>)> {
    fn find_ground_app(f: &Formula, s_inf: &str, sig: &Signature) -> Option<Term> {
        fn in_term(t: &Term, top: bool, s_inf: &str, sig: &Signature) -> Option<Term> {
            if let Term::App(g, args) = t {
                for a in args {
                    if let Some(found) = in_term(a, false, s_inf, sig) {
                        return Some(found);
                    }
                }
                let _ = top;
                if t.is_ground()
                    && sig.functions.get(g).map(|(_, r)| r == s_inf).unwrap_or(false)
                {
                    return Some(t.clone());
                }
            }
            None
        }
        match f {
            Formula::Rel(_, ts) => {
                ts.iter().find_map(|t| in_term(t, true, s_inf, sig))
            }
            Formula::Eq(a, b) => {
                in_term(a, true, s_inf, sig).or_else(|| in_term(b, true, s_inf, sig))
            }
            Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => {
                find_ground_app(g, s_inf, sig)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().find_map(|g| find_ground_app(g, s_inf, sig))
            }
            Formula::Implies(a, b) => {
                find_ground_app(a, s_inf, sig).or_else(|| find_ground_app(b, s_inf, sig))
            }
            _ => None,
        }
    }

    let mut current = f;
    let mut axioms = Vec::new();
    let mut steps = 0;
    while let Some(app) = find_ground_app(&current, &tr.s_inf, &tr.out_sig) {
        steps += 1;
        if steps > 1_000 {
            return Err(Error::Budget("flattening did not terminate".to_string()));
        }
        let Term::App(g, args) = &app else { unreachable!() };
        let c = tr.specialized(
            SpecOrigin::Flatten { term: app.clone() },
            &format!("{g}_at"),
            false,
        )?;
        let cterm = Term::Const(c);
        let fresh_v = fresh_name("x", &tr.used());
        // forall x. x = t -> g(x) = c
        let ax = Formula::forall(
            &fresh_v,
            &tr.s_inf.clone(),
            Formula::implies(
                Formula::Eq(Term::var(&fresh_v, &tr.s_inf), args[0].clone()),
                Formula::Eq(
                    Term::App(g.clone(), vec![Term::var(&fresh_v, &tr.s_inf)]),
                    cterm.clone(),
                ),
            ),
        );
        axioms.push(ax);
        current = replace_term_in_formula(&current, &app, &cterm);
        // the replaced term may appear inside already-emitted axioms
        axioms = axioms
            .iter()
            .map(|a| replace_term_in_formula(a, &app, &cterm))
            .collect();
    }
    Ok((current, axioms))
}

fn replace_term_in_formula(f: &Formula, target: &Term, by: &Term) -> Formula {
    fn in_term(t: &Term, target: &Term, by: &Term) -> Term {
        if t == target {
            return by.clone();
        }
        match t {
            Term::App(g, args) => Term::App(
                g.clone(),
                args.iter().map(|a| in_term(a, target, by)).collect(),
            ),
            _ => t.clone(),
        }
    }
    match f {
        Formula::Rel(r, ts) => {
            Formula::Rel(r.clone(), ts.iter().map(|t| in_term(t, target, by)).collect())
        }
        Formula::Eq(a, b) => Formula::Eq(in_term(a, target, by), in_term(b, target, by)),
        Formula::Not(g) => replace_term_in_formula(g, target, by).negate(),
        Formula::And(gs) => {
            Formula::And(gs.iter().map(|g| replace_term_in_formula(g, target, by)).collect())
        }
        Formula::Or(gs) => {
            Formula::Or(gs.iter().map(|g| replace_term_in_formula(g, target, by)).collect())
        }
        Formula::Implies(a, b) => Formula::implies(
            replace_term_in_formula(a, target, by),
            replace_term_in_formula(b, target, by),
        ),
        Formula::Forall(v, s, g) => {
            Formula::forall(v, s, replace_term_in_formula(g, target, by))
        }
        Formula::Exists(v, s, g) => {
            Formula::exists(v, s, replace_term_in_formula(g, target, by))
        }
        other => other.clone(),
    }
}

/// Translates an ordered self-cycle sentence to the single-sorted star form.
/// Returns the translated sentence (a disjunction over explicit cases), the
/// translated signature, and a certificate for back-translation. `budget`
/// bounds the number of cases.
pub fn translate_to_osc_star(
    phi: &Formula,
    sig: &Signature,
    budget: usize,
) -> Result<Translation> {
    let report = check_osc(phi, sig);
    if !report.member {
        return Err(Error::Fragment(format!(
            "not in the ordered self-cycle fragment: {}",
            report.findings.join("; ")
        )));
    }
    let s_inf = sig
        .infinite_sort()
        .ok_or_else(|| Error::Invalid("no distinguished sort".to_string()))?
        .to_string();

    // identity case: already single-sorted star form
    if check_osc_star(phi, sig).member {
        return Ok(Translation {
            formula: phi.clone(),
            signature: sig.clone(),
            certificate: Certificate {
                ground_terms: BTreeMap::new(),
                identity: true,
                symbols: BTreeMap::new(),
                cases: Vec::new(),
            },
        });
    }

    // (i) skolemize
    let prenexed = nnf_prenex(phi);
    let (skolemized, sig_sk) = skolemize(&prenexed, sig)?;
    let mut skolem_syms: BTreeMap<String, SpecOrigin> = BTreeMap::new();
    for name in sig_sk.symbol_names() {
        if !sig.symbol_names().contains(&name) {
            skolem_syms.insert(name.clone(), SpecOrigin::Skolem);
        }
    }

    // ensure each non-distinguished sort has a ground term (fresh witness)
    let mut sig_w = sig_sk.clone();
    for sort in sig_sk.sorts.clone() {
        if sort.name == s_inf {
            continue;
        }
        let g = ground_terms(&sig_w, &s_inf)?;
        if g.get(&sort.name).map(|v| v.is_empty()).unwrap_or(true) {
            let w = fresh_name("w", &sig_w.symbol_names());
            sig_w.add_constant(&w, &sort.name)?;
            skolem_syms.insert(w, SpecOrigin::Skolem);
        }
    }
    let ground = ground_terms(&sig_w, &s_inf)?;

    // (ii) instantiate universal non-distinguished variables
    let (vars, matrix) = strip_universals(&skolemized);
    let mut inf_var: Option<(String, String)> = None;
    let mut ground_vars: Vec<(String, String)> = Vec::new();
    for (v, s) in vars {
        if s == s_inf {
            inf_var = Some((v, s));
        } else {
            ground_vars.push((v, s));
        }
    }
    let mut instances = vec![matrix.clone()];
    for (v, s) in &ground_vars {
        let pool = ground.get(s).cloned().unwrap_or_default();
        let mut next = Vec::new();
        for inst in &instances {
            for t in &pool {
                next.push(inst.subst_var(v, t));
            }
        }
        instances = next;
        if instances.len() > 10_000 {
            return Err(Error::Budget(format!(
                "instantiation produced {} formulas",
                instances.len()
            )));
        }
    }

    // output signature skeleton: the distinguished sort, its constants,
    // unary self-functions, and distinguished-only relations survive
    let mut out_sig = Signature::new();
    out_sig.add_sort(&s_inf, true)?;
    for (c, sort) in &sig_w.constants {
        if sort == &s_inf {
            out_sig.add_constant(c, &s_inf)?;
        }
    }
    for (f, (args, result)) in &sig_w.functions {
        if result == &s_inf && args.len() == 1 && args[0] == s_inf {
            out_sig.add_function(f, &[&s_inf], &s_inf)?;
        }
    }
    for (r, args) in &sig_w.relations {
        if args.iter().all(|a| a == &s_inf) {
            out_sig.add_relation(r, &args.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
    }
    if let Some(o) = &sig_w.order {
        out_sig.set_order(o)?;
    }

    let mut tr = Translator {
        sig: &sig_w,
        s_inf: s_inf.clone(),
        ground: ground.clone(),
        symbols: skolem_syms,
        out_sig,
        budget: 1_000_000,
    };

    // (iii) explicit case split over partitions and ground-atom assignments
    let sorts: Vec<String> = ground.keys().cloned().collect();
    let mut partition_choices: Vec<BTreeMap<String, Vec<Vec<usize>>>> =
        vec![BTreeMap::new()];
    for sort in &sorts {
        let parts = set_partitions(ground[sort].len());
        let mut next = Vec::new();
        for choice in &partition_choices {
            for p in &parts {
                let mut c = choice.clone();
                c.insert(sort.clone(), p.clone());
                next.push(c);
            }
        }
        partition_choices = next;
        if partition_choices.len() > budget {
            return Err(Error::Budget(format!(
                "{} partition cases exceed the budget {budget}",
                partition_choices.len()
            )));
        }
    }

    let mut cases = Vec::new();
    let mut disjuncts = Vec::new();
    for partitions in partition_choices {
        // canonical pure atoms under this partition
        let mut atoms_set = BTreeSet::new();
        for inst in &instances {
            pure_atoms(&tr, inst, &partitions, &mut atoms_set)?;
        }
        let atom_list: Vec<Formula> = atoms_set.into_iter().collect();
        if atom_list.len() > 20 {
            return Err(Error::Budget(format!(
                "{} ground atoms make the assignment split infeasible",
                atom_list.len()
            )));
        }
        let n_assign = 1usize << atom_list.len();
        if cases.len() + n_assign > budget {
            return Err(Error::Budget(format!(
                "case count exceeds the budget {budget}"
            )));
        }
        for mask in 0..n_assign {
            let atoms: BTreeMap<Formula, bool> = atom_list
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), mask & (1 << i) != 0))
                .collect();
            let mut pieces = Vec::new();
            for inst in &instances {
                pieces.push(tr.rewrite(inst, &partitions, &atoms)?);
            }
            let body = Formula::and(pieces);
            let body = match &inf_var {
                Some((v, s)) => Formula::forall(v, s, body),
                None => body,
            };
            let (flat, axioms) = flatten_ground(&mut tr, body)?;
            let mut all = vec![flat];
            all.extend(axioms);
            let case_formula = Formula::and(all);
            cases.push(Case {
                partitions: partitions.clone(),
                atoms,
                formula: case_formula.clone(),
            });
            disjuncts.push(case_formula);
        }
    }

    let formula = Formula::or(disjuncts);
    Ok(Translation {
        formula,
        signature: tr.out_sig,
        certificate: Certificate {
            ground_terms: ground,
            identity: false,
            symbols: tr.symbols,
            cases,
        },
    })
}

fn strip_universals(f: &Formula) -> (Vec<(String, String)>, Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Forall(v, s, body) = cur {
        vars.push((v.clone(), s.clone()));
        cur = body;
    }
    (vars, cur.clone())
}

/// Reconstructs a model of the original sentence from a model of the
/// translated one, and verifies it by direct evaluation.
pub fn back_translate_model(
    m_star: &FiniteStructure,
    translation: &Translation,
    original: &Formula,
    original_sig: &Signature,
) -> Result<FiniteStructure> {
    if translation.certificate.identity {
        let mut m = m_star.clone();
        m.signature = original_sig.clone();
        verify(&m, original)?;
        return Ok(m);
    }
    let s_inf = original_sig
        .infinite_sort()
        .ok_or_else(|| Error::Invalid("no distinguished sort".to_string()))?
        .to_string();
    let case = translation
        .certificate
        .cases
        .iter()
        .find(|c| m_star.satisfies(&c.formula).unwrap_or(false))
        .ok_or_else(|| Error::Invalid("model satisfies no translation case".to_string()))?;

    let mut m = FiniteStructure::new(original_sig.clone());
    // distinguished domain is carried over
    m.domains.insert(s_inf.clone(), m_star.domain(&s_inf).to_vec());
    // one element per ground-term class elsewhere
    for (sort, classes) in &case.partitions {
        let elems: Vec<String> = (0..classes.len()).map(|i| format!("{sort}_{i}")).collect();
        m.domains.insert(sort.clone(), elems);
    }
    let class_elem = |sort: &str, t: &Term| -> Result<String> {
        let idx = translation.certificate.ground_terms[sort]
            .iter()
            .position(|u| u == t)
            .ok_or_else(|| Error::Invalid(format!("ground term {t:?} missing")))?;
        let class = case.partitions[sort]
            .iter()
            .position(|c| c.contains(&idx))
            .ok_or_else(|| Error::Invalid("partition does not cover term".to_string()))?;
        Ok(format!("{sort}_{class}"))
    };

    // constants
    for (c, sort) in &original_sig.constants {
        if sort == &s_inf {
            let v = m_star
                .constants
                .get(c)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("constant {c} missing in model")))?;
            m.constants.insert(c.clone(), v);
        } else {
            m.constants.insert(c.clone(), class_elem(sort, &Term::Const(c.clone()))?);
        }
    }

    // functions
    for (f, (args, result)) in &original_sig.functions {
        let mut table: BTreeMap<Vec<String>, String> = BTreeMap::new();
        if result == &s_inf && args.len() == 1 && args[0] == s_inf {
            // carried over directly
            table = m_star
                .functions
                .get(f)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("function {f} missing in model")))?;
        } else if result == &s_inf {
            // mixed: assemble from specializations
            let doms: Vec<&[String]> = args.iter().map(|a| m.domain(a)).collect();
            for tuple in crate::finite::tuples(&doms) {
                let value = eval_mixed_app(
                    f, args, &tuple, &s_inf, translation, case, m_star,
                )?;
                table.insert(tuple, value);
            }
        } else {
            // purely non-distinguished: follow ground-term structure
            let doms: Vec<&[String]> = args.iter().map(|a| m.domain(a)).collect();
            for tuple in crate::finite::tuples(&doms) {
                // pick class representatives for the arguments
                let mut rep_args = Vec::new();
                for (sort, e) in args.iter().zip(&tuple) {
                    let class: usize = e
                        .rsplit('_')
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Invalid("bad element name".to_string()))?;
                    let rep = case.partitions[sort][class][0];
                    rep_args.push(translation.certificate.ground_terms[sort][rep].clone());
                }
                let image = Term::App(f.clone(), rep_args);
                table.insert(tuple, class_elem(result, &image)?);
            }
        }
        m.functions.insert(f.clone(), table);
    }

    // relations
    for (r, args) in &original_sig.relations {
        let mut set: BTreeSet<Vec<String>> = BTreeSet::new();
        if args.iter().all(|a| a == &s_inf) {
            set = m_star.relations.get(r).cloned().unwrap_or_default();
        } else if args.iter().any(|a| a == &s_inf) {
            // mixed: one distinguished argument, from specializations
            let doms: Vec<&[String]> = args.iter().map(|a| m.domain(a)).collect();
            for tuple in crate::finite::tuples(&doms) {
                if eval_mixed_rel(r, args, &tuple, &s_inf, translation, case, m_star)? {
                    set.insert(tuple);
                }
            }
        } else {
            // pure: read the case's atom assignment
            let doms: Vec<&[String]> = args.iter().map(|a| m.domain(a)).collect();
            for tuple in crate::finite::tuples(&doms) {
                let mut rep_args = Vec::new();
                for (sort, e) in args.iter().zip(&tuple) {
                    let class: usize = e.rsplit('_').next().unwrap().parse().unwrap();
                    let rep = case.partitions[sort][class]
                        .iter()
                        .min()
                        .copied()
                        .unwrap();
                    rep_args.push(translation.certificate.ground_terms[sort][rep].clone());
                }
                let atom = Formula::Rel(r.clone(), rep_args);
                if *case.atoms.get(&atom).unwrap_or(&false) {
                    set.insert(tuple);
                }
            }
        }
        m.relations.insert(r.clone(), set);
    }

    verify(&m, original)?;
    Ok(m)
}

fn class_index_of_element(e: &str) -> Result<usize> {
    e.rsplit('_')
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Invalid(format!("bad element name {e}")))
}

fn eval_mixed_app(
    f: &str,
    args: &[String],
    tuple: &[String],
    s_inf: &str,
    translation: &Translation,
    case: &Case,
    m_star: &FiniteStructure,
) -> Result<String> {
    // locate the specialization matching this tuple's classes
    let mut ground_args = Vec::new();
    let mut inf_value = None;
    for (i, (sort, e)) in args.iter().zip(tuple).enumerate() {
        if sort == s_inf {
            inf_value = Some(e.clone());
        } else {
            ground_args.push((i, class_index_of_element(e)?));
        }
    }
    let origin = SpecOrigin::Function { orig: f.to_string(), ground_args };
    let name = translation
        .certificate
        .symbols
        .iter()
        .find(|(_, o)| **o == origin)
        .map(|(n, _)| n.clone());
    let _ = case;
    match (name, inf_value) {
        (Some(n), Some(d)) => m_star
            .functions
            .get(&n)
            .and_then(|t| t.get(&vec![d]).cloned())
            .ok_or_else(|| Error::Invalid(format!("specialized function {n} incomplete"))),
        (Some(n), None) => m_star
            .constants
            .get(&n)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("specialized constant {n} missing"))),
        (None, _) => {
            // the specialization never appeared in the formula: any value works
            m_star
                .domain(s_inf)
                .first()
                .cloned()
                .ok_or_else(|| Error::Invalid("empty distinguished domain".to_string()))
        }
    }
}

fn eval_mixed_rel(
    r: &str,
    args: &[String],
    tuple: &[String],
    s_inf: &str,
    translation: &Translation,
    case: &Case,
    m_star: &FiniteStructure,
) -> Result<bool> {
    let mut ground_args = Vec::new();
    let mut inf_values = Vec::new();
    for (i, (sort, e)) in args.iter().zip(tuple).enumerate() {
        if sort == s_inf {
            inf_values.push(e.clone());
        } else {
            ground_args.push((i, class_index_of_element(e)?));
        }
    }
    let origin = SpecOrigin::Relation { orig: r.to_string(), ground_args };
    let name = translation
        .certificate
        .symbols
        .iter()
        .find(|(_, o)| **o == origin)
        .map(|(n, _)| n.clone());
    let _ = case;
    Ok(match name {
        Some(n) => m_star
            .relations
            .get(&n)
            .map(|set| set.contains(&inf_values))
            .unwrap_or(false),
        // never constrained by the formula
        None => false,
    })
}

fn verify(m: &FiniteStructure, f: &Formula) -> Result<()> {
    if m.satisfies(f)? {
        Ok(())
    } else {
        Err(Error::Invalid(
            "back-translated model fails the original sentence".to_string(),
        ))
    }
}
