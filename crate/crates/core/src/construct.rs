//! Builds symbolic structures from atom profiles for the six order flavors:
//! a profile lists the equivalence classes of elements by the single-variable
//! atomic formulas they satisfy, and the construction turns each class into a
//! node with a bound formula, function terms, and order interpretations over
//! the flavor's base theory.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::finite::FiniteStructure;
use crate::fol::{parse_formula, print_formula, Formula, Signature, Term};
use crate::fragments::{build_axiom, Flavor, FragmentReport};
use crate::re::Regex;
use crate::sexpr;
use crate::strings::defined::{neg_branch, neg_spine, positive, zeros};
use crate::strings::beta;
use crate::symbolic::{arg_var, model_check, Node, SymbolicStructure, BOUND_VAR};
use crate::theory::Theory;

/// A non-ground term of the single-variable atom language: the variable
/// itself or a unary function applied to it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomTerm {
    X,
    F(String),
}

impl AtomTerm {
    pub fn term(&self, sort: &str) -> Term {
        let x = Term::var(BOUND_VAR, sort);
        match self {
            AtomTerm::X => x,
            AtomTerm::F(f) => Term::App(f.clone(), vec![x]),
        }
    }
}

/// The finite atom language of a single-sorted unary signature.
#[derive(Debug, Clone)]
pub struct AtomUniverse {
    pub signature: Signature,
    pub sort: String,
    pub order: String,
    /// `x` first, then `f(x)` in symbol order.
    pub terms: Vec<AtomTerm>,
    /// Element atoms: `P(x)`, `x = c`, `x ≺ c`, `c ≺ x`.
    pub element_atoms: Vec<Formula>,
    /// All atoms: element, image (element with `x ↦ f(x)`), and mixed order.
    pub atoms: Vec<Formula>,
}

pub fn atom_universe(sig: &Signature) -> Result<AtomUniverse> {
    if sig.sorts.len() != 1 {
        return Err(Error::Fragment("atom universe needs a single sort".to_string()));
    }
    let sort = sig.sorts[0].name.clone();
    let order = sig
        .order
        .clone()
        .ok_or_else(|| Error::Fragment("atom universe needs a designated order".to_string()))?;
    let mut terms = vec![AtomTerm::X];
    for (f, (args, _)) in &sig.functions {
        if args.len() != 1 {
            return Err(Error::Fragment(format!("function {f} is not unary")));
        }
        terms.push(AtomTerm::F(f.clone()));
    }

    let x = Term::var(BOUND_VAR, &sort);
    let mut element_atoms = Vec::new();
    for (r, args) in &sig.relations {
        if r != &order && args.len() == 1 {
            element_atoms.push(Formula::Rel(r.clone(), vec![x.clone()]));
        }
    }
    for c in sig.constants.keys() {
        element_atoms.push(Formula::Eq(x.clone(), Term::Const(c.clone())));
        element_atoms.push(Formula::Rel(order.clone(), vec![x.clone(), Term::Const(c.clone())]));
        element_atoms.push(Formula::Rel(order.clone(), vec![Term::Const(c.clone()), x.clone()]));
    }

    let mut atoms = element_atoms.clone();
    for t in &terms {
        if let AtomTerm::F(_) = t {
            let ft = t.term(&sort);
            for a in &element_atoms {
                atoms.push(a.subst_var(BOUND_VAR, &ft));
            }
        }
    }
    for (i, t) in terms.iter().enumerate() {
        for (j, u) in terms.iter().enumerate() {
            if i != j {
                atoms.push(Formula::Rel(
                    order.clone(),
                    vec![t.term(&sort), u.term(&sort)],
                ));
            }
            if i < j {
                atoms.push(Formula::Eq(t.term(&sort), u.term(&sort)));
            }
        }
    }
    Ok(AtomUniverse { signature: sig.clone(), sort, order, terms, element_atoms, atoms })
}

impl AtomUniverse {
    /// Number of non-ground terms; the tree alphabet never shrinks below 2.
    pub fn alphabet_max(&self) -> u32 {
        (self.terms.len() as u32).max(2)
    }

    /// Normalizes an atom to its canonical universe form (orienting
    /// symmetric equalities), if it belongs to the language.
    pub fn canonicalize(&self, f: &Formula) -> Option<Formula> {
        if self.atoms.contains(f) {
            return Some(f.clone());
        }
        if let Formula::Eq(a, b) = f {
            let swapped = Formula::Eq(b.clone(), a.clone());
            if self.atoms.contains(&swapped) {
                return Some(swapped);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileClass {
    pub name: String,
    pub atoms: BTreeSet<Formula>,
}

/// Finitely many classes with their atom sets; the vector order is the node
/// order used for tie-breaking throughout the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomProfile {
    pub classes: Vec<ProfileClass>,
    /// Source-model element to class index, when extracted from a model.
    pub provenance: BTreeMap<String, usize>,
}

impl AtomProfile {
    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }
}

// --- atom set accessors ---

fn regular_const(u: &AtomUniverse, gamma: &BTreeSet<Formula>) -> Option<String> {
    let x = Term::var(BOUND_VAR, &u.sort);
    u.signature
        .constants
        .keys()
        .find(|c| gamma.contains(&Formula::Eq(x.clone(), Term::Const((*c).clone()))))
        .cloned()
}

fn consts_below(u: &AtomUniverse, gamma: &BTreeSet<Formula>) -> BTreeSet<String> {
    let x = Term::var(BOUND_VAR, &u.sort);
    u.signature
        .constants
        .keys()
        .filter(|c| {
            gamma.contains(&Formula::Rel(
                u.order.clone(),
                vec![Term::Const((*c).clone()), x.clone()],
            ))
        })
        .cloned()
        .collect()
}

fn consts_above(u: &AtomUniverse, gamma: &BTreeSet<Formula>) -> BTreeSet<String> {
    let x = Term::var(BOUND_VAR, &u.sort);
    u.signature
        .constants
        .keys()
        .filter(|c| {
            gamma.contains(&Formula::Rel(
                u.order.clone(),
                vec![x.clone(), Term::Const((*c).clone())],
            ))
        })
        .cloned()
        .collect()
}

fn mixed_lt(u: &AtomUniverse, gamma: &BTreeSet<Formula>, a: &AtomTerm, b: &AtomTerm) -> bool {
    gamma.contains(&Formula::Rel(u.order.clone(), vec![a.term(&u.sort), b.term(&u.sort)]))
}

fn mixed_eq(u: &AtomUniverse, gamma: &BTreeSet<Formula>, a: &AtomTerm, b: &AtomTerm) -> bool {
    a == b
        || gamma.contains(&Formula::Eq(a.term(&u.sort), b.term(&u.sort)))
        || gamma.contains(&Formula::Eq(b.term(&u.sort), a.term(&u.sort)))
}

/// The position of summary nodes relative to the constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Segment {
    pub below: BTreeSet<String>,
    pub above: BTreeSet<String>,
}

fn segment(u: &AtomUniverse, gamma: &BTreeSet<Formula>) -> Segment {
    Segment { below: consts_below(u, gamma), above: consts_above(u, gamma) }
}

// --- spot orders (mixed order atoms modulo equality) ---

/// Equality classes ("spots") of a term set and the strict order between
/// them, transitively closed.
struct SpotOrder {
    spots: Vec<Vec<AtomTerm>>,
    lt: BTreeSet<(usize, usize)>,
}

impl SpotOrder {
    fn spot_of(&self, t: &AtomTerm) -> usize {
        self.spots.iter().position(|s| s.contains(t)).expect("term in a spot")
    }

    fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.lt.contains(&(a, b)) || self.lt.contains(&(b, a))
    }
}

fn spot_order(
    u: &AtomUniverse,
    gamma: &BTreeSet<Formula>,
    terms: &[AtomTerm],
) -> Result<SpotOrder> {
    let mut spots: Vec<Vec<AtomTerm>> = Vec::new();
    for t in terms {
        match spots.iter_mut().find(|s| mixed_eq(u, gamma, &s[0], t)) {
            Some(s) => s.push(t.clone()),
            None => spots.push(vec![t.clone()]),
        }
    }
    let mut lt = BTreeSet::new();
    for (i, a) in spots.iter().enumerate() {
        for (j, b) in spots.iter().enumerate() {
            if i != j
                && a.iter().any(|t| b.iter().any(|s| mixed_lt(u, gamma, t, s)))
            {
                lt.insert((i, j));
            }
        }
    }
    // transitive closure
    let n = spots.len();
    loop {
        let mut grown = false;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if lt.contains(&(i, j)) && lt.contains(&(j, k)) && lt.insert((i, k)) {
                        grown = true;
                    }
                }
            }
        }
        if !grown {
            break;
        }
    }
    for i in 0..n {
        if lt.contains(&(i, i)) {
            return Err(Error::Invalid(format!(
                "mixed order atoms form a cycle through {:?}",
                spots[i]
            )));
        }
    }
    Ok(SpotOrder { spots, lt })
}

// --- extraction and validation ---

/// Reads a profile off a finite structure by evaluating every atom at every
/// element; classes are ordered by their atom sets.
pub fn extract_profile(m: &FiniteStructure, u: &AtomUniverse) -> Result<AtomProfile> {
    let mut gammas: Vec<BTreeSet<Formula>> = Vec::new();
    let mut provenance_raw: Vec<(String, BTreeSet<Formula>)> = Vec::new();
    for e in m.domain(&u.sort) {
        let mut env = BTreeMap::new();
        env.insert(BOUND_VAR.to_string(), e.clone());
        let mut gamma = BTreeSet::new();
        for a in &u.atoms {
            if m.eval(a, &env)? {
                gamma.insert(a.clone());
            }
        }
        if !gammas.contains(&gamma) {
            gammas.push(gamma.clone());
        }
        provenance_raw.push((e.clone(), gamma));
    }
    gammas.sort();
    let classes: Vec<ProfileClass> = gammas
        .iter()
        .enumerate()
        .map(|(i, g)| ProfileClass { name: format!("n{i}"), atoms: g.clone() })
        .collect();
    let provenance = provenance_raw
        .into_iter()
        .map(|(e, g)| (e, gammas.iter().position(|h| h == &g).unwrap()))
        .collect();
    Ok(AtomProfile { classes, provenance })
}

/// Checks the consistency conditions a profile must satisfy before
/// construction: unique pinning of constants, agreement of the order facts
/// between pinned and unpinned classes, acyclic mixed order atoms, existence
/// of a function target per class, and the flavor's own constraints.
pub fn validate_profile(p: &AtomProfile, flavor: Flavor, u: &AtomUniverse) -> FragmentReport {
    let mut findings = Vec::new();
    if p.classes.is_empty() {
        findings.push("profile has no classes".to_string());
    }
    let universe_atoms: BTreeSet<&Formula> = u.atoms.iter().collect();
    for c in &p.classes {
        for a in &c.atoms {
            if !universe_atoms.contains(a) {
                findings.push(format!(
                    "class {}: atom {} outside the atom language",
                    c.name,
                    print_formula(a)
                ));
            }
        }
    }
    for (i, a) in p.classes.iter().enumerate() {
        for b in &p.classes[i + 1..] {
            if a.atoms == b.atoms {
                findings.push(format!("classes {} and {} share atoms", a.name, b.name));
            }
        }
    }

    // each constant pinned by exactly one class
    let x = Term::var(BOUND_VAR, &u.sort);
    for c in u.signature.constants.keys() {
        let eq = Formula::Eq(x.clone(), Term::Const(c.clone()));
        let pinned: Vec<&str> = p
            .classes
            .iter()
            .filter(|cl| cl.atoms.contains(&eq))
            .map(|cl| cl.name.as_str())
            .collect();
        if pinned.len() != 1 {
            findings.push(format!(
                "constant {c} is pinned by {} classes ({})",
                pinned.len(),
                pinned.join(", ")
            ));
        }
    }

    // pinned classes must not also place the pinning constant strictly
    // around themselves
    for cl in &p.classes {
        if let Some(c) = regular_const(u, &cl.atoms) {
            let lo = Formula::Rel(u.order.clone(), vec![Term::Const(c.clone()), x.clone()]);
            let hi = Formula::Rel(u.order.clone(), vec![x.clone(), Term::Const(c.clone())]);
            if cl.atoms.contains(&lo) || cl.atoms.contains(&hi) {
                findings.push(format!(
                    "class {}: pinned to {c} yet strictly ordered against it",
                    cl.name
                ));
            }
        }
    }

    // order facts between a pinned class and any other class must agree
    for n in &p.classes {
        for m in &p.classes {
            let mut verdicts: Vec<bool> = Vec::new();
            if let Some(c) = regular_const(u, &n.atoms) {
                verdicts.push(m.atoms.contains(&Formula::Rel(
                    u.order.clone(),
                    vec![Term::Const(c), x.clone()],
                )));
            }
            if let Some(c) = regular_const(u, &m.atoms) {
                verdicts.push(n.atoms.contains(&Formula::Rel(
                    u.order.clone(),
                    vec![x.clone(), Term::Const(c)],
                )));
            }
            if verdicts.contains(&true) && verdicts.contains(&false) {
                findings.push(format!(
                    "conflicting order facts between {} and {}",
                    n.name, m.name
                ));
            }
        }
    }

    // mixed order atoms must induce a strict order
    for cl in &p.classes {
        match spot_order(u, &cl.atoms, &u.terms) {
            Err(e) => findings.push(format!("class {}: {e}", cl.name)),
            Ok(so) => {
                if flavor.is_total() {
                    for i in 0..so.spots.len() {
                        for j in i + 1..so.spots.len() {
                            if !so.comparable(i, j) {
                                findings.push(format!(
                                    "class {}: terms {:?} and {:?} are incomparable under a total order",
                                    cl.name, so.spots[i], so.spots[j]
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // every class and function must have a target class
    for cl in &p.classes {
        for t in &u.terms {
            if let AtomTerm::F(f) = t {
                if function_target(p, u, &cl.atoms, f).is_none() {
                    findings.push(format!(
                        "class {}: no class matches the image atoms of {f}",
                        cl.name
                    ));
                }
            }
        }
    }

    // flavor-specific requirements
    for cl in &p.classes {
        for t in &u.terms {
            let AtomTerm::F(_) = t else { continue };
            if flavor.is_progressive() && !mixed_lt(u, &cl.atoms, &AtomTerm::X, t) {
                findings.push(format!(
                    "class {}: progressive flavor needs the variable below {t:?}",
                    cl.name
                ));
            }
            if flavor.is_regressive() && !mixed_lt(u, &cl.atoms, t, &AtomTerm::X) {
                findings.push(format!(
                    "class {}: regressive flavor needs {t:?} below the variable",
                    cl.name
                ));
            }
        }
    }
    if flavor.is_total() {
        // summary segments must be linearly ordered by their below-sets
        let summaries: Vec<&ProfileClass> =
            p.classes.iter().filter(|c| regular_const(u, &c.atoms).is_none()).collect();
        for (i, a) in summaries.iter().enumerate() {
            for b in &summaries[i + 1..] {
                let ba = consts_below(u, &a.atoms);
                let bb = consts_below(u, &b.atoms);
                if ba != bb && !ba.is_subset(&bb) && !bb.is_subset(&ba) {
                    findings.push(format!(
                        "summary classes {} and {} sit after incomparable constant sets",
                        a.name, b.name
                    ));
                }
            }
        }
    }

    if findings.is_empty() {
        FragmentReport { member: true, findings }
    } else {
        FragmentReport { member: false, findings }
    }
}

/// The class whose element atoms coincide with the f-image atoms of `gamma`;
/// ties go to the earliest class.
fn function_target(
    p: &AtomProfile,
    u: &AtomUniverse,
    gamma: &BTreeSet<Formula>,
    f: &str,
) -> Option<usize> {
    let ft = AtomTerm::F(f.to_string()).term(&u.sort);
    p.classes.iter().position(|m| {
        u.element_atoms.iter().all(|a| {
            let image = a.subst_var(BOUND_VAR, &ft);
            m.atoms.contains(a) == gamma.contains(&image)
        })
    })
}

// --- construction ---

fn theory_for(flavor: Flavor, u: &AtomUniverse) -> Theory {
    if flavor.is_total() {
        Theory::lia()
    } else {
        Theory::str(u.alphabet_max())
    }
}

fn summary_bound(flavor: Flavor, linear: bool, u: &AtomUniverse, theory: &Theory) -> Formula {
    let l = u.alphabet_max();
    let x = Term::var(BOUND_VAR, theory.sort());
    match flavor {
        Flavor::Tot => Formula::True,
        Flavor::TotProsucc => theory.less(x, Term::Int(0)).negate(),
        Flavor::TotRegpred => theory.less(Term::Int(0), x).negate(),
        Flavor::Pref => {
            if linear {
                Formula::ReMatch(
                    Regex::alt(Regex::plus(Regex::Letter(0)), Regex::star(Regex::Letter(1))),
                    x,
                )
            } else {
                let mut r = Regex::alt(positive(l), neg_spine());
                if let Some(br) = neg_branch(l) {
                    r = Regex::alt(r, br);
                }
                Formula::ReMatch(r, x)
            }
        }
        Flavor::PrefProsucc => {
            let r = if linear { Regex::star(Regex::Letter(1)) } else { positive(l) };
            Formula::ReMatch(r, x)
        }
        Flavor::PrefRegpred => Formula::ReMatch(zeros(), x),
    }
}

/// One function group: terms whose targets share a segment, embedded
/// together around an anchor.
struct Group {
    members: Vec<AtomTerm>,
    anchor: AtomTerm,
}

/// Positions the group members relative to the anchor. For total flavors the
/// result is a signed offset per term; for prefix flavors it is a path term
/// built from parent/child/sibling steps applied to `anchor_pos`.
fn embed_group(
    u: &AtomUniverse,
    gamma: &BTreeSet<Formula>,
    group: &Group,
    flavor: Flavor,
    anchor_pos: Term,
) -> Result<BTreeMap<AtomTerm, Term>> {
    let so = spot_order(u, gamma, &group.members)?;
    let anchor_spot = so.spot_of(&group.anchor);
    let n = so.spots.len();
    let mut out = BTreeMap::new();

    if flavor.is_total() {
        // sort spots along the line and hand out offsets from the anchor
        let mut order: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && !so.comparable(i, j) {
                    return Err(Error::Invalid(
                        "incomparable terms in a line embedding".to_string(),
                    ));
                }
            }
        }
        order.sort_by(|a, b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if so.lt.contains(&(*a, *b)) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        let base = order.iter().position(|s| *s == anchor_spot).unwrap() as i64;
        for (rank, spot) in order.iter().enumerate() {
            let k = rank as i64 - base;
            let pos = match (&anchor_pos, k) {
                (t, 0) => t.clone(),
                (Term::Int(z), _) => Term::Int(z + k),
                (t, _) => Term::App("+".to_string(), vec![t.clone(), Term::Int(k)]),
            };
            for t in &so.spots[*spot] {
                out.insert(t.clone(), pos.clone());
            }
        }
        return Ok(out);
    }

    // prefix flavors: forest embedding
    let l = u.alphabet_max();
    // parent of a spot: the unique maximal strict predecessor
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for s in 0..n {
        let preds: Vec<usize> = (0..n).filter(|p| so.lt.contains(&(*p, s))).collect();
        let maximal: Vec<usize> = preds
            .iter()
            .copied()
            .filter(|p| !preds.iter().any(|q| so.lt.contains(&(*p, *q))))
            .collect();
        match maximal.len() {
            0 => {}
            1 => parent[s] = Some(maximal[0]),
            _ => {
                return Err(Error::Invalid(format!(
                    "term {:?} has incomparable predecessors",
                    so.spots[s]
                )))
            }
        }
    }
    let children = |p: usize| -> Vec<usize> {
        (0..n).filter(|s| parent[*s] == Some(p)).collect()
    };

    let mut pos: BTreeMap<usize, Term> = BTreeMap::new();
    pos.insert(anchor_spot, anchor_pos.clone());

    // the chain from the anchor up to its root
    let mut chain = vec![anchor_spot];
    while let Some(p) = parent[*chain.last().unwrap()] {
        let below = pos[chain.last().unwrap()].clone();
        pos.insert(p, Term::App("parent".to_string(), vec![below]));
        chain.push(p);
    }
    let root = *chain.last().unwrap();

    // sibling indices per base term, starting at 2
    let mut sibling_next: BTreeMap<String, u32> = BTreeMap::new();
    let sibling = |base: &Term, sibling_next: &mut BTreeMap<String, u32>| -> Result<Term> {
        let key = format!("{base:?}");
        let j = *sibling_next.get(&key).unwrap_or(&2);
        if j > l {
            return Err(Error::Budget(format!("sibling index {j} exceeds the alphabet")));
        }
        sibling_next.insert(key, j + 1);
        Ok(Term::App(format!("sibling_{j}"), vec![base.clone()]))
    };

    // off-branch children of the anchor's ancestors hang as siblings of the
    // chain node one level down
    for k in 1..chain.len() {
        let lower = chain[k - 1];
        for c in children(chain[k]) {
            if c != lower && !pos.contains_key(&c) {
                let t = sibling(&pos[&lower].clone(), &mut sibling_next)?;
                pos.insert(c, t);
            }
        }
    }
    // other forest roots hang as siblings of the anchor's root
    for s in 0..n {
        if parent[s].is_none() && s != root {
            let t = sibling(&pos[&root].clone(), &mut sibling_next)?;
            pos.insert(s, t);
        }
    }

    // descendants by child steps, breadth-first
    let mut queue: VecDeque<usize> = pos.keys().copied().collect();
    while let Some(v) = queue.pop_front() {
        let mut next_child = 1u32;
        for c in children(v) {
            if pos.contains_key(&c) {
                continue;
            }
            if next_child > l {
                return Err(Error::Budget(format!(
                    "child index {next_child} exceeds the alphabet"
                )));
            }
            let t = Term::App(format!("child_{next_child}"), vec![pos[&v].clone()]);
            next_child += 1;
            pos.insert(c, t);
            queue.push_back(c);
        }
    }

    for s in 0..n {
        let p = pos
            .get(&s)
            .ok_or_else(|| Error::Invalid(format!("unplaced terms {:?}", so.spots[s])))?;
        for t in &so.spots[s] {
            out.insert(t.clone(), p.clone());
        }
    }
    Ok(out)
}

/// Builds the symbolic structure of a validated profile under a flavor.
pub fn construct(
    p: &AtomProfile,
    flavor: Flavor,
    u: &AtomUniverse,
) -> Result<SymbolicStructure> {
    let report = validate_profile(p, flavor, u);
    if !report.member {
        return Err(Error::Invalid(format!(
            "invalid profile: {}",
            report.findings.join("; ")
        )));
    }
    let theory = theory_for(flavor, u);
    let mut s = SymbolicStructure::new(theory.clone(), u.signature.clone());
    let tsort = theory.sort();
    let x = Term::var(BOUND_VAR, tsort);

    let is_regular: Vec<Option<String>> =
        p.classes.iter().map(|c| regular_const(u, &c.atoms)).collect();
    let segments: Vec<Segment> =
        p.classes.iter().map(|c| segment(u, &c.atoms)).collect();
    let linear: Vec<bool> = segments.iter().map(|s| !s.above.is_empty()).collect();

    // nodes
    for (i, cl) in p.classes.iter().enumerate() {
        let bound = if is_regular[i].is_some() {
            Formula::Eq(x.clone(), theory.reg_term())
        } else {
            summary_bound(flavor, linear[i], u, &theory)
        };
        s.nodes.insert(
            cl.name.clone(),
            Node { name: cl.name.clone(), sort: u.sort.clone(), bound },
        );
    }

    // constants
    for c in u.signature.constants.keys() {
        let xeq = Formula::Eq(Term::var(BOUND_VAR, &u.sort), Term::Const(c.clone()));
        let node = p
            .classes
            .iter()
            .find(|cl| cl.atoms.contains(&xeq))
            .expect("validated: constant pinned");
        s.constants.insert(c.clone(), (node.name.clone(), theory.reg_term()));
    }

    // unary relations
    for (r, args) in &u.signature.relations {
        if r == &u.order || args.len() != 1 {
            continue;
        }
        let mut table = BTreeMap::new();
        let atom = Formula::Rel(r.clone(), vec![Term::var(BOUND_VAR, &u.sort)]);
        for cl in &p.classes {
            if cl.atoms.contains(&atom) {
                table.insert(vec![cl.name.clone()], Formula::True);
            }
        }
        s.relations.insert(r.clone(), table);
    }

    // the order
    let x1 = Term::var(&arg_var(1), tsort);
    let x2 = Term::var(&arg_var(2), tsort);
    let mut order_table = BTreeMap::new();
    for (i, n) in p.classes.iter().enumerate() {
        for (j, m) in p.classes.iter().enumerate() {
            let formula = if let Some(c) = &is_regular[i] {
                let below = Formula::Rel(
                    u.order.clone(),
                    vec![Term::Const(c.clone()), Term::var(BOUND_VAR, &u.sort)],
                );
                if m.atoms.contains(&below) { Formula::True } else { Formula::False }
            } else if let Some(c) = &is_regular[j] {
                let above = Formula::Rel(
                    u.order.clone(),
                    vec![Term::var(BOUND_VAR, &u.sort), Term::Const(c.clone())],
                );
                if n.atoms.contains(&above) { Formula::True } else { Formula::False }
            } else if segments[i] != segments[j] {
                let (sn, sm) = (&segments[i], &segments[j]);
                let before = if flavor.is_total() {
                    sn.below.is_subset(&sm.below)
                } else {
                    !sn.above.is_disjoint(&sm.below)
                        || (sn.below == sm.below && sm.above.is_subset(&sn.above))
                };
                if before { Formula::True } else { Formula::False }
            } else {
                // same segment: the base order, weakened to reflexive for
                // the earlier node so interleaving stays consistent
                let strict = if flavor.is_total() {
                    theory.less(x1.clone(), x2.clone())
                } else {
                    beta(&x1, &x2, u.alphabet_max())
                };
                if i < j {
                    Formula::or(vec![strict, Formula::Eq(x1.clone(), x2.clone())])
                } else {
                    strict
                }
            };
            if formula != Formula::False {
                order_table.insert(vec![n.name.clone(), m.name.clone()], formula);
            }
        }
    }
    s.relations.insert(u.order.clone(), order_table);

    // functions
    for (i, cl) in p.classes.iter().enumerate() {
        // targets first
        let mut targets: BTreeMap<String, usize> = BTreeMap::new();
        for t in &u.terms {
            if let AtomTerm::F(f) = t {
                let m = function_target(p, u, &cl.atoms, f)
                    .expect("validated: target exists");
                targets.insert(f.clone(), m);
            }
        }
        // group summary-target functions by target segment
        let mut groups: BTreeMap<Segment, Vec<AtomTerm>> = BTreeMap::new();
        for (f, m) in &targets {
            if is_regular[*m].is_none() {
                groups
                    .entry(segments[*m].clone())
                    .or_default()
                    .push(AtomTerm::F(f.clone()));
            }
        }
        let anchored_everywhere = flavor.is_progressive() || flavor.is_regressive();
        let own_segment =
            if is_regular[i].is_none() { Some(segments[i].clone()) } else { None };
        let mut placements: BTreeMap<AtomTerm, Term> = BTreeMap::new();
        for (seg, mut members) in groups {
            let with_x = anchored_everywhere || own_segment.as_ref() == Some(&seg);
            if with_x {
                members.push(AtomTerm::X);
            }
            members.sort();
            let anchor = members[0].clone();
            let anchor_pos = if anchor == AtomTerm::X {
                Term::var(&arg_var(1), tsort)
            } else if flavor.is_total() {
                Term::Int(0)
            } else {
                Term::Epsilon
            };
            let group = Group { members, anchor };
            let placed = embed_group(u, &cl.atoms, &group, flavor, anchor_pos)?;
            placements.extend(placed);
        }
        for (f, m) in &targets {
            let term = if is_regular[*m].is_some() {
                theory.reg_term()
            } else {
                placements[&AtomTerm::F(f.clone())].clone()
            };
            s.functions
                .entry(f.clone())
                .or_default()
                .insert(vec![cl.name.clone()], (p.classes[*m].name.clone(), term));
        }
    }

    Ok(s)
}

/// Constructs, checks well-definedness, and model-checks the structure
/// against the flavor axiom conjoined with `phi`.
pub fn construct_and_verify(
    p: &AtomProfile,
    flavor: Flavor,
    u: &AtomUniverse,
    phi: &Formula,
) -> Result<(SymbolicStructure, bool)> {
    let s = construct(p, flavor, u)?;
    let problems = s.check_well_defined()?;
    if !problems.is_empty() {
        return Err(Error::Invalid(format!(
            "constructed structure is ill-defined: {}",
            problems.join("; ")
        )));
    }
    let axiom = build_axiom(flavor, &u.signature)?;
    let verdict = model_check(&s, &Formula::and(vec![axiom, phi.clone()]))?;
    Ok((s, verdict))
}

// --- profile files ---

pub fn print_profile(p: &AtomProfile) -> String {
    let mut out = String::new();
    for cl in &p.classes {
        out.push_str(&format!("(class {} (atoms", cl.name));
        for a in &cl.atoms {
            out.push_str(&format!(" {}", print_formula(a)));
        }
        out.push_str("))\n");
    }
    out
}

/// Parses the profile format: `(class NAME (atoms ATOM...))` entries with an
/// optional trailing `(order NAME...)` that overrides the class order.
pub fn parse_profile(src: &str, u: &AtomUniverse) -> Result<AtomProfile> {
    let items = sexpr::parse_all(src)?;
    let mut classes: Vec<ProfileClass> = Vec::new();
    let mut order: Option<Vec<String>> = None;
    let mut env = BTreeMap::new();
    env.insert(BOUND_VAR.to_string(), u.sort.clone());
    for item in &items {
        let list = item.as_list()?;
        let head = list
            .first()
            .ok_or_else(|| Error::Invalid("empty profile entry".to_string()))?
            .as_atom()?;
        match head {
            "class" => {
                if list.len() != 3 {
                    return Err(Error::Invalid(
                        "expected (class NAME (atoms ...))".to_string(),
                    ));
                }
                let name = list[1].as_atom()?.to_string();
                let atoms_list = list[2].as_list()?;
                if atoms_list.first().and_then(|a| a.as_atom().ok()) != Some("atoms") {
                    return Err(Error::Invalid("expected (atoms ...)".to_string()));
                }
                let mut atoms = BTreeSet::new();
                for a in &atoms_list[1..] {
                    let f = parse_formula(a, &u.signature, &env)?;
                    let canon = u.canonicalize(&f).ok_or_else(|| {
                        Error::Invalid(format!(
                            "atom {} outside the atom language",
                            print_formula(&f)
                        ))
                    })?;
                    atoms.insert(canon);
                }
                classes.push(ProfileClass { name, atoms });
            }
            "order" => {
                order =
                    Some(list[1..].iter().map(|a| Ok(a.as_atom()?.to_string())).collect::<Result<_>>()?);
            }
            other => {
                return Err(Error::Invalid(format!("unknown profile entry {other}")));
            }
        }
    }
    if let Some(names) = order {
        if names.len() != classes.len() {
            return Err(Error::Invalid("order must list every class".to_string()));
        }
        let mut reordered = Vec::new();
        for n in &names {
            let idx = classes
                .iter()
                .position(|c| &c.name == n)
                .ok_or_else(|| Error::Invalid(format!("unknown class {n} in order")))?;
            reordered.push(classes[idx].clone());
        }
        classes = reordered;
    } else {
        classes.sort_by(|a, b| a.atoms.cmp(&b.atoms));
    }
    Ok(AtomProfile { classes, provenance: BTreeMap::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_with(funs: &[&str], consts: &[&str], rels: &[&str]) -> Signature {
        let mut sig = Signature::new();
        sig.add_sort("s", true).unwrap();
        sig.add_relation("lt", &["s", "s"]).unwrap();
        sig.set_order("lt").unwrap();
        for f in funs {
            sig.add_function(f, &["s"], "s").unwrap();
        }
        for c in consts {
            sig.add_constant(c, "s").unwrap();
        }
        for r in rels {
            sig.add_relation(r, &["s"]).unwrap();
        }
        sig
    }

    fn lt(u: &AtomUniverse, a: &AtomTerm, b: &AtomTerm) -> Formula {
        Formula::Rel(u.order.clone(), vec![a.term(&u.sort), b.term(&u.sort)])
    }

    #[test]
    fn universe_counts() {
        // one function, one constant, one unary relation
        let sig = sig_with(&["f"], &["c"], &["P"]);
        let u = atom_universe(&sig).unwrap();
        assert_eq!(u.terms.len(), 2);
        // element: P(x), x=c, x<c, c<x; image: same 4 over f(x);
        // mixed: x<f, f<x, x=f
        assert_eq!(u.element_atoms.len(), 4);
        assert_eq!(u.atoms.len(), 11);
    }

    /// A single summary class whose terms are ordered f < g < x < h and all
    /// targets are the class itself.
    fn chain_profile(u: &AtomUniverse) -> AtomProfile {
        let f = AtomTerm::F("f".into());
        let g = AtomTerm::F("g".into());
        let h = AtomTerm::F("h".into());
        let x = AtomTerm::X;
        let mut atoms = BTreeSet::new();
        for (a, b) in [
            (&f, &g),
            (&f, &x),
            (&f, &h),
            (&g, &x),
            (&g, &h),
            (&x, &h),
        ] {
            atoms.insert(lt(u, a, b));
        }
        AtomProfile {
            classes: vec![ProfileClass { name: "n0".into(), atoms }],
            provenance: BTreeMap::new(),
        }
    }

    #[test]
    fn line_offsets_follow_the_chain() {
        let sig = sig_with(&["f", "g", "h"], &[], &[]);
        let u = atom_universe(&sig).unwrap();
        let p = chain_profile(&u);
        assert!(validate_profile(&p, Flavor::Tot, &u).member);
        let s = construct(&p, Flavor::Tot, &u).unwrap();
        let x1 = Term::var("x1", "int");
        let plus = |k: i64| Term::App("+".into(), vec![x1.clone(), Term::Int(k)]);
        assert_eq!(s.functions["f"][&vec!["n0".to_string()]].1, plus(-2));
        assert_eq!(s.functions["g"][&vec!["n0".to_string()]].1, plus(-1));
        assert_eq!(s.functions["h"][&vec!["n0".to_string()]].1, plus(1));
    }

    /// Three summary classes between four tree-ordered constants: the root
    /// c0 sits below everything; c1 and c2 close off two of the classes.
    fn forked_profile(u: &AtomUniverse) -> AtomProfile {
        let x = Term::var(BOUND_VAR, &u.sort);
        let ca = |c: &str| {
            Formula::Rel(u.order.clone(), vec![x.clone(), Term::Const(c.to_string())])
        };
        let cb = |c: &str| {
            Formula::Rel(u.order.clone(), vec![Term::Const(c.to_string()), x.clone()])
        };
        let eqc = |c: &str| Formula::Eq(x.clone(), Term::Const(c.to_string()));
        let s1: BTreeSet<Formula> = [cb("c0"), ca("c1")].into_iter().collect();
        let s2: BTreeSet<Formula> = [cb("c0"), ca("c1"), ca("c2")].into_iter().collect();
        let s3: BTreeSet<Formula> = [cb("c0"), ca("c3")].into_iter().collect();
        let r0: BTreeSet<Formula> =
            [eqc("c0"), ca("c1"), ca("c2"), ca("c3")].into_iter().collect();
        let r1: BTreeSet<Formula> = [eqc("c1"), cb("c0")].into_iter().collect();
        let r2: BTreeSet<Formula> = [eqc("c2"), cb("c0")].into_iter().collect();
        let r3: BTreeSet<Formula> = [eqc("c3"), cb("c0")].into_iter().collect();
        let classes = vec![
            ("s1", s1),
            ("s2", s2),
            ("s3", s3),
            ("r0", r0),
            ("r1", r1),
            ("r2", r2),
            ("r3", r3),
        ];
        AtomProfile {
            classes: classes
                .into_iter()
                .map(|(n, atoms)| ProfileClass { name: n.into(), atoms })
                .collect(),
            provenance: BTreeMap::new(),
        }
    }

    #[test]
    fn forked_constants_order_summary_segments() {
        let sig = sig_with(&[], &["c0", "c1", "c2", "c3"], &[]);
        let u = atom_universe(&sig).unwrap();
        let p = forked_profile(&u);
        let rep = validate_profile(&p, Flavor::Pref, &u);
        assert!(rep.member, "{:?}", rep.findings);
        let s = construct(&p, Flavor::Pref, &u).unwrap();
        let entry = |a: &str, b: &str| {
            s.relations["lt"]
                .get(&vec![a.to_string(), b.to_string()])
                .cloned()
                .unwrap_or(Formula::False)
        };
        assert_eq!(entry("s2", "s1"), Formula::True);
        assert_eq!(entry("s1", "s2"), Formula::False);
        assert_eq!(entry("s1", "s3"), Formula::False);
        assert_eq!(entry("s3", "s1"), Formula::False);
        assert_eq!(entry("s2", "s3"), Formula::False);
        assert_eq!(entry("s3", "s2"), Formula::False);
    }

    #[test]
    fn spanning_embedding_uses_parent_and_sibling() {
        // f(x) below both x and g(x), which stay incomparable
        let sig = sig_with(&["f", "g"], &[], &[]);
        let u = atom_universe(&sig).unwrap();
        let f = AtomTerm::F("f".into());
        let g = AtomTerm::F("g".into());
        let atoms: BTreeSet<Formula> =
            [lt(&u, &f, &AtomTerm::X), lt(&u, &f, &g)].into_iter().collect();
        let p = AtomProfile {
            classes: vec![ProfileClass { name: "n0".into(), atoms }],
            provenance: BTreeMap::new(),
        };
        let rep = validate_profile(&p, Flavor::Pref, &u);
        assert!(rep.member, "{:?}", rep.findings);
        let s = construct(&p, Flavor::Pref, &u).unwrap();
        let x1 = Term::var("x1", "string");
        assert_eq!(
            s.functions["f"][&vec!["n0".to_string()]].1,
            Term::App("parent".into(), vec![x1.clone()])
        );
        assert_eq!(
            s.functions["g"][&vec!["n0".to_string()]].1,
            Term::App("sibling_2".into(), vec![x1])
        );
    }

    #[test]
    fn progressive_line_verifies() {
        let sig = sig_with(&["f"], &[], &[]);
        let u = atom_universe(&sig).unwrap();
        let atoms: BTreeSet<Formula> =
            [lt(&u, &AtomTerm::X, &AtomTerm::F("f".into()))].into_iter().collect();
        let p = AtomProfile {
            classes: vec![ProfileClass { name: "n0".into(), atoms }],
            provenance: BTreeMap::new(),
        };
        let phi = Formula::forall(
            "y",
            "s",
            Formula::Rel(
                "lt".into(),
                vec![Term::var("y", "s"), Term::App("f".into(), vec![Term::var("y", "s")])],
            ),
        );
        let (s, ok) = construct_and_verify(&p, Flavor::Tot, &u, &phi).unwrap();
        assert!(ok);
        assert_eq!(s.nodes["n0"].bound, Formula::True);
        let (s2, ok2) = construct_and_verify(&p, Flavor::TotProsucc, &u, &phi).unwrap();
        assert!(ok2);
        assert_ne!(s2.nodes["n0"].bound, Formula::True);
    }

    #[test]
    fn regressive_prefix_verifies() {
        let sig = sig_with(&["f"], &[], &[]);
        let u = atom_universe(&sig).unwrap();
        let atoms: BTreeSet<Formula> =
            [lt(&u, &AtomTerm::F("f".into()), &AtomTerm::X)].into_iter().collect();
        let p = AtomProfile {
            classes: vec![ProfileClass { name: "n0".into(), atoms }],
            provenance: BTreeMap::new(),
        };
        let phi = Formula::forall(
            "y",
            "s",
            Formula::Rel(
                "lt".into(),
                vec![Term::App("f".into(), vec![Term::var("y", "s")]), Term::var("y", "s")],
            ),
        );
        let (s, ok) = construct_and_verify(&p, Flavor::PrefRegpred, &u, &phi).unwrap();
        assert!(ok, "expected the all-zero-words structure to verify");
        let x1 = Term::var("x1", "string");
        assert_eq!(
            s.functions["f"][&vec!["n0".to_string()]].1,
            Term::App("parent".into(), vec![x1])
        );
    }

    #[test]
    fn extraction_round_trips() {
        let sig = sig_with(&[], &["c"], &["P"]);
        let mut m = FiniteStructure::new(sig.clone());
        m.domains.insert("s".into(), vec!["e0".into(), "e1".into()]);
        m.constants.insert("c".into(), "e0".into());
        m.relations.insert(
            "lt".into(),
            [vec!["e0".to_string(), "e1".to_string()]].into_iter().collect(),
        );
        m.relations.insert("P".into(), [vec!["e1".to_string()]].into_iter().collect());
        let u = atom_universe(&sig).unwrap();
        let p = extract_profile(&m, &u).unwrap();
        assert_eq!(p.classes.len(), 2);
        let x = Term::var(BOUND_VAR, "s");
        let pinned = p
            .classes
            .iter()
            .find(|c| c.atoms.contains(&Formula::Eq(x.clone(), Term::Const("c".into()))))
            .unwrap();
        assert!(!pinned.atoms.contains(&Formula::Rel("P".into(), vec![x.clone()])));
        // provenance maps both elements, to different classes
        assert_eq!(p.provenance.len(), 2);
        assert_ne!(p.provenance["e0"], p.provenance["e1"]);
        // the profile text round-trips
        let text = print_profile(&p);
        let p2 = parse_profile(&text, &u).unwrap();
        assert_eq!(p2.classes, p.classes);
    }

    #[test]
    fn validation_spots_conflicts() {
        let sig = sig_with(&["f"], &["c"], &[]);
        let u = atom_universe(&sig).unwrap();
        let x = Term::var(BOUND_VAR, "s");
        let eqc = Formula::Eq(x.clone(), Term::Const("c".into()));
        // two classes pin the same constant
        let p = AtomProfile {
            classes: vec![
                ProfileClass { name: "a".into(), atoms: [eqc.clone()].into_iter().collect() },
                ProfileClass {
                    name: "b".into(),
                    atoms: [eqc.clone(), Formula::Rel("lt".into(), vec![x.clone(), Term::App("f".into(), vec![x.clone()])])]
                        .into_iter()
                        .collect(),
                },
            ],
            provenance: BTreeMap::new(),
        };
        let rep = validate_profile(&p, Flavor::Tot, &u);
        assert!(!rep.member);
        assert!(rep.findings.iter().any(|f| f.contains("pinned by 2")));
    }
}
