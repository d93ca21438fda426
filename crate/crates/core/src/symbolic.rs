//! Symbolic structures: finite descriptions of infinite structures where
//! each node carries a theory formula bounding the elements it stands for,
//! and constants, functions and relations are interpreted by theory terms
//! and formulas per node (tuple). Includes well-definedness checking,
//! bounded explication, the model-checking transformation to a theory
//! sentence, and the `.sst` textual format.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fol::{
    parse_formula, parse_signature_decls, parse_term, print_formula, print_term, Formula,
    Signature, Term,
};
use crate::sexpr::{parse_all, Sexpr};
use crate::theory::{Theory, TheoryElement, TheoryId};

/// The free variable of bound formulas.
pub const BOUND_VAR: &str = "x";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub sort: String,
    /// Theory formula in the single free variable `x`.
    pub bound: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicStructure {
    pub theory: Theory,
    pub signature: Signature,
    pub nodes: BTreeMap<String, Node>,
    /// Constant symbol to (node, ground theory term).
    pub constants: BTreeMap<String, (String, Term)>,
    /// Function symbol to a map from argument-node tuples to
    /// (target node, theory term over `x1..xm`).
    pub functions: BTreeMap<String, BTreeMap<Vec<String>, (String, Term)>>,
    /// Relation symbol to a map from node tuples to a theory formula over
    /// `x1..xm`; missing entries mean false.
    pub relations: BTreeMap<String, BTreeMap<Vec<String>, Formula>>,
}

/// The name of the i-th (1-based) argument variable of interpretations.
pub fn arg_var(i: usize) -> String {
    format!("x{i}")
}

impl SymbolicStructure {
    pub fn new(theory: Theory, signature: Signature) -> SymbolicStructure {
        SymbolicStructure {
            theory,
            signature,
            nodes: BTreeMap::new(),
            constants: BTreeMap::new(),
            functions: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    /// Node names of a sort, in name order.
    pub fn nodes_of_sort(&self, sort: &str) -> Vec<&Node> {
        self.nodes.values().filter(|n| n.sort == sort).collect()
    }

    fn node(&self, name: &str) -> Result<&Node> {
        self.nodes
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("unknown node {name}")))
    }

    /// Bound of `n` instantiated at a theory term.
    pub fn bound_at(&self, node: &str, t: &Term) -> Result<Formula> {
        Ok(self.node(node)?.bound.subst_var(BOUND_VAR, t))
    }

    /// All node tuples for the argument sorts of a symbol.
    fn node_tuples(&self, sorts: &[String]) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for s in sorts {
            let names: Vec<String> =
                self.nodes_of_sort(s).iter().map(|n| n.name.clone()).collect();
            let mut next = Vec::new();
            for prefix in &out {
                for n in &names {
                    let mut t = prefix.clone();
                    t.push(n.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    /// Checks satisfiable bounds, constant containment, and that every
    /// function entry maps bounded arguments into the target's bound.
    /// Returns the list of violations (empty means well-defined).
    pub fn check_well_defined(&self) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for sort in &self.signature.sorts {
            if self.nodes_of_sort(&sort.name).is_empty() {
                bad.push(format!("sort {} has no nodes", sort.name));
            }
        }
        for node in self.nodes.values() {
            if !self.signature.has_sort(&node.sort) {
                bad.push(format!("node {}: unknown sort {}", node.name, node.sort));
                continue;
            }
            if !self.theory.sat(&node.bound)? {
                bad.push(format!("node {}: bound is unsatisfiable", node.name));
            }
        }
        for (c, sort) in &self.signature.constants {
            let Some((n, t)) = self.constants.get(c) else {
                bad.push(format!("constant {c} has no interpretation"));
                continue;
            };
            let node = self.node(n)?;
            if &node.sort != sort {
                bad.push(format!("constant {c}: node {n} has sort {}", node.sort));
            }
            if !t.is_ground() {
                bad.push(format!("constant {c}: interpretation term is not ground"));
                continue;
            }
            if !self.theory.valid(&self.bound_at(n, t)?)? {
                bad.push(format!("constant {c}: value escapes the bound of {n}"));
            }
        }
        for (f, (args, result)) in &self.signature.functions {
            let Some(table) = self.functions.get(f) else {
                bad.push(format!("function {f} has no interpretation"));
                continue;
            };
            for tuple in self.node_tuples(args) {
                let Some((n, t)) = table.get(&tuple) else {
                    bad.push(format!("function {f}: missing entry at ({})", tuple.join(" ")));
                    continue;
                };
                let node = self.node(n)?;
                if &node.sort != result {
                    bad.push(format!("function {f}: target {n} has sort {}", node.sort));
                }
                // forall x1..xm. (/\ B(nj)[x -> xj]) -> B(n)[x -> t]
                let mut premises = Vec::new();
                for (j, arg_node) in tuple.iter().enumerate() {
                    premises.push(self.bound_at(
                        arg_node,
                        &Term::var(&arg_var(j + 1), self.theory.sort()),
                    )?);
                }
                let goal =
                    Formula::implies(Formula::and(premises), self.bound_at(n, t)?);
                if !self.theory.valid(&goal)? {
                    bad.push(format!(
                        "function {f}: image escapes the bound of {n} at ({})",
                        tuple.join(" ")
                    ));
                }
            }
        }
        for (r, args) in &self.signature.relations {
            if let Some(table) = self.relations.get(r) {
                for tuple in table.keys() {
                    if tuple.len() != args.len() {
                        bad.push(format!("relation {r}: arity mismatch at ({})", tuple.join(" ")));
                    }
                }
            }
        }
        Ok(bad)
    }
}

/// A bounded sample of the (generally infinite) explicit structure.
#[derive(Debug, Clone)]
pub struct Sample {
    /// Explicit elements `(node, theory element)` in enumeration order.
    pub elements: Vec<(String, TheoryElement)>,
    /// Constant values as element indices; `None` when out of the sample.
    pub constants: BTreeMap<String, Option<usize>>,
    /// Function tables over element indices; `None` images are out of sample.
    pub functions: BTreeMap<String, BTreeMap<Vec<usize>, Option<usize>>>,
    pub relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Sample {
    pub fn index_of(&self, node: &str, e: &TheoryElement) -> Option<usize> {
        self.elements.iter().position(|(n, d)| n == node && d == e)
    }
}

/// Enumerates the explicit elements of every node up to the theory's size
/// bound and evaluates all interpretations over them.
pub fn explicate_sample(s: &SymbolicStructure, bound: usize) -> Result<Sample> {
    let universe = s.theory.enumerate(bound);
    let mut elements = Vec::new();
    for node in s.nodes.values() {
        for e in &universe {
            let mut env = BTreeMap::new();
            env.insert(BOUND_VAR.to_string(), e.clone());
            if s.theory.eval(&node.bound, &env)? {
                elements.push((node.name.clone(), e.clone()));
            }
        }
    }
    let sample_index = |node: &str, e: &TheoryElement| {
        elements.iter().position(|(n, d)| n == node && d == e)
    };

    let mut constants = BTreeMap::new();
    for (c, (n, t)) in &s.constants {
        let v = s.theory.eval_term(t, &BTreeMap::new())?;
        constants.insert(c.clone(), sample_index(n, &v));
    }

    let mut functions = BTreeMap::new();
    for (f, table) in &s.functions {
        let mut out: BTreeMap<Vec<usize>, Option<usize>> = BTreeMap::new();
        let arity = s.signature.functions.get(f).map(|(a, _)| a.len()).unwrap_or(0);
        let idx_tuples = index_tuples(elements.len(), arity);
        for tuple in idx_tuples {
            let arg_nodes: Vec<String> =
                tuple.iter().map(|&i| elements[i].0.clone()).collect();
            let Some((n, t)) = table.get(&arg_nodes) else { continue };
            let mut env = BTreeMap::new();
            for (j, &i) in tuple.iter().enumerate() {
                env.insert(arg_var(j + 1), elements[i].1.clone());
            }
            let v = s.theory.eval_term(t, &env)?;
            out.insert(tuple, sample_index(n, &v));
        }
        functions.insert(f.clone(), out);
    }

    let mut relations = BTreeMap::new();
    for (r, args) in &s.signature.relations {
        let mut set = BTreeSet::new();
        for tuple in index_tuples(elements.len(), args.len()) {
            let arg_nodes: Vec<String> =
                tuple.iter().map(|&i| elements[i].0.clone()).collect();
            let Some(formula) = s.relations.get(r).and_then(|t| t.get(&arg_nodes)) else {
                continue;
            };
            let mut env = BTreeMap::new();
            for (j, &i) in tuple.iter().enumerate() {
                env.insert(arg_var(j + 1), elements[i].1.clone());
            }
            if s.theory.eval(formula, &env)? {
                set.insert(tuple);
            }
        }
        relations.insert(r.clone(), set);
    }

    Ok(Sample { elements, constants, functions, relations })
}

fn index_tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::new();
        for prefix in &out {
            for i in 0..n {
                let mut t = prefix.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

struct McCtx<'a> {
    s: &'a SymbolicStructure,
    counter: usize,
}

impl<'a> McCtx<'a> {
    fn fresh(&mut self) -> String {
        let v = format!("v{}", self.counter);
        self.counter += 1;
        v
    }

    /// Evaluates an object term to a node and the theory term its explicit
    /// element is described by.
    fn term(
        &mut self,
        t: &Term,
        env: &BTreeMap<String, (String, String)>,
    ) -> Result<(String, Term)> {
        match t {
            Term::Var { name, .. } => {
                let (node, tv) = env
                    .get(name)
                    .ok_or_else(|| Error::Invalid(format!("unbound variable {name}")))?;
                Ok((node.clone(), Term::var(tv, self.s.theory.sort())))
            }
            Term::Const(c) => self
                .s
                .constants
                .get(c)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("uninterpreted constant {c}"))),
            Term::App(f, args) => {
                let mut nodes = Vec::new();
                let mut binding = BTreeMap::new();
                for (j, a) in args.iter().enumerate() {
                    let (n, term) = self.term(a, env)?;
                    nodes.push(n);
                    binding.insert(arg_var(j + 1), term);
                }
                let (target, body) = self
                    .s
                    .functions
                    .get(f)
                    .and_then(|table| table.get(&nodes))
                    .ok_or_else(|| {
                        Error::Invalid(format!("function {f} undefined at ({})", nodes.join(" ")))
                    })?
                    .clone();
                Ok((target, body.substitute(&binding)))
            }
            _ => Err(Error::Invalid(format!("theory term in object formula: {t:?}"))),
        }
    }

    fn formula(
        &mut self,
        f: &Formula,
        env: &BTreeMap<String, (String, String)>,
    ) -> Result<Formula> {
        match f {
            Formula::True => Ok(Formula::True),
            Formula::False => Ok(Formula::False),
            Formula::Eq(a, b) => {
                let (na, ta) = self.term(a, env)?;
                let (nb, tb) = self.term(b, env)?;
                if na != nb {
                    Ok(Formula::False)
                } else {
                    Ok(Formula::Eq(ta, tb))
                }
            }
            Formula::Rel(r, ts) => {
                let mut nodes = Vec::new();
                let mut binding = BTreeMap::new();
                for (j, t) in ts.iter().enumerate() {
                    let (n, term) = self.term(t, env)?;
                    nodes.push(n);
                    binding.insert(arg_var(j + 1), term);
                }
                match self.s.relations.get(r).and_then(|table| table.get(&nodes)) {
                    Some(body) => Ok(body.substitute(&binding)),
                    None => Ok(Formula::False),
                }
            }
            Formula::ReMatch(..) => {
                Err(Error::Invalid("regular predicate in object formula".to_string()))
            }
            Formula::Not(g) => Ok(self.formula(g, env)?.negate()),
            Formula::And(gs) => Ok(Formula::and(
                gs.iter().map(|g| self.formula(g, env)).collect::<Result<_>>()?,
            )),
            Formula::Or(gs) => Ok(Formula::or(
                gs.iter().map(|g| self.formula(g, env)).collect::<Result<_>>()?,
            )),
            Formula::Implies(a, b) => {
                Ok(Formula::implies(self.formula(a, env)?, self.formula(b, env)?))
            }
            Formula::Forall(v, sort, body) => {
                let mut parts = Vec::new();
                for node in self.s.nodes_of_sort(sort) {
                    let (name, bound) = (node.name.clone(), node.bound.clone());
                    let xv = self.fresh();
                    let mut env2 = env.clone();
                    env2.insert(v.clone(), (name, xv.clone()));
                    let guard = bound.subst_var(BOUND_VAR, &Term::var(&xv, self.s.theory.sort()));
                    let inner = self.formula(body, &env2)?;
                    parts.push(Formula::forall(
                        &xv,
                        self.s.theory.sort(),
                        Formula::implies(guard, inner),
                    ));
                }
                Ok(Formula::and(parts))
            }
            Formula::Exists(v, sort, body) => {
                let mut parts = Vec::new();
                for node in self.s.nodes_of_sort(sort) {
                    let (name, bound) = (node.name.clone(), node.bound.clone());
                    let xv = self.fresh();
                    let mut env2 = env.clone();
                    env2.insert(v.clone(), (name, xv.clone()));
                    let guard = bound.subst_var(BOUND_VAR, &Term::var(&xv, self.s.theory.sort()));
                    let inner = self.formula(body, &env2)?;
                    parts.push(Formula::exists(
                        &xv,
                        self.s.theory.sort(),
                        Formula::and(vec![guard, inner]),
                    ));
                }
                Ok(Formula::or(parts))
            }
        }
    }
}

/// Transforms an object sentence into an equivalent theory sentence: the
/// explicit structure satisfies `f` iff the result is theory-valid.
pub fn mc_transform(s: &SymbolicStructure, f: &Formula) -> Result<Formula> {
    if !f.is_sentence() {
        return Err(Error::Invalid("model checking requires a sentence".to_string()));
    }
    McCtx { s, counter: 0 }.formula(f, &BTreeMap::new())
}

/// Model checks a sentence against the explicit structure described by `s`.
pub fn model_check(s: &SymbolicStructure, f: &Formula) -> Result<bool> {
    s.theory.valid(&mc_transform(s, f)?)
}

// --- textual format ---

pub fn print_sst(s: &SymbolicStructure) -> String {
    let mut out = String::new();
    match s.theory.id {
        TheoryId::Lia => out.push_str("(theory lia)\n"),
        TheoryId::Str { max_letter } => out.push_str(&format!("(theory str {max_letter})\n")),
    }
    out.push_str(&crate::fol::print_signature(&s.signature));
    for n in s.nodes.values() {
        out.push_str(&format!(
            "(node {} {} (bound {}))\n",
            n.name,
            n.sort,
            print_formula(&n.bound)
        ));
    }
    for (c, (n, t)) in &s.constants {
        out.push_str(&format!("(const {c} {n} {})\n", print_term(t)));
    }
    for (f, table) in &s.functions {
        for (tuple, (n, t)) in table {
            out.push_str(&format!(
                "(fun {f} ({}) {n} {})\n",
                tuple.join(" "),
                print_term(t)
            ));
        }
    }
    for (r, table) in &s.relations {
        for (tuple, body) in table {
            out.push_str(&format!(
                "(rel {r} ({}) {})\n",
                tuple.join(" "),
                print_formula(body)
            ));
        }
    }
    out
}

/// Parses the `.sst` format. Signature declarations (`sort`, `const`, `fun`,
/// `rel`, `order`) may appear inline; alternatively `(signature "FILE")`
/// loads them from a formula file relative to `base_dir`.
pub fn parse_sst(src: &str, base_dir: Option<&std::path::Path>) -> Result<SymbolicStructure> {
    let exprs = parse_all(src)?;
    let mut theory = None;
    let mut decls: Vec<Sexpr> = Vec::new();
    let mut body: Vec<&Sexpr> = Vec::new();
    for e in &exprs {
        let items = e.as_list()?;
        let head = items
            .first()
            .ok_or_else(|| Error::syntax(e.pos(), "empty entry"))?
            .as_atom()?;
        // signature declarations are distinguished from interpretation
        // entries by arity: (const NAME SORT) vs (const NAME NODE TERM),
        // (fun NAME (SORT..) SORT) vs (fun NAME (NODE..) NODE TERM),
        // (rel NAME (SORT..)) vs (rel NAME (NODE..) F)
        match (head, items.len()) {
            ("theory", _) => {
                theory = Some(match items[1].as_atom()? {
                    "lia" => Theory::lia(),
                    "str" => {
                        let m: u32 = items
                            .get(2)
                            .ok_or_else(|| Error::syntax(e.pos(), "missing alphabet size"))?
                            .as_atom()?
                            .parse()
                            .map_err(|_| Error::syntax(e.pos(), "bad alphabet size"))?;
                        Theory::str(m)
                    }
                    other => {
                        return Err(Error::syntax(e.pos(), format!("unknown theory {other}")))
                    }
                });
            }
            ("signature", _) => {
                let path = match &items[1] {
                    Sexpr::Str(s, _) => s.clone(),
                    other => other.as_atom()?.to_string(),
                };
                let full = match base_dir {
                    Some(d) => d.join(&path),
                    None => std::path::PathBuf::from(&path),
                };
                let text = std::fs::read_to_string(&full)?;
                decls.extend(parse_all(&text)?);
            }
            ("sort", _) | ("order", _) | ("const", 3) | ("fun", 4) | ("rel", 3) => {
                decls.push(e.clone());
            }
            _ => body.push(e),
        }
    }
    let theory = theory.ok_or_else(|| Error::Invalid("missing (theory ...)".to_string()))?;
    let signature = parse_signature_decls(&decls)?;
    let mut s = SymbolicStructure::new(theory, signature);

    let theory_sort = s.theory.sort().to_string();
    for e in body {
        let items = e.as_list()?;
        let head = items[0].as_atom()?;
        match head {
            "node" => {
                if items.len() != 4 {
                    return Err(Error::syntax(e.pos(), "expected (node NAME SORT (bound F))"));
                }
                let name = items[1].as_atom()?.to_string();
                let sort = items[2].as_atom()?.to_string();
                let b = items[3].as_list()?;
                if b.len() != 2 || b[0].as_atom()? != "bound" {
                    return Err(Error::syntax(items[3].pos(), "expected (bound F)"));
                }
                let mut env = BTreeMap::new();
                env.insert(BOUND_VAR.to_string(), theory_sort.clone());
                let bound = parse_formula(&b[1], &s.signature, &env)?;
                s.nodes.insert(name.clone(), Node { name, sort, bound });
            }
            "const" => {
                if items.len() != 4 {
                    return Err(Error::syntax(e.pos(), "expected (const NAME NODE TERM)"));
                }
                let name = items[1].as_atom()?.to_string();
                let node = items[2].as_atom()?.to_string();
                let t = parse_term(&items[3], &s.signature, &BTreeMap::new())?;
                s.constants.insert(name, (node, t));
            }
            "fun" => {
                if items.len() != 5 {
                    return Err(Error::syntax(e.pos(), "expected (fun NAME (NODE..) NODE TERM)"));
                }
                let name = items[1].as_atom()?.to_string();
                let tuple: Vec<String> = items[2]
                    .as_list()?
                    .iter()
                    .map(|i| i.as_atom().map(str::to_string))
                    .collect::<Result<_>>()?;
                let node = items[3].as_atom()?.to_string();
                let mut env = BTreeMap::new();
                for j in 1..=tuple.len() {
                    env.insert(arg_var(j), theory_sort.clone());
                }
                let t = parse_term(&items[4], &s.signature, &env)?;
                s.functions.entry(name).or_default().insert(tuple, (node, t));
            }
            "rel" => {
                if items.len() != 4 {
                    return Err(Error::syntax(e.pos(), "expected (rel NAME (NODE..) F)"));
                }
                let name = items[1].as_atom()?.to_string();
                let tuple: Vec<String> = items[2]
                    .as_list()?
                    .iter()
                    .map(|i| i.as_atom().map(str::to_string))
                    .collect::<Result<_>>()?;
                let mut env = BTreeMap::new();
                for j in 1..=tuple.len() {
                    env.insert(arg_var(j), theory_sort.clone());
                }
                let f = parse_formula(&items[3], &s.signature, &env)?;
                s.relations.entry(name).or_default().insert(tuple, f);
            }
            other => {
                return Err(Error::syntax(e.pos(), format!("unexpected entry {other}")));
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::SORT_INT;

    /// One node over the integers with bound x >= 0, a constant at 0 and
    /// successor function.
    fn naturals() -> SymbolicStructure {
        let mut sig = Signature::new();
        sig.add_sort("s", true).unwrap();
        sig.add_constant("z", "s").unwrap();
        sig.add_function("succ", &["s"], "s").unwrap();
        sig.add_relation("lt", &["s", "s"]).unwrap();
        sig.set_order("lt").unwrap();
        let mut s = SymbolicStructure::new(Theory::lia(), sig);
        let x = Term::var(BOUND_VAR, SORT_INT);
        // 0 <= x  encoded as  -1 < x
        let bound = Formula::Rel("<".into(), vec![Term::Int(-1), x]);
        s.nodes.insert("n".into(), Node { name: "n".into(), sort: "s".into(), bound });
        s.constants.insert("z".into(), ("n".into(), Term::Int(0)));
        s.functions.entry("succ".into()).or_default().insert(
            vec!["n".into()],
            (
                "n".into(),
                Term::App("+".into(), vec![Term::var("x1", SORT_INT), Term::Int(1)]),
            ),
        );
        s.relations.entry("lt".into()).or_default().insert(
            vec!["n".into(), "n".into()],
            Formula::Rel("<".into(), vec![Term::var("x1", SORT_INT), Term::var("x2", SORT_INT)]),
        );
        s
    }

    #[test]
    fn naturals_are_well_defined() {
        assert!(naturals().check_well_defined().unwrap().is_empty());
    }

    #[test]
    fn escaping_function_image_is_reported() {
        let mut s = naturals();
        // succ(x) = x - 1 leaves the bound at x = 0
        s.functions.get_mut("succ").unwrap().insert(
            vec!["n".into()],
            (
                "n".into(),
                Term::App("+".into(), vec![Term::var("x1", SORT_INT), Term::Int(-1)]),
            ),
        );
        let bad = s.check_well_defined().unwrap();
        assert!(bad.iter().any(|m| m.contains("succ")), "{bad:?}");
    }

    #[test]
    fn model_checks_sentences() {
        let s = naturals();
        let x = || Term::var("a", "s");
        let y = || Term::var("b", "s");
        // forall a. not lt(a, a)
        let irr = Formula::forall(
            "a",
            "s",
            Formula::Rel("lt".into(), vec![x(), x()]).negate(),
        );
        assert!(model_check(&s, &irr).unwrap());
        // forall a. lt(a, succ(a))
        let prog = Formula::forall(
            "a",
            "s",
            Formula::Rel("lt".into(), vec![x(), Term::App("succ".into(), vec![x()])]),
        );
        assert!(model_check(&s, &prog).unwrap());
        // exists a. forall b. not lt(b, a): zero is minimal
        let min = Formula::exists(
            "a",
            "s",
            Formula::forall("b", "s", Formula::Rel("lt".into(), vec![y(), x()]).negate()),
        );
        assert!(model_check(&s, &min).unwrap());
        // forall a. exists b. lt(b, a) fails at zero
        let pred = Formula::forall(
            "a",
            "s",
            Formula::exists("b", "s", Formula::Rel("lt".into(), vec![y(), x()])),
        );
        assert!(!model_check(&s, &pred).unwrap());
    }

    #[test]
    fn sample_matches_model_checking() {
        let s = naturals();
        let sample = explicate_sample(&s, 3).unwrap();
        // elements are 0..=3
        assert_eq!(sample.elements.len(), 4);
        assert_eq!(sample.constants["z"], Some(0));
        // succ(3) is out of sample
        let last = sample.elements.len() - 1;
        assert_eq!(sample.functions["succ"][&vec![last]], None);
        assert_eq!(sample.functions["succ"][&vec![0]], Some(1));
        assert!(sample.relations["lt"].contains(&vec![0, 2]));
        assert!(!sample.relations["lt"].contains(&vec![2, 2]));
    }

    #[test]
    fn sst_round_trip() {
        let s = naturals();
        let text = print_sst(&s);
        let s2 = parse_sst(&text, None).unwrap();
        assert_eq!(s, s2);
    }
}
