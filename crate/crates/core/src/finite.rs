//! Explicit finite first-order structures with direct evaluation, plus the
//! `.fin` textual format. These are the ground truth for every bounded
//! satisfiability check and for back-translation of models.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fol::{Formula, Signature, Term};
use crate::sexpr::parse_all;

pub type Elem = String;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteStructure {
    pub signature: Signature,
    /// Domain of each sort; element names are globally unique.
    pub domains: BTreeMap<String, Vec<Elem>>,
    pub constants: BTreeMap<String, Elem>,
    pub functions: BTreeMap<String, BTreeMap<Vec<Elem>, Elem>>,
    pub relations: BTreeMap<String, BTreeSet<Vec<Elem>>>,
}

impl FiniteStructure {
    pub fn new(signature: Signature) -> Self {
        FiniteStructure { signature, ..Default::default() }
    }

    pub fn domain(&self, sort: &str) -> &[Elem] {
        self.domains.get(sort).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Checks that every table is total over the declared domains.
    pub fn check_total(&self) -> Result<()> {
        for (c, sort) in &self.signature.constants {
            let e = self
                .constants
                .get(c)
                .ok_or_else(|| Error::Invalid(format!("constant {c} has no value")))?;
            if !self.domain(sort).contains(e) {
                return Err(Error::Invalid(format!("constant {c}: {e} not in sort {sort}")));
            }
        }
        for (f, (args, result)) in &self.signature.functions {
            let table = self
                .functions
                .get(f)
                .ok_or_else(|| Error::Invalid(format!("function {f} has no table")))?;
            for tuple in tuples(&args.iter().map(|s| self.domain(s)).collect::<Vec<_>>()) {
                match table.get(&tuple) {
                    Some(v) if self.domain(result).contains(v) => {}
                    Some(v) => {
                        return Err(Error::Invalid(format!(
                            "function {f}{tuple:?} = {v} outside sort {result}"
                        )))
                    }
                    None => {
                        return Err(Error::Invalid(format!("function {f} undefined at {tuple:?}")))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval_term(&self, t: &Term, env: &BTreeMap<String, Elem>) -> Result<Elem> {
        match t {
            Term::Var { name, .. } => env
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("unbound variable {name}"))),
            Term::Const(c) => self
                .constants
                .get(c)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("uninterpreted constant {c}"))),
            Term::App(f, args) => {
                let vals: Vec<Elem> =
                    args.iter().map(|a| self.eval_term(a, env)).collect::<Result<_>>()?;
                self.functions
                    .get(f)
                    .and_then(|table| table.get(&vals))
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("function {f} undefined at {vals:?}")))
            }
            _ => Err(Error::Unsupported(
                "theory terms cannot be evaluated in a finite structure".to_string(),
            )),
        }
    }

    pub fn eval(&self, f: &Formula, env: &BTreeMap<String, Elem>) -> Result<bool> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Rel(r, ts) => {
                let vals: Vec<Elem> =
                    ts.iter().map(|t| self.eval_term(t, env)).collect::<Result<_>>()?;
                Ok(self.relations.get(r).map(|set| set.contains(&vals)).unwrap_or(false))
            }
            Formula::Eq(a, b) => Ok(self.eval_term(a, env)? == self.eval_term(b, env)?),
            Formula::ReMatch(..) => Err(Error::Unsupported(
                "regular predicates cannot be evaluated in a finite structure".to_string(),
            )),
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
            Formula::Forall(v, s, body) => {
                for e in self.domain(s) {
                    let mut env2 = env.clone();
                    env2.insert(v.clone(), e.clone());
                    if !self.eval(body, &env2)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(v, s, body) => {
                for e in self.domain(s) {
                    let mut env2 = env.clone();
                    env2.insert(v.clone(), e.clone());
                    if self.eval(body, &env2)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn satisfies(&self, f: &Formula) -> Result<bool> {
        self.eval(f, &BTreeMap::new())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (sort, elems) in &self.domains {
            out.push_str(&format!("(domain {sort}"));
            for e in elems {
                out.push_str(&format!(" {e}"));
            }
            out.push_str(")\n");
        }
        for (c, e) in &self.constants {
            out.push_str(&format!("(const {c} {e})\n"));
        }
        for (f, table) in &self.functions {
            out.push_str(&format!("(fun {f}"));
            for (args, v) in table {
                out.push_str(&format!(" (({}) {v})", args.join(" ")));
            }
            out.push_str(")\n");
        }
        for (r, set) in &self.relations {
            out.push_str(&format!("(rel {r}"));
            for tuple in set {
                out.push_str(&format!(" ({})", tuple.join(" ")));
            }
            out.push_str(")\n");
        }
        out
    }

    pub fn parse(src: &str, signature: &Signature) -> Result<FiniteStructure> {
        let mut m = FiniteStructure::new(signature.clone());
        for e in parse_all(src)? {
            let items = e.as_list()?;
            let head = items
                .first()
                .ok_or_else(|| Error::syntax(e.pos(), "empty entry"))?
                .as_atom()?;
            match head {
                "domain" => {
                    let sort = items[1].as_atom()?.to_string();
                    let elems: Vec<Elem> = items[2..]
                        .iter()
                        .map(|i| i.as_atom().map(str::to_string))
                        .collect::<Result<_>>()?;
                    m.domains.insert(sort, elems);
                }
                "const" => {
                    m.constants
                        .insert(items[1].as_atom()?.to_string(), items[2].as_atom()?.to_string());
                }
                "fun" => {
                    let name = items[1].as_atom()?.to_string();
                    let mut table = BTreeMap::new();
                    for entry in &items[2..] {
                        let pair = entry.as_list()?;
                        if pair.len() != 2 {
                            return Err(Error::syntax(entry.pos(), "expected ((ARGS...) RESULT)"));
                        }
                        let args: Vec<Elem> = pair[0]
                            .as_list()?
                            .iter()
                            .map(|i| i.as_atom().map(str::to_string))
                            .collect::<Result<_>>()?;
                        table.insert(args, pair[1].as_atom()?.to_string());
                    }
                    m.functions.insert(name, table);
                }
                "rel" => {
                    let name = items[1].as_atom()?.to_string();
                    let mut set = BTreeSet::new();
                    for entry in &items[2..] {
                        let tuple: Vec<Elem> = entry
                            .as_list()?
                            .iter()
                            .map(|i| i.as_atom().map(str::to_string))
                            .collect::<Result<_>>()?;
                        set.insert(tuple);
                    }
                    m.relations.insert(name, set);
                }
                other => {
                    return Err(Error::syntax(e.pos(), format!("unknown entry `{other}`")));
                }
            }
        }
        Ok(m)
    }
}

/// Cartesian product of the given domains.
pub fn tuples(domains: &[&[Elem]]) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::new();
        for prefix in &out {
            for e in *d {
                let mut t = prefix.clone();
                t.push(e.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Enumerates all finite structures for `sig` with the given per-sort domain
/// sizes, invoking `visit` on each until it returns `true` (found). Constants
/// are canonicalized under element renaming: the i-th constant of a sort may
/// only take one of the first i+1 elements.
pub fn enumerate_structures<F: FnMut(&FiniteStructure) -> Result<bool>>(
    sig: &Signature,
    sizes: &BTreeMap<String, usize>,
    visit: &mut F,
) -> Result<Option<FiniteStructure>> {
    let mut base = FiniteStructure::new(sig.clone());
    for sort in &sig.sorts {
        let n = *sizes.get(&sort.name).unwrap_or(&1);
        base.domains.insert(
            sort.name.clone(),
            (0..n).map(|i| format!("{}{}", sort_prefix(&sort.name), i)).collect(),
        );
    }

    // choice points: constants, then relations, then functions
    let consts: Vec<(String, String)> =
        sig.constants.iter().map(|(c, s)| (c.clone(), s.clone())).collect();
    let rels: Vec<(String, Vec<String>)> =
        sig.relations.iter().map(|(r, a)| (r.clone(), a.clone())).collect();
    let funs: Vec<(String, (Vec<String>, String))> =
        sig.functions.iter().map(|(f, sig)| (f.clone(), sig.clone())).collect();

    fn fill_consts<F: FnMut(&FiniteStructure) -> Result<bool>>(
        m: &mut FiniteStructure,
        consts: &[(String, String)],
        idx: usize,
        seen_per_sort: &mut BTreeMap<String, usize>,
        rels: &[(String, Vec<String>)],
        funs: &[(String, (Vec<String>, String))],
        visit: &mut F,
    ) -> Result<Option<FiniteStructure>> {
        if idx == consts.len() {
            return fill_rels(m, rels, 0, funs, visit);
        }
        let (name, sort) = &consts[idx];
        let n = m.domain(sort).len();
        // symmetry pruning: only the first (already used + 1) elements
        let used = *seen_per_sort.get(sort).unwrap_or(&0);
        let limit = (used + 1).min(n);
        for i in 0..limit {
            let e = m.domain(sort)[i].clone();
            m.constants.insert(name.clone(), e);
            *seen_per_sort.entry(sort.clone()).or_insert(0) = used.max(i + 1);
            if let Some(found) =
                fill_consts(m, consts, idx + 1, seen_per_sort, rels, funs, visit)?
            {
                return Ok(Some(found));
            }
        }
        seen_per_sort.insert(sort.clone(), used);
        m.constants.remove(name);
        Ok(None)
    }

    fn fill_rels<F: FnMut(&FiniteStructure) -> Result<bool>>(
        m: &mut FiniteStructure,
        rels: &[(String, Vec<String>)],
        idx: usize,
        funs: &[(String, (Vec<String>, String))],
        visit: &mut F,
    ) -> Result<Option<FiniteStructure>> {
        if idx == rels.len() {
            return fill_funs(m, funs, 0, visit);
        }
        let (name, args) = &rels[idx];
        let doms: Vec<&[Elem]> = args.iter().map(|s| m.domain(s)).collect();
        let all = tuples(&doms);
        let k = all.len();
        if k > 24 {
            return Err(Error::Budget(format!("relation {name} has {k} tuples to enumerate")));
        }
        for mask in 0u64..(1 << k) {
            let set: BTreeSet<Vec<Elem>> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| t.clone())
                .collect();
            m.relations.insert(name.clone(), set);
            if let Some(found) = fill_rels(m, rels, idx + 1, funs, visit)? {
                return Ok(Some(found));
            }
        }
        m.relations.remove(name);
        Ok(None)
    }

    fn fill_funs<F: FnMut(&FiniteStructure) -> Result<bool>>(
        m: &mut FiniteStructure,
        funs: &[(String, (Vec<String>, String))],
        idx: usize,
        visit: &mut F,
    ) -> Result<Option<FiniteStructure>> {
        if idx == funs.len() {
            return Ok(if visit(m)? { Some(m.clone()) } else { None });
        }
        let (name, (args, result)) = &funs[idx];
        let doms: Vec<&[Elem]> = args.iter().map(|s| m.domain(s)).collect();
        let inputs = tuples(&doms);
        let outputs: Vec<Elem> = m.domain(result).to_vec();
        let k = inputs.len();
        if outputs.len().pow(k as u32) > 1_000_000 {
            return Err(Error::Budget(format!("function {name} table space too large")));
        }
        let mut choice = vec![0usize; k];
        loop {
            let table: BTreeMap<Vec<Elem>, Elem> = inputs
                .iter()
                .cloned()
                .zip(choice.iter().map(|&i| outputs[i].clone()))
                .collect();
            m.functions.insert(name.clone(), table);
            if let Some(found) = fill_funs(m, funs, idx + 1, visit)? {
                return Ok(Some(found));
            }
            // next assignment
            let mut i = 0;
            loop {
                if i == k {
                    m.functions.remove(name);
                    return Ok(None);
                }
                choice[i] += 1;
                if choice[i] < outputs.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fill_consts(&mut base, &consts, 0, &mut BTreeMap::new(), &rels, &funs, visit)
}

fn sort_prefix(sort: &str) -> String {
    let c = sort.chars().next().unwrap_or('e');
    format!("{}_", c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> FiniteStructure {
        let mut sig = Signature::new();
        sig.add_sort("s", true).unwrap();
        sig.add_constant("c", "s").unwrap();
        sig.add_relation("R", &["s", "s"]).unwrap();
        let mut m = FiniteStructure::new(sig);
        m.domains.insert("s".into(), vec!["a".into(), "b".into()]);
        m.constants.insert("c".into(), "a".into());
        m.relations.insert("R".into(), [vec!["a".to_string(), "b".to_string()]].into());
        m
    }

    #[test]
    fn evaluates_quantifiers() {
        let m = tiny();
        // exists y. R(c, y)
        let f = Formula::exists(
            "y",
            "s",
            Formula::Rel("R".into(), vec![Term::Const("c".into()), Term::var("y", "s")]),
        );
        assert!(m.satisfies(&f).unwrap());
        // forall y. R(c, y) fails at y = a
        let g = Formula::forall(
            "y",
            "s",
            Formula::Rel("R".into(), vec![Term::Const("c".into()), Term::var("y", "s")]),
        );
        assert!(!m.satisfies(&g).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let m = tiny();
        let text = m.to_text();
        let m2 = FiniteStructure::parse(&text, &m.signature).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn enumeration_finds_a_model() {
        let mut sig = Signature::new();
        sig.add_sort("s", true).unwrap();
        sig.add_relation("P", &["s"]).unwrap();
        let mut sizes = BTreeMap::new();
        sizes.insert("s".to_string(), 2usize);
        // exists x. P(x) and exists x. not P(x)
        let f = Formula::and(vec![
            Formula::exists("x", "s", Formula::Rel("P".into(), vec![Term::var("x", "s")])),
            Formula::exists(
                "x",
                "s",
                Formula::Rel("P".into(), vec![Term::var("x", "s")]).negate(),
            ),
        ]);
        let found = enumerate_structures(&sig, &sizes, &mut |m| m.satisfies(&f)).unwrap();
        assert!(found.is_some());
        assert!(found.unwrap().satisfies(&f).unwrap());
    }
}
