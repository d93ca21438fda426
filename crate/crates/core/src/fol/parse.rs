//! Parser for the `.fol` format: signature declarations followed by formulas.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::re::parse_regex;
use crate::sexpr::{parse_all, Sexpr};

use super::{check_formula, Formula, Signature, Term};

/// A parsed `.fol` file: declarations plus the asserted formulas.
#[derive(Debug, Clone)]
pub struct FolFile {
    pub signature: Signature,
    pub formulas: Vec<Formula>,
}

impl FolFile {
    /// The conjunction of all formulas in the file.
    pub fn formula(&self) -> Formula {
        Formula::and(self.formulas.clone())
    }
}

pub fn parse_file(src: &str) -> Result<FolFile> {
    let exprs = parse_all(src)?;
    let mut sig = Signature::new();
    let mut formulas = Vec::new();
    for e in &exprs {
        if is_decl(e) {
            if !formulas.is_empty() {
                return Err(Error::syntax(e.pos(), "declarations must precede formulas"));
            }
            parse_decl(e, &mut sig)?;
        } else {
            let f = parse_formula(e, &sig, &BTreeMap::new())?;
            check_formula(&f, &sig)?;
            formulas.push(f);
        }
    }
    Ok(FolFile { signature: sig, formulas })
}

fn is_decl(e: &Sexpr) -> bool {
    matches!(
        e.as_list().ok().and_then(|l| l.first()).and_then(|h| h.as_atom().ok()),
        Some("sort" | "const" | "fun" | "rel" | "order")
    )
}

/// Parses a sequence of declaration s-expressions into a signature.
pub fn parse_signature_decls(exprs: &[Sexpr]) -> Result<Signature> {
    let mut sig = Signature::new();
    for e in exprs {
        parse_decl(e, &mut sig)?;
    }
    Ok(sig)
}

fn parse_decl(e: &Sexpr, sig: &mut Signature) -> Result<()> {
    let items = e.as_list()?;
    let head = items[0].as_atom()?;
    match head {
        "sort" => match items {
            [_, name] => sig.add_sort(name.as_atom()?, false),
            [_, name, flag] if flag.as_atom()? == "inf" => sig.add_sort(name.as_atom()?, true),
            _ => Err(Error::syntax(e.pos(), "expected (sort NAME [inf])")),
        },
        "const" => match items {
            [_, name, sort] => sig.add_constant(name.as_atom()?, sort.as_atom()?),
            _ => Err(Error::syntax(e.pos(), "expected (const NAME SORT)")),
        },
        "fun" => match items {
            [_, name, args, result] => {
                let args: Vec<&str> =
                    args.as_list()?.iter().map(|a| a.as_atom()).collect::<Result<_>>()?;
                sig.add_function(name.as_atom()?, &args, result.as_atom()?)
            }
            _ => Err(Error::syntax(e.pos(), "expected (fun NAME (SORT...) SORT)")),
        },
        "rel" => match items {
            [_, name, args] => {
                let args: Vec<&str> =
                    args.as_list()?.iter().map(|a| a.as_atom()).collect::<Result<_>>()?;
                sig.add_relation(name.as_atom()?, &args)
            }
            _ => Err(Error::syntax(e.pos(), "expected (rel NAME (SORT...))")),
        },
        "order" => match items {
            [_, name] => sig.set_order(name.as_atom()?),
            _ => Err(Error::syntax(e.pos(), "expected (order NAME)")),
        },
        _ => unreachable!(),
    }
}

/// Parses a formula; `env` carries the sorts of ambient free variables
/// (e.g. the free `x` of a bound formula).
pub fn parse_formula(e: &Sexpr, sig: &Signature, env: &BTreeMap<String, String>) -> Result<Formula> {
    match e {
        Sexpr::Atom(a, pos) => match a.as_str() {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            _ => Err(Error::syntax(*pos, format!("expected a formula, found `{a}`"))),
        },
        Sexpr::Str(_, pos) => Err(Error::syntax(*pos, "expected a formula")),
        Sexpr::List(items, pos) => {
            let head = items
                .first()
                .ok_or_else(|| Error::syntax(*pos, "empty formula"))?
                .as_atom()?;
            match head {
                "forall" | "exists" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, "expected (forall (x SORT) F)"));
                    }
                    let binder = items[1].as_list()?;
                    if binder.len() != 2 {
                        return Err(Error::syntax(items[1].pos(), "expected (x SORT)"));
                    }
                    let var = binder[0].as_atom()?.to_string();
                    let sort = binder[1].as_atom()?.to_string();
                    if !sig.has_sort(&sort) {
                        return Err(Error::sort(&sort, "unknown sort in binder"));
                    }
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), sort.clone());
                    let body = parse_formula(&items[2], sig, &env2)?;
                    Ok(if head == "forall" {
                        Formula::Forall(var, sort, Box::new(body))
                    } else {
                        Formula::Exists(var, sort, Box::new(body))
                    })
                }
                "and" | "or" => {
                    if items.len() < 2 {
                        return Err(Error::syntax(*pos, format!("({head}) needs arguments")));
                    }
                    let fs: Vec<Formula> = items[1..]
                        .iter()
                        .map(|i| parse_formula(i, sig, env))
                        .collect::<Result<_>>()?;
                    Ok(if head == "and" { Formula::And(fs) } else { Formula::Or(fs) })
                }
                "not" => {
                    if items.len() != 2 {
                        return Err(Error::syntax(*pos, "(not F)"));
                    }
                    Ok(Formula::Not(Box::new(parse_formula(&items[1], sig, env)?)))
                }
                "=>" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, "(=> F F)"));
                    }
                    Ok(Formula::Implies(
                        Box::new(parse_formula(&items[1], sig, env)?),
                        Box::new(parse_formula(&items[2], sig, env)?),
                    ))
                }
                "=" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, "(= T T)"));
                    }
                    Ok(Formula::Eq(
                        parse_term(&items[1], sig, env)?,
                        parse_term(&items[2], sig, env)?,
                    ))
                }
                "re" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, "(re \"REGEX\" T)"));
                    }
                    let pat = match &items[1] {
                        Sexpr::Str(s, _) => s,
                        other => {
                            return Err(Error::syntax(other.pos(), "regex must be a string literal"))
                        }
                    };
                    Ok(Formula::ReMatch(parse_regex(pat)?, parse_term(&items[2], sig, env)?))
                }
                name if name == "<" || name == "prefix" || sig.relations.contains_key(name) => {
                    let ts: Vec<Term> = items[1..]
                        .iter()
                        .map(|i| parse_term(i, sig, env))
                        .collect::<Result<_>>()?;
                    Ok(Formula::Rel(name.to_string(), ts))
                }
                other => Err(Error::syntax(*pos, format!("unknown relation `{other}`"))),
            }
        }
    }
}

pub fn parse_term(e: &Sexpr, sig: &Signature, env: &BTreeMap<String, String>) -> Result<Term> {
    match e {
        Sexpr::Atom(a, pos) => {
            if let Some(sort) = env.get(a) {
                return Ok(Term::Var { name: a.clone(), sort: sort.clone() });
            }
            if sig.constants.contains_key(a) {
                return Ok(Term::Const(a.clone()));
            }
            if a == "eps" {
                return Ok(Term::Epsilon);
            }
            if let Ok(z) = a.parse::<i64>() {
                return Ok(Term::Int(z));
            }
            Err(Error::syntax(*pos, format!("unknown symbol `{a}` in term position")))
        }
        Sexpr::Str(_, pos) => Err(Error::syntax(*pos, "expected a term")),
        Sexpr::List(items, pos) => {
            let head = items
                .first()
                .ok_or_else(|| Error::syntax(*pos, "empty term"))?
                .as_atom()?;
            let args = |n: usize| -> Result<Vec<Term>> {
                if items.len() != n + 1 {
                    return Err(Error::syntax(*pos, format!("`{head}` takes {n} argument(s)")));
                }
                items[1..].iter().map(|i| parse_term(i, sig, env)).collect()
            };
            match head {
                "+" => Ok(Term::App("+".into(), args(2)?)),
                "app" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, "(app T LETTER)"));
                    }
                    let t = parse_term(&items[1], sig, env)?;
                    let letter: u32 = items[2]
                        .as_atom()?
                        .parse()
                        .map_err(|_| Error::syntax(items[2].pos(), "letter must be a number"))?;
                    Ok(Term::Append(Box::new(t), letter))
                }
                "ite" => {
                    if items.len() != 4 {
                        return Err(Error::syntax(*pos, "(ite F T T)"));
                    }
                    Ok(Term::Ite(
                        Box::new(parse_formula(&items[1], sig, env)?),
                        Box::new(parse_term(&items[2], sig, env)?),
                        Box::new(parse_term(&items[3], sig, env)?),
                    ))
                }
                "child" | "sibling" => {
                    if items.len() != 3 {
                        return Err(Error::syntax(*pos, format!("({head} J T)")));
                    }
                    let j: u32 = items[1]
                        .as_atom()?
                        .parse()
                        .map_err(|_| Error::syntax(items[1].pos(), "index must be a number"))?;
                    let t = parse_term(&items[2], sig, env)?;
                    Ok(Term::App(format!("{head}_{j}"), vec![t]))
                }
                "parent" | "trim1" | "pref0" => Ok(Term::App(head.to_string(), args(1)?)),
                f if sig.functions.contains_key(f) => Ok(Term::App(f.to_string(), {
                    items[1..].iter().map(|i| parse_term(i, sig, env)).collect::<Result<_>>()?
                })),
                other => Err(Error::syntax(*pos, format!("unknown function `{other}`"))),
            }
        }
    }
}
