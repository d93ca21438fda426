//! Canonical printer; output reparses to a structurally equal value.

use crate::re::print_regex;

use super::{Formula, Term};

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Var { name, .. } => name.clone(),
        Term::Const(c) => c.clone(),
        Term::Int(z) => z.to_string(),
        Term::Epsilon => "eps".to_string(),
        Term::Append(inner, l) => format!("(app {} {l})", print_term(inner)),
        Term::Ite(c, a, b) => {
            format!("(ite {} {} {})", print_formula(c), print_term(a), print_term(b))
        }
        Term::App(f, args) => {
            // child_j / sibling_j spell their index as a separate token
            let (head, extra) = match f.split_once('_') {
                Some((base @ ("child" | "sibling"), j)) => {
                    (base.to_string(), Some(j.to_string()))
                }
                _ => (f.clone(), None),
            };
            let mut s = format!("({head}");
            if let Some(j) = extra {
                s.push(' ');
                s.push_str(&j);
            }
            for a in args {
                s.push(' ');
                s.push_str(&print_term(a));
            }
            s.push(')');
            s
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".to_string(),
        Formula::False => "false".to_string(),
        Formula::Rel(r, ts) => {
            let mut s = format!("({r}");
            for t in ts {
                s.push(' ');
                s.push_str(&print_term(t));
            }
            s.push(')');
            s
        }
        Formula::Eq(a, b) => format!("(= {} {})", print_term(a), print_term(b)),
        Formula::ReMatch(r, t) => format!("(re \"{}\" {})", print_regex(r), print_term(t)),
        Formula::Not(g) => format!("(not {})", print_formula(g)),
        Formula::And(gs) => {
            let parts: Vec<String> = gs.iter().map(print_formula).collect();
            format!("(and {})", parts.join(" "))
        }
        Formula::Or(gs) => {
            let parts: Vec<String> = gs.iter().map(print_formula).collect();
            format!("(or {})", parts.join(" "))
        }
        Formula::Implies(a, b) => format!("(=> {} {})", print_formula(a), print_formula(b)),
        Formula::Forall(v, s, body) => format!("(forall ({v} {s}) {})", print_formula(body)),
        Formula::Exists(v, s, body) => format!("(exists ({v} {s}) {})", print_formula(body)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{parse_formula, Signature};
    use crate::sexpr::parse_one;
    use std::collections::BTreeMap;

    fn round_trip(src: &str) {
        let sig = Signature::new();
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), "string".to_string());
        env.insert("y".to_string(), "int".to_string());
        let f = parse_formula(&parse_one(src).unwrap(), &sig, &env).unwrap();
        let printed = print_formula(&f);
        let f2 = parse_formula(&parse_one(&printed).unwrap(), &sig, &env).unwrap();
        assert_eq!(f, f2, "round trip changed the formula: {src} -> {printed}");
    }

    #[test]
    fn printer_round_trips() {
        round_trip("(forall (z int) (< z (+ z 1)))");
        round_trip("(and (prefix x (app x 2)) (re \"1*\" x))");
        round_trip("(= (sibling 2 x) (child 1 (parent x)))");
        round_trip("(or (not (= y 0)) true)");
    }
}

/// Prints signature declarations in the `.fol` declaration syntax.
pub fn print_signature(sig: &crate::fol::Signature) -> String {
    let mut out = String::new();
    for s in &sig.sorts {
        if s.infinite {
            out.push_str(&format!("(sort {} inf)\n", s.name));
        } else {
            out.push_str(&format!("(sort {})\n", s.name));
        }
    }
    for (c, sort) in &sig.constants {
        out.push_str(&format!("(const {c} {sort})\n"));
    }
    for (f, (args, result)) in &sig.functions {
        out.push_str(&format!("(fun {f} ({}) {result})\n", args.join(" ")));
    }
    for (r, args) in &sig.relations {
        out.push_str(&format!("(rel {r} ({}))\n", args.join(" ")));
    }
    if let Some(o) = &sig.order {
        out.push_str(&format!("(order {o})\n"));
    }
    out
}
