//! Defined string operations (last-letter trim, longest zero prefix, and the
//! tree navigation terms built from them), plus the order formula between
//! vertices of the universal tree.
//!
//! The universal tree over the alphabet `0..=l` has three parts: the positive
//! tree (words over `1..=l`, ordered by strict prefix), the negative spine
//! (non-empty words over `0` alone, ordered by reverse prefix, all below the
//! positive tree), and negative branches hanging off the spine (a `0`-block
//! followed by a letter `>= 2` and then letters `>= 1`).

use crate::fol::{Formula, Term, SORT_STRING};
use crate::re::Regex;

/// True for function names this module gives meaning to.
pub fn is_defined_symbol(name: &str) -> bool {
    if name == "trim1" || name == "pref0" || name == "parent" {
        return true;
    }
    for prefix in ["child_", "sibling_"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit());
        }
    }
    false
}

/// For `child_j` / `sibling_j` names, the index `j`.
pub fn defined_index(name: &str) -> Option<u32> {
    for prefix in ["child_", "sibling_"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return rest.parse().ok();
        }
    }
    None
}

fn eq(a: Term, b: Term) -> Formula {
    Formula::Eq(a, b)
}

fn strict_prefix(a: Term, b: Term) -> Formula {
    Formula::Rel("prefix".to_string(), vec![a, b])
}

fn re(r: Regex, t: Term) -> Formula {
    Formula::ReMatch(r, t)
}

fn app(t: Term, letter: u32) -> Term {
    Term::Append(Box::new(t), letter)
}

/// `/0*/`
pub fn zeros() -> Regex {
    Regex::star(Regex::Letter(0))
}

/// `/0+/` — the negative spine.
pub fn neg_spine() -> Regex {
    Regex::plus(Regex::Letter(0))
}

/// `/(1|..|l)*/` — the positive tree (just the root when `l = 0`).
pub fn positive(l: u32) -> Regex {
    if l == 0 {
        Regex::Epsilon
    } else {
        Regex::star(Regex::letter_range(1, l))
    }
}

/// `/0+ (2|..|l) (1|..|l)*/` — negative branches; empty language when `l < 2`.
pub fn neg_branch(l: u32) -> Option<Regex> {
    if l < 2 {
        return None;
    }
    Some(Regex::concat(
        neg_spine(),
        Regex::concat(Regex::letter_range(2, l), positive(l)),
    ))
}

/// Defining formula for `u = trim1(t)`: drop the last letter (identity on the
/// empty word). `max_letter` bounds the alphabet.
pub fn def_trim1(t: &Term, u: &str, max_letter: u32) -> Formula {
    let uvar = || Term::var(u, SORT_STRING);
    let mut cases =
        vec![Formula::and(vec![eq(t.clone(), Term::Epsilon), eq(uvar(), Term::Epsilon)])];
    for d in 0..=max_letter {
        cases.push(eq(t.clone(), app(uvar(), d)));
    }
    Formula::or(cases)
}

/// Defining formula for `u = pref0(t)`: the longest all-zero prefix, except
/// that on the spine itself one zero is dropped (`pref0(0^k) = 0^(k-1)`) and
/// `pref0(eps) = eps`.
pub fn def_pref0(t: &Term, u: &str) -> Formula {
    let uvar = || Term::var(u, SORT_STRING);
    Formula::or(vec![
        Formula::and(vec![eq(t.clone(), Term::Epsilon), eq(uvar(), Term::Epsilon)]),
        Formula::and(vec![
            strict_prefix(uvar(), t.clone()),
            re(zeros(), uvar()),
            strict_prefix(app(uvar(), 0), t.clone()).negate(),
        ]),
    ])
}

/// Defining formula for `u = parent(t)`: append `0` on the (closure of the)
/// negative spine, trim the last letter elsewhere.
pub fn def_parent(t: &Term, u: &str) -> Formula {
    let uvar = || Term::var(u, SORT_STRING);
    Formula::or(vec![
        Formula::and(vec![re(zeros(), t.clone()), eq(uvar(), app(t.clone(), 0))]),
        Formula::and(vec![
            re(zeros(), t.clone()).negate(),
            eq(uvar(), Term::App("trim1".to_string(), vec![t.clone()])),
        ]),
    ])
}

/// Defining formula for `u = child_j(t)`. The first child trims on the
/// negative spine and appends `1` elsewhere; other children append `j`.
pub fn def_child(j: u32, t: &Term, u: &str) -> Formula {
    let uvar = || Term::var(u, SORT_STRING);
    if j == 1 {
        Formula::or(vec![
            Formula::and(vec![
                re(neg_spine(), t.clone()),
                eq(uvar(), Term::App("trim1".to_string(), vec![t.clone()])),
            ]),
            Formula::and(vec![
                re(neg_spine(), t.clone()).negate(),
                eq(uvar(), app(t.clone(), 1)),
            ]),
        ])
    } else {
        eq(uvar(), app(t.clone(), j))
    }
}

/// `t` is a j-th child: on the spine for `j = 1`, last letter `j` otherwise.
pub fn is_child(j: u32, t: &Term) -> Formula {
    if j == 1 {
        re(Regex::star(Regex::alt(Regex::Letter(0), Regex::Letter(1))), t.clone())
    } else {
        eq(t.clone(), app(Term::App("trim1".to_string(), vec![t.clone()]), j))
    }
}

/// Defining formula for `u = sibling_j(t)`: the j-th sibling, except that a
/// j-th child gets the first sibling instead (so the result is never `t`'s
/// own position).
pub fn def_sibling(j: u32, t: &Term, u: &str) -> Formula {
    let uvar = || Term::var(u, SORT_STRING);
    let parent = Term::App("parent".to_string(), vec![t.clone()]);
    Formula::or(vec![
        Formula::and(vec![
            is_child(j, t),
            eq(uvar(), Term::App("child_1".to_string(), vec![parent.clone()])),
        ]),
        Formula::and(vec![
            is_child(j, t).negate(),
            eq(uvar(), Term::App(format!("child_{j}"), vec![parent])),
        ]),
    ])
}

/// Defining formula for `u = f(t)` for any defined symbol `f`.
pub fn definition(name: &str, t: &Term, u: &str, max_letter: u32) -> Option<Formula> {
    match name {
        "trim1" => Some(def_trim1(t, u, max_letter)),
        "pref0" => Some(def_pref0(t, u)),
        "parent" => Some(def_parent(t, u)),
        _ => {
            let j = defined_index(name)?;
            if name.starts_with("child_") {
                Some(def_child(j, t, u))
            } else if name.starts_with("sibling_") {
                Some(def_sibling(j, t, u))
            } else {
                None
            }
        }
    }
}

/// Strict order between two vertices of the universal tree over `0..=l`,
/// as a guarded disjunction: spine below positive tree, prefix order within
/// the positive tree, reverse prefix order within the spine, branch vertices
/// above the spine below their root, prefix order within one branch; all
/// other pairs incomparable.
pub fn beta(x1: &Term, x2: &Term, l: u32) -> Formula {
    let pos = positive(l);
    let sp = neg_spine();
    let rt = |t: &Term| Term::App("pref0".to_string(), vec![t.clone()]);
    let mut cases = vec![
        Formula::and(vec![re(sp.clone(), x1.clone()), re(pos.clone(), x2.clone())]),
        Formula::and(vec![
            re(pos.clone(), x1.clone()),
            re(pos, x2.clone()),
            strict_prefix(x1.clone(), x2.clone()),
        ]),
        Formula::and(vec![
            re(sp.clone(), x1.clone()),
            re(sp.clone(), x2.clone()),
            strict_prefix(x2.clone(), x1.clone()),
        ]),
    ];
    if let Some(br) = neg_branch(l) {
        // a spine vertex precedes every branch hanging at it or at a longer
        // spine word, so the root comparison is non-strict
        cases.push(Formula::and(vec![
            re(sp, x1.clone()),
            re(br.clone(), x2.clone()),
            Formula::or(vec![
                strict_prefix(rt(x2), x1.clone()),
                eq(rt(x2), x1.clone()),
            ]),
        ]));
        cases.push(Formula::and(vec![
            re(br.clone(), x1.clone()),
            re(br, x2.clone()),
            eq(rt(x1), rt(x2)),
            strict_prefix(x1.clone(), x2.clone()),
        ]));
    }
    Formula::or(cases)
}

/// Direct evaluation of a defined symbol on a ground word.
pub fn eval_defined(name: &str, w: &[u32]) -> Option<Vec<u32>> {
    let trim = |w: &[u32]| w[..w.len().saturating_sub(1)].to_vec();
    let push = |w: &[u32], d: u32| {
        let mut v = w.to_vec();
        v.push(d);
        v
    };
    let on_spine = |w: &[u32]| w.iter().all(|&d| d == 0); // includes the root
    match name {
        "trim1" => Some(trim(w)),
        "pref0" => {
            if on_spine(w) {
                Some(trim(w))
            } else {
                Some(w.iter().take_while(|&&d| d == 0).copied().collect())
            }
        }
        "parent" => Some(if on_spine(w) { push(w, 0) } else { trim(w) }),
        _ => {
            let j = defined_index(name)?;
            if name.starts_with("child_") {
                if j == 1 {
                    Some(if !w.is_empty() && on_spine(w) { trim(w) } else { push(w, 1) })
                } else {
                    Some(push(w, j))
                }
            } else if name.starts_with("sibling_") {
                let is_jth = if j == 1 {
                    w.iter().all(|&d| d <= 1)
                } else {
                    w.last() == Some(&j)
                };
                let p = eval_defined("parent", w)?;
                if is_jth {
                    eval_defined("child_1", &p)
                } else {
                    eval_defined(&format!("child_{j}"), &p)
                }
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defined_symbol_names() {
        assert!(is_defined_symbol("trim1"));
        assert!(is_defined_symbol("child_12"));
        assert!(is_defined_symbol("sibling_2"));
        assert!(!is_defined_symbol("child_"));
        assert!(!is_defined_symbol("succ"));
        assert_eq!(defined_index("child_3"), Some(3));
    }

    #[test]
    fn part_regexes() {
        assert!(positive(2).matches(&[]));
        assert!(positive(2).matches(&[1, 2, 1]));
        assert!(!positive(2).matches(&[0]));
        assert!(neg_spine().matches(&[0, 0]));
        assert!(!neg_spine().matches(&[]));
        let br = neg_branch(2).unwrap();
        assert!(br.matches(&[0, 2]));
        assert!(br.matches(&[0, 0, 2, 1, 1]));
        assert!(!br.matches(&[0, 1]));
        assert!(neg_branch(1).is_none());
    }
}
