//! Benchmarks for the main pipeline stages: theory validity checks, model
//! checking, profile construction, and fragment translation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};

use symstruct::construct::{atom_universe, construct, parse_profile};
use symstruct::fol::{parse_file, Formula, Term, SORT_INT, SORT_STRING};
use symstruct::fragments::{translate_to_osc_star, Flavor};
use symstruct::lia::lia_valid;
use symstruct::strings::str_valid;
use symstruct::symbolic::{model_check, parse_sst};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn prefix_transitivity() -> Formula {
    let v = |n: &str| Term::var(n, SORT_STRING);
    let pre = |a: Term, b: Term| Formula::Rel("prefix".into(), vec![a, b]);
    let fa = |n: &str, f: Formula| Formula::forall(n, SORT_STRING, f);
    fa(
        "x",
        fa(
            "y",
            fa(
                "z",
                Formula::implies(
                    Formula::And(vec![pre(v("x"), v("y")), pre(v("y"), v("z"))]),
                    pre(v("x"), v("z")),
                ),
            ),
        ),
    )
}

fn integer_density_counterexample() -> Formula {
    // invalid over the integers: forces full elimination work
    let v = |n: &str| Term::var(n, SORT_INT);
    let lt = |a: Term, b: Term| Formula::Rel("<".into(), vec![a, b]);
    Formula::forall(
        "x",
        SORT_INT,
        Formula::forall(
            "y",
            SORT_INT,
            Formula::implies(
                lt(v("x"), v("y")),
                Formula::exists(
                    "z",
                    SORT_INT,
                    Formula::And(vec![lt(v("x"), v("z")), lt(v("z"), v("y"))]),
                ),
            ),
        ),
    )
}

fn bench_pipeline(c: &mut Criterion) {
    let trans = prefix_transitivity();
    c.bench_function("str_valid prefix transitivity", |b| {
        b.iter(|| str_valid(&trans, 1).unwrap())
    });

    let density = integer_density_counterexample();
    c.bench_function("lia_valid density counterexample", |b| {
        b.iter(|| lia_valid(&density).unwrap())
    });

    let tree = parse_sst(&fixture("fig_tree.sst"), None).unwrap();
    let irrefl = {
        let folf = parse_file(&fixture("fig_irrefl.fol")).unwrap();
        folf.formula()
    };
    c.bench_function("model check tree irreflexivity", |b| {
        b.iter(|| model_check(&tree, &irrefl).unwrap())
    });

    let chain_sig = parse_file(&fixture("chain_tot.fol")).unwrap().signature;
    let chain_u = atom_universe(&chain_sig).unwrap();
    let chain_p = parse_profile(&fixture("chain_tot.prof"), &chain_u).unwrap();
    c.bench_function("construct chain profile", |b| {
        b.iter(|| construct(&chain_p, Flavor::Tot, &chain_u).unwrap())
    });

    let mut sig = symstruct::fol::Signature::new();
    sig.add_sort("m", false).unwrap();
    sig.add_sort("s", true).unwrap();
    sig.add_relation("lt", &["s", "s"]).unwrap();
    sig.set_order("lt").unwrap();
    sig.add_constant("a", "m").unwrap();
    sig.add_constant("b", "m").unwrap();
    sig.add_relation("Q", &["m", "s"]).unwrap();
    let psi = {
        let e = symstruct::sexpr::parse_all("(exists (u s) (and (Q a u) (Q b u)))").unwrap();
        symstruct::fol::parse_formula(&e[0], &sig, &BTreeMap::new()).unwrap()
    };
    c.bench_function("translate two-sorted sentence", |b| {
        b.iter(|| translate_to_osc_star(&psi, &sig, 4096).unwrap())
    });
}

criterion_group!(pipeline, bench_pipeline);
criterion_main!(pipeline);
