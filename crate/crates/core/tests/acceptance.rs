//! One line per acceptance criterion; the test fails if any line is FAIL.

use conred::selftest::{self, Mode};

const SEED: u64 = 20_261_016;

fn line(n: usize, name: &str, pass: bool, detail: &str) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    if detail.is_empty() {
        println!("criterion {n} {tag} {name}");
    } else {
        println!("criterion {n} {tag} {name}: {detail}");
    }
    pass
}

fn from_verdict(n: usize, v: conred::report::Verdict) -> bool {
    line(n, &v.name, v.pass, v.witness.as_deref().unwrap_or(""))
}

#[test]
fn acceptance() {
    let mode = Mode::Parallel;
    let mut results = Vec::new();

    results.push(from_verdict(1, selftest::index_set_laws()));
    results.push(from_verdict(2, selftest::canonical_isos(SEED, selftest::CANONICAL_ISO_CASES, mode)));

    let (lhs, rhs) = selftest::tensor_counterexample();
    results.push(line(3, "tensor_not_preserved", lhs == 2 && rhs == 1, &format!("dims {lhs} and {rhs}, expected 2 and 1")));

    results.push(from_verdict(4, selftest::cartan_identities(SEED, selftest::CARTAN_CASES, mode)));
    results.push(from_verdict(5, selftest::poisson_reduction()));

    let (v, witness) = selftest::algebroid_equivalences(mode);
    let w = witness.unwrap_or_default();
    results.push(line(6, &v.name, v.pass, v.witness.as_deref().unwrap_or(&w)));

    results.push(from_verdict(7, selftest::reduction_functoriality(SEED, selftest::FUNCTORIALITY_CASES, mode)));

    let count = selftest::DIRAC_CASES;
    let (v, involutive) = selftest::dirac_oracle(SEED, count, mode);
    let both = involutive > 0 && involutive < count;
    let detail = v.witness.clone().unwrap_or_else(|| format!("{involutive}/{count} involutive"));
    results.push(line(8, &v.name, v.pass && both, &detail));

    let count = selftest::MORPHISM_CASES;
    let (v, flat) = selftest::flat_connection(SEED, count, mode);
    let both = flat > 0 && flat < count;
    let detail = v.witness.clone().unwrap_or_else(|| format!("{flat}/{count} with connection_ok"));
    results.push(line(9, &v.name, v.pass && both, &detail));

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &p)| !p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
