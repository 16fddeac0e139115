//! Acceptance criteria, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use opclass::classes::{PencilFamily, DEFAULT_P_LIST};
use opclass::decomposition::nilpotent2_canonical;
use opclass::generators::{
    ginibre, jordan_nilpotent, k_quasi_member, normaloid_counterexample, random_normal, random_unitary,
    root_of_scalar_instance, rr_instance, KQuasiSpec, RrSpec,
};
use opclass::harness::{run_suite, run_theorem, HarnessConfig, SuiteReport, TheoremReport};
use opclass::linalg::hermitian_eigen;
use opclass::{Classifier, ComplexMatrix, Error, Result, Status, C64};

const RESIDUAL_TOL: f64 = 1e-8;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn max_residual(r: &TheoremReport, key: &str) -> f64 {
    r.max_residuals.get(key).copied().unwrap_or(0.0)
}

fn counterexample_reproduction() -> Result<Outcome> {
    let mut worst = Duration::ZERO;
    let mut bad = Vec::new();
    let mut max_res = 0.0f64;
    for seed in 0..20 {
        let start = Instant::now();
        let clf = Classifier::with_seed(seed);
        let t = normaloid_counterexample(2, 2, seed)?;
        let normaloid = clf.is_normaloid(&t);
        let square = clf.is_normal(&t.power(2));
        let normal = clf.is_normal(&t);
        let paranormal = clf.is_k_quasi_paranormal(&t, 0)?;
        worst = worst.max(start.elapsed());
        let norm = t.operator_norm();
        let radius_gap = (norm - t.spectral_radius()).abs() / norm;
        let t2 = t.power(2);
        let commutator = t2.self_commutator().frobenius_norm() / t2.operator_norm().powi(2);
        max_res = max_res.max(radius_gap).max(commutator);
        let ok = normaloid.status == Status::Member
            && square.status == Status::Member
            && normal.status == Status::NonMember
            && paranormal.status == Status::NonMember
            && radius_gap < RESIDUAL_TOL
            && commutator < RESIDUAL_TOL;
        if !ok {
            bad.push(seed);
        }
    }
    let pass = bad.is_empty() && worst < Duration::from_millis(100);
    outcome(
        pass,
        format!("20 seeds, failing {bad:?}, max residual {max_res:.1e}, slowest {:.1} ms", worst.as_secs_f64() * 1e3),
    )
}

fn nilpotent_boundary() -> Result<Outcome> {
    let mut failures = 0;
    let mut total = 0;
    for k in 1..=3u32 {
        for i in 0..30u64 {
            let index = k as usize + 1;
            let dim = index + (i as usize % 4);
            let seed = 1000 * k as u64 + i;
            let t = jordan_nilpotent(dim, index, seed)?;
            let clf = Classifier::with_seed(seed);
            let member = clf.is_k_quasi_paranormal(&t, k)?.status == Status::Member;
            let non_normaloid = clf.is_normaloid(&t).status == Status::NonMember;
            total += 1;
            if !(member && non_normaloid) {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("{total} instances, {failures} failures"))
}

fn oracle_equivalence() -> Result<Outcome> {
    let clf = Classifier::with_seed(5);
    let (mut compared, mut disagree, mut inconclusive, mut total) = (0, 0, 0, 0);
    for seed in 0..200u64 {
        let t = ginibre(5, 50_000 + seed);
        for k in 0..=2u32 {
            let mut families = vec![PencilFamily::KQuasi(k)];
            if k >= 1 {
                families.extend([PencilFamily::KParanormal(k), PencilFamily::AbsoluteK(k)]);
            }
            for family in families {
                total += 1;
                match clf.dual(&t, family) {
                    Err(Error::OracleDisagreement { .. }) => disagree += 1,
                    Err(e) => return Err(e),
                    Ok(d) => {
                        if d.pencil.status == Status::Inconclusive || d.sphere.status == Status::Inconclusive {
                            inconclusive += 1;
                        } else {
                            compared += 1;
                            if d.pencil.status != d.sphere.status {
                                disagree += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let rate = inconclusive as f64 / total as f64;
    outcome(
        disagree == 0 && compared >= 200 && rate < 0.05,
        format!("{compared} compared, {disagree} disagreements, inconclusive {:.1}%", rate * 100.0),
    )
}

fn constructed(i: u64) -> Result<ComplexMatrix> {
    let dim = 2 + (i as usize % 5);
    let seed = 70_000 + i;
    Ok(match i % 8 {
        0 => random_normal(dim, seed, None)?,
        1 => jordan_nilpotent(dim, 2 + (i as usize / 8) % (dim - 1), seed)?,
        2 => normaloid_counterexample(1 + dim / 2, 2, seed)?,
        3 => k_quasi_member(&KQuasiSpec::new(dim / 2, dim - dim / 2, 1 + (i as u32 / 8) % 3), seed)?,
        4 => rr_instance(&RrSpec { dim_a: dim % 2, dim_b: dim / 2, zero_b: i % 16 == 4 }, seed)?.matrix,
        5 => root_of_scalar_instance(dim, 3, C64::new(0.0, 2.0), seed)?,
        6 => random_unitary(dim, seed),
        _ => {
            let j = jordan_nilpotent(dim, dim, seed)?;
            random_normal(2, seed, None)?.direct_sum(&j.scale_real(0.3))
        }
    })
}

fn chain_monotonicity() -> Result<Outcome> {
    let k_list = [1, 2, 3];
    let mut violations = Vec::new();
    let mut errors = 0;
    for i in 0..400u64 {
        let t = if i < 200 { ginibre(2 + (i as usize % 5), 60_000 + i) } else { constructed(i - 200)? };
        let cl = Classifier::with_seed(i).classify_all(&t, &k_list, &DEFAULT_P_LIST);
        if cl.any_error() {
            errors += 1;
        }
        for v in cl.chain_violations {
            violations.push(format!("#{i}: {v}"));
        }
    }
    outcome(
        violations.is_empty() && errors == 0,
        format!("400 matrices, {} violations {:?}, {errors} errors", violations.len(), violations.first()),
    )
}

fn decomposition_theorem() -> Result<Outcome> {
    let cfg = HarnessConfig {
        trials: 50,
        max_dim: 8,
        seed: 2024,
        nk_pairs: vec![(2, 1), (3, 1), (3, 2)],
        ..HarnessConfig::default()
    };
    let r = run_theorem("k-quasi-decomposition", &cfg)?;
    let (re, no, ni) = (
        max_residual(&r, "reassembly"),
        max_residual(&r, "normality"),
        max_residual(&r, "nilpotency"),
    );
    outcome(
        r.ok() && r.passes == 50 && re < RESIDUAL_TOL && no < RESIDUAL_TOL && ni < RESIDUAL_TOL,
        format!(
            "{} passes, {} failures, max reassembly {re:.1e} normality {no:.1e} nilpotency {ni:.1e}",
            r.passes,
            r.failures.len()
        ),
    )
}

fn scalar_root_lemma() -> Result<Outcome> {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut trials = 0;
    for n in 2..=4u32 {
        for k in 1..=2u32 {
            let cfg = HarnessConfig {
                trials: 30,
                max_dim: 6,
                seed: 300 + 10 * n as u64 + k as u64,
                n: Some(n),
                k: Some(k),
                ..HarnessConfig::default()
            };
            let r = run_theorem("scalar-root", &cfg)?;
            let identity = max_residual(&r, "scalar_identity");
            let normality = max_residual(&r, "normality");
            worst = worst.max(identity);
            trials += r.passes;
            pass &= r.ok() && r.passes == 30 && identity < RESIDUAL_TOL && normality <= cfg.tol.tol_eq;
        }
    }
    outcome(pass, format!("{trials} passing trials over 6 (n, k) pairs, max identity residual {worst:.1e}"))
}

fn embry_and_fuglede_putnam() -> Result<Outcome> {
    let cfg = HarnessConfig {
        trials: 200,
        max_dim: 6,
        seed: 77,
        ..HarnessConfig::default()
    };
    let reports = run_suite(&["embry".to_string(), "fuglede-putnam".to_string()], &cfg)?;
    let pass = reports.iter().all(|r| r.ok() && r.passes + r.skips == 200 && r.failures.is_empty());
    let detail = reports
        .iter()
        .map(|r| format!("{}: {} pass {} fail", r.theorem_id, r.passes, r.failures.len()))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

fn canonical_round_trip() -> Result<Outcome> {
    let clf = Classifier::default();
    let mut failures = 0;
    let (mut min_sigma, mut worst_basis, mut worst_spectrum) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..30u64 {
        let dim_b = 1 + (i as usize % 3);
        let spec = RrSpec { dim_a: 0, dim_b, zero_b: true };
        let inst = rr_instance(&spec, 90_000 + i)?;
        let d = nilpotent2_canonical(&inst.matrix, &clf.tol)?;
        let c = d.canonical_c.as_ref().expect("canonical C");
        let least = hermitian_eigen(c, &clf.tol)?.least();
        let sigma = c.singular_values();
        let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        let mut expected = inst.c.singular_values();
        let mut got = sigma.clone();
        expected.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        let spectrum = expected.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let basis = d.residuals.reassembly.max(d.unitarity_residual());
        min_sigma = min_sigma.min(smallest);
        worst_basis = worst_basis.max(basis);
        worst_spectrum = worst_spectrum.max(spectrum);
        let ok = clf.tol.is_psd(least, c.operator_norm())
            && smallest > 0.0
            && basis < RESIDUAL_TOL
            && spectrum < RESIDUAL_TOL
            && c.dim() == dim_b;
        if !ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "30 trials, {failures} failures, min σ(C) {min_sigma:.3}, basis residual {worst_basis:.1e}, spectrum error {worst_spectrum:.1e}"
        ),
    )
}

fn full_verify() -> Result<Outcome> {
    let cfg = HarnessConfig {
        trials: 50,
        max_dim: 8,
        seed: 42,
        ..HarnessConfig::default()
    };
    let start = Instant::now();
    let first = SuiteReport::new(cfg.clone(), run_suite(&["all".to_string()], &cfg)?);
    let elapsed = start.elapsed();
    let second = SuiteReport::new(cfg.clone(), run_suite(&["all".to_string()], &cfg)?);
    let identical = first.canonical().to_json() == second.canonical().to_json();
    outcome(
        first.ok() && first.total_failures == 0 && elapsed < Duration::from_secs(60) && identical,
        format!(
            "{} suites, {} failures, {:.2} s, bit-identical rerun: {identical}",
            first.reports.len(),
            first.total_failures,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("counterexample reproduction", counterexample_reproduction),
        ("nilpotent class boundary", nilpotent_boundary),
        ("oracle equivalence", oracle_equivalence),
        ("chain monotonicity", chain_monotonicity),
        ("decomposition theorem", decomposition_theorem),
        ("scalar-root lemma", scalar_root_lemma),
        ("embry and fuglede-putnam", embry_and_fuglede_putnam),
        ("canonical form round trip", canonical_round_trip),
        ("full verify all", full_verify),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (verdict, detail) = match run() {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} {}. {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
