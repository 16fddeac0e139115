use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::{HarnessConfig, Suite, Trial, TrialCtx};
use crate::classes::{MembershipVerdict, Status};
use crate::decomposition::{nilpotent2_canonical, root_decompose, BlockLabel};
use crate::generators::{
    ginibre, jordan_nilpotent, k_quasi_member, normaloid_counterexample, random_normal, random_normal_annulus,
    random_unitary, root_of_scalar_instance, rr_instance, KQuasiSpec, RrSpec,
};
use crate::linalg::{self, c, psd_defect, ComplexMatrix, C64};
use crate::rng::{self, Stream};
use crate::{Error, Result};

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const NORMAL_COLLAPSE: &str =
    "in finite dimension this hypothesis class coincides with the normal matrices, so the implication holds vacuously";

pub(super) fn registry() -> Vec<Suite> {
    vec![
        Suite {
            id: "stampfli",
            summary: "hyponormal T with T^n normal is normal",
            notes: &[NORMAL_COLLAPSE],
            dim_cap: None,
            run: stampfli,
            params: params_n,
        },
        Suite {
            id: "quasinormal-root",
            summary: "quasinormal T with T^n normal is normal; ker T* ⊆ ker T",
            notes: &[NORMAL_COLLAPSE],
            dim_cap: None,
            run: quasinormal_root,
            params: params_n,
        },
        Suite {
            id: "ando",
            summary: "paranormal T with T^n normal is normal; normaloid does not suffice",
            notes: &[
                NORMAL_COLLAPSE,
                "trial 0 and a share of later trials use the normaloid counterexample M ⊕ N and record whether it confirms that the conclusion fails for normaloid operators",
            ],
            dim_cap: None,
            run: ando,
            params: params_n,
        },
        Suite {
            id: "k-paranormal-root",
            summary: "k-paranormal or absolute-k-paranormal T with T^n normal is normal",
            notes: &[NORMAL_COLLAPSE],
            dim_cap: None,
            run: k_paranormal_root,
            params: params_nk,
        },
        Suite {
            id: "scalar-root",
            summary: "T^n = λI with T k-paranormal gives T normal and T* = |λ|^{2/n} λ^{-1} T^{n-1}",
            notes: &[],
            dim_cap: Some(6),
            run: scalar_root,
            params: params_nk,
        },
        Suite {
            id: "k-quasi-decomposition",
            summary: "k-quasi-paranormal T with T^n normal splits as normal ⊕ nilpotent of index ≤ min(n, k+1)",
            notes: &["for n = 2 the nilpotent summand is also brought to the form [[0, C], [0, 0]] ⊕ 0"],
            dim_cap: None,
            run: k_quasi_decomposition,
            params: params_pairs,
        },
        Suite {
            id: "coprime",
            summary: "invertible T with T^m k-paranormal and T^n normal, gcd(m, n) = 1, is normal",
            notes: &[NORMAL_COLLAPSE],
            dim_cap: None,
            run: coprime,
            params: params_coprime,
        },
        Suite {
            id: "embry",
            summary: "quasinormal iff (T*)^j T^j = (T*T)^j for j = 2..=kmax",
            notes: &[],
            dim_cap: None,
            run: embry,
            params: params_embry,
        },
        Suite {
            id: "fuglede-putnam",
            summary: "T commuting with normal N commutes with N*",
            notes: &[],
            dim_cap: None,
            run: fuglede_putnam,
            params: params_none,
        },
        Suite {
            id: "normaloid-criterion",
            summary: "k-quasi-paranormal T with ‖T^{n+1}‖ = ‖T^n‖‖T‖ for some n ≥ k is normaloid",
            notes: &["instances with T^n = 0 are skipped: the identity then holds trivially and carries no information"],
            dim_cap: None,
            run: normaloid_criterion,
            params: params_nk,
        },
    ]
}

pub(super) const SEARCH_Q2: Suite = Suite {
    id: "search-q2",
    summary: "search for paranormal T with T^n quasinormal but T not quasinormal",
    notes: &["informational: candidates are reported as observations and never counted as failures"],
    dim_cap: None,
    run: search_q2,
    params: params_n,
};

fn base_params(cfg: &HarnessConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("min_dim".into(), json!(cfg.min_dim));
    m.insert("max_dim".into(), json!(cfg.max_dim));
    m
}

fn params_none(cfg: &HarnessConfig) -> Result<Value> {
    Ok(Value::Object(base_params(cfg)))
}

fn params_n(cfg: &HarnessConfig) -> Result<Value> {
    let mut m = base_params(cfg);
    m.insert("n".into(), cfg.n.map_or(json!("random in 2..=4"), |n| json!(n)));
    Ok(Value::Object(m))
}

fn params_nk(cfg: &HarnessConfig) -> Result<Value> {
    let mut m = base_params(cfg);
    m.insert("n".into(), cfg.n.map_or(json!("random in 2..=4"), |n| json!(n)));
    m.insert("k".into(), cfg.k.map_or(json!("random in 1..=2"), |k| json!(k)));
    Ok(Value::Object(m))
}

fn params_pairs(cfg: &HarnessConfig) -> Result<Value> {
    let mut m = base_params(cfg);
    m.insert("nk_pairs".into(), json!(cfg.nk_pairs));
    Ok(Value::Object(m))
}

fn params_embry(cfg: &HarnessConfig) -> Result<Value> {
    let mut m = base_params(cfg);
    m.insert("kmax".into(), json!(cfg.kmax));
    Ok(Value::Object(m))
}

fn coprime_mn(cfg: &HarnessConfig) -> (u32, u32) {
    (cfg.m.unwrap_or(2), cfg.n.unwrap_or(3))
}

fn params_coprime(cfg: &HarnessConfig) -> Result<Value> {
    let (m, n) = coprime_mn(cfg);
    if m < 2 || n < 2 || gcd(m, n) != 1 {
        return Err(Error::NonCoprime {
            m: m as usize,
            n: n as usize,
        });
    }
    let mut p = base_params(cfg);
    p.insert("m".into(), json!(m));
    p.insert("n".into(), json!(n));
    p.insert("k".into(), json!(cfg.k.unwrap_or(1)));
    Ok(Value::Object(p))
}

fn pick(s: &mut Stream, lo: usize, hi: usize) -> usize {
    rng::uniform_index(s, lo, hi)
}

fn root_order(ctx: &TrialCtx, s: &mut Stream) -> u32 {
    ctx.cfg.n.unwrap_or_else(|| pick(s, 2, 4) as u32)
}

fn k_param(ctx: &TrialCtx, s: &mut Stream) -> u32 {
    ctx.cfg.k.unwrap_or_else(|| pick(s, 1, 2) as u32)
}

fn residual(v: &MembershipVerdict) -> f64 {
    (-v.defect).max(0.0)
}

fn status_json(v: &MembershipVerdict) -> Value {
    json!({ "status": v.status, "defect": v.defect })
}

/// A generic instance family shared by several suites.
#[derive(Debug, Clone, Copy)]
enum Family {
    Normal,
    NormalWithKernel,
    Jordan,
    Ginibre,
    KQuasi,
    Counterexample,
}

fn build(family: Family, ctx: &TrialCtx, s: &mut Stream) -> Result<(ComplexMatrix, String)> {
    let dim = ctx.dim;
    let seed = ctx.instance_seed(0);
    let family = match family {
        Family::Jordan | Family::KQuasi if dim < 2 => Family::Normal,
        Family::Counterexample if dim < 3 => Family::Normal,
        f => f,
    };
    Ok(match family {
        Family::Normal => (
            random_normal(dim, seed, None)?,
            format!("normal(dim={dim}, seed={seed})"),
        ),
        Family::NormalWithKernel => {
            let zeros = pick(s, 1, dim);
            let mut eig: Vec<C64> = (0..dim).map(|_| rng::annulus_point(s, 0.5, 1.0)).collect();
            for z in eig.iter_mut().take(zeros) {
                *z = c(0.0, 0.0);
            }
            (
                random_normal(dim, seed, Some(&eig))?,
                format!("normal(dim={dim}, zero eigenvalues={zeros}, seed={seed})"),
            )
        }
        Family::Jordan => {
            let index = pick(s, 2, dim);
            (
                jordan_nilpotent(dim, index, seed)?,
                format!("jordan(dim={dim}, index={index}, seed={seed})"),
            )
        }
        Family::Ginibre => (ginibre(dim, seed), format!("ginibre(dim={dim}, seed={seed})")),
        Family::KQuasi => {
            let k = pick(s, 1, 3) as u32;
            let dim_nil = pick(s, 2, dim);
            let mut spec = KQuasiSpec::new(dim - dim_nil, dim_nil, k);
            spec.nil_scale = Some(rng::uniform(s, 0.25, 2.0));
            (
                k_quasi_member(&spec, seed)?,
                format!("k-quasi({}, seed={seed})", serde_json::to_string(&spec).expect("spec")),
            )
        }
        Family::Counterexample => {
            let dim_n = pick(s, 2, dim - 1);
            let dim_m = dim - dim_n;
            (
                normaloid_counterexample(dim_m, dim_n, seed)?,
                format!("counterexample(dim_m={dim_m}, dim_n={dim_n}, seed={seed})"),
            )
        }
    })
}

fn stampfli(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let n = root_order(ctx, &mut s);
    let family = [Family::Normal, Family::Normal, Family::Jordan, Family::Ginibre][pick(&mut s, 0, 3)];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, n={n}"));
    if !ctx.clf.is_hyponormal(&t).is_member() {
        return Ok(trial.skip("not hyponormal"));
    }
    if !ctx.clf.is_power_normal(&t, n).is_member() {
        return Ok(trial.skip("T^n not normal"));
    }
    let v = ctx.clf.is_normal(&t);
    trial.residual("normality", residual(&v));
    trial.check(v.is_member(), "T is not normal");
    Ok(trial)
}

fn quasinormal_root(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let n = root_order(ctx, &mut s);
    let family = [
        Family::Normal,
        Family::NormalWithKernel,
        Family::NormalWithKernel,
        Family::Jordan,
        Family::Ginibre,
        Family::KQuasi,
    ][pick(&mut s, 0, 5)];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, n={n}"));
    if !ctx.clf.is_quasinormal(&t).is_member() {
        return Ok(trial.skip("not quasinormal"));
    }
    if !ctx.clf.is_power_normal(&t, n).is_member() {
        return Ok(trial.skip("T^n not normal"));
    }
    let tol = &ctx.clf.tol;
    let gap = linalg::kernel(&t.adjoint(), tol).containment_gap(&linalg::kernel(&t, tol));
    let v = ctx.clf.is_normal(&t);
    trial.residual("kernel_inclusion", gap);
    trial.residual("normality", residual(&v));
    trial.check(gap <= tol.tol_recon, "ker T* is not contained in ker T");
    trial.check(v.is_member(), "T is not normal");
    Ok(trial)
}

fn ando(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let roll = pick(&mut s, 0, 3);
    if ctx.index == 0 || roll == 0 {
        return ando_counterexample(ctx, &mut s);
    }
    let n = root_order(ctx, &mut s);
    let family = [Family::Normal, Family::Ginibre, Family::Jordan][roll - 1];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, n={n}"));
    if !ctx.clf.is_paranormal(&t)?.is_member() {
        return Ok(trial.skip("not paranormal"));
    }
    if !ctx.clf.is_power_normal(&t, n).is_member() {
        return Ok(trial.skip("T^n not normal"));
    }
    let v = ctx.clf.is_normal(&t);
    trial.residual("normality", residual(&v));
    trial.check(v.is_member(), "T is not normal");
    Ok(trial)
}

fn ando_counterexample(ctx: &TrialCtx, s: &mut Stream) -> Result<Trial> {
    let dim = ctx.dim.max(3);
    let dim_n = pick(s, 2, dim - 1);
    let dim_m = dim - dim_n;
    let n = 2 * pick(s, 1, 2) as u32;
    let seed = ctx.instance_seed(0);
    let t = normaloid_counterexample(dim_m, dim_n, seed)?;
    let mut trial = ctx.trial(format!("counterexample(dim_m={dim_m}, dim_n={dim_n}, seed={seed}), n={n}"));
    let paranormal = ctx.clf.is_paranormal(&t)?;
    let power_normal = ctx.clf.is_power_normal(&t, n);
    let normal = ctx.clf.is_normal(&t);
    let normaloid = ctx.clf.is_normaloid(&t);
    let confirms = paranormal.is_non_member()
        && power_normal.is_member()
        && normal.is_non_member()
        && normaloid.is_member();
    let details: BTreeMap<String, Value> = [
        ("n".to_string(), json!(n)),
        ("paranormal".to_string(), status_json(&paranormal)),
        ("power_normal".to_string(), status_json(&power_normal)),
        ("normal".to_string(), status_json(&normal)),
        ("normaloid".to_string(), status_json(&normaloid)),
        ("confirms_non_extension".to_string(), json!(confirms)),
    ]
    .into_iter()
    .collect();
    trial.observation = Some(("counterexample-confirmation".into(), details));
    trial.residual("power_normality", residual(&power_normal));
    trial.residual("normaloid", residual(&normaloid));
    trial.check(confirms, "normaloid counterexample does not behave as claimed");
    Ok(trial)
}

/// `(‖T* - |λ|^{2/n} λ^{-1} T^{n-1}‖_F, ‖T^n - λI‖_F)`
fn scalar_identity(t: &ComplexMatrix, n: u32, lambda: C64) -> (f64, f64) {
    let dim = t.dim();
    let power = t.power(n).distance(&ComplexMatrix::identity(dim).scale(lambda));
    if lambda.norm() == 0.0 {
        return (t.frobenius_norm(), power);
    }
    let coeff = C64::new(lambda.norm().powf(2.0 / n as f64), 0.0) / lambda;
    let rhs = t.power(n - 1).scale(coeff);
    (t.adjoint().distance(&rhs), power)
}

fn scalar_trial(ctx: &TrialCtx, s: &mut Stream, n: u32, k: u32, zero: bool) -> Result<Trial> {
    let lambda = if zero {
        c(0.0, 0.0)
    } else {
        rng::annulus_point(s, 0.5, 2.0)
    };
    let seed = ctx.instance_seed(0);
    let t = root_of_scalar_instance(ctx.dim, n, lambda, seed)?;
    let mut trial = ctx.trial(format!(
        "scalar-root(dim={}, n={n}, lambda={}{:+}i, seed={seed}), k={k}",
        ctx.dim, lambda.re, lambda.im
    ));
    let absolute = pick(s, 0, 1) == 1;
    let hyp = if absolute {
        ctx.clf.is_absolute_k_paranormal(&t, k)?
    } else {
        ctx.clf.is_k_paranormal(&t, k)?
    };
    let (identity, power) = scalar_identity(&t, n, lambda);
    let v = ctx.clf.is_normal(&t);
    let scale = t.frobenius_norm().max(1.0);
    trial.residual("scalar_identity", identity);
    trial.residual("power_identity", power);
    trial.residual("normality", residual(&v));
    trial.check(hyp.is_member(), "constructed instance fails the paranormality hypothesis");
    trial.check(power <= ctx.clf.tol.tol_recon * scale, "T^n differs from λI");
    trial.check(v.is_member(), "T is not normal");
    trial.check(identity <= ctx.clf.tol.tol_recon * scale, "T* differs from |λ|^{2/n} λ^{-1} T^{n-1}");
    Ok(trial)
}

fn k_paranormal_root(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let n = root_order(ctx, &mut s);
    let k = k_param(ctx, &mut s);
    let roll = pick(&mut s, 0, 5);
    if roll <= 1 || roll == 5 {
        return scalar_trial(ctx, &mut s, n, k, roll == 5);
    }
    let family = [Family::Normal, Family::Ginibre, Family::Jordan][roll - 2];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, n={n}, k={k}"));
    let absolute = pick(&mut s, 0, 1) == 1;
    let hyp = if absolute {
        ctx.clf.is_absolute_k_paranormal(&t, k)?
    } else {
        ctx.clf.is_k_paranormal(&t, k)?
    };
    if !hyp.is_member() {
        return Ok(trial.skip(if absolute { "not absolute-k-paranormal" } else { "not k-paranormal" }));
    }
    if !ctx.clf.is_power_normal(&t, n).is_member() {
        return Ok(trial.skip("T^n not normal"));
    }
    let v = ctx.clf.is_normal(&t);
    trial.residual("normality", residual(&v));
    trial.check(v.is_member(), "T is not normal");
    Ok(trial)
}

fn scalar_root(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let n = root_order(ctx, &mut s);
    let k = k_param(ctx, &mut s);
    let zero = pick(&mut s, 0, 9) == 0;
    scalar_trial(ctx, &mut s, n, k, zero)
}

fn k_quasi_decomposition(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let pairs = &ctx.cfg.nk_pairs;
    let (n, k) = pairs[ctx.index % pairs.len()];
    let dim = ctx.dim;
    let seed = ctx.instance_seed(0);
    let use_rr = n == 2 && k >= 1 && dim >= 2 && pick(&mut s, 0, 2) == 0;
    let (t, name, expected_nil, rr_c) = if use_rr {
        let dim_b = pick(&mut s, 1, dim / 2);
        let spec = RrSpec {
            dim_a: dim - 2 * dim_b,
            dim_b,
            zero_b: true,
        };
        let inst = rr_instance(&spec, seed)?;
        let name = format!("rr({}, seed={seed})", serde_json::to_string(&spec).expect("spec"));
        (inst.matrix, name, 2 * dim_b, Some(inst.c))
    } else {
        let dim_nil = pick(&mut s, 0, dim);
        let mut spec = KQuasiSpec::new(dim - dim_nil, dim_nil, k);
        spec.max_index = Some(n as usize);
        spec.nil_scale = Some(rng::uniform(&mut s, 0.25, 2.0));
        let name = format!("k-quasi({}, seed={seed})", serde_json::to_string(&spec).expect("spec"));
        (k_quasi_member(&spec, seed)?, name, dim_nil, None)
    };
    let mut trial = ctx.trial(format!("{name}, n={n}, k={k}"));
    let d = match root_decompose(&t, n, k, &ctx.clf) {
        Ok(d) => d,
        Err(e) => {
            trial.check(false, &e.to_string());
            return Ok(trial);
        }
    };
    let tol = ctx.clf.tol;
    let limit = tol.tol_recon;
    trial.residual("reassembly", d.residuals.reassembly);
    trial.residual("normality", d.residuals.normality);
    trial.residual("nilpotency", d.residuals.nilpotency);
    trial.residual("unitarity", d.unitarity_residual());
    trial.check(d.residuals.reassembly <= limit, "reassembly residual too large");
    trial.check(d.residuals.normality <= limit, "normal summand is not normal");
    trial.check(d.residuals.nilpotency <= limit, "nilpotent summand exceeds the index bound");
    trial.check(d.unitarity_residual() <= limit, "change of basis is not unitary");
    trial.check(
        d.dim_of(BlockLabel::NilpotentPart) == expected_nil,
        "nilpotent summand has the wrong dimension",
    );
    if n == 2 {
        if let Some(nil) = d
            .block(BlockLabel::NilpotentPart)
            .filter(|b| b.operator_norm() > tol.tol_rank * t.operator_norm())
        {
            let canon = nilpotent2_canonical(nil, &tol)?;
            let cb = canon.canonical_c.as_ref().expect("canonical block");
            let sv = cb.singular_values();
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            let least = psd_defect(cb, &tol)?;
            trial.residual("canonical_reassembly", canon.residuals.reassembly);
            trial.residual("canonical_unitarity", canon.unitarity_residual());
            trial.check(canon.residuals.reassembly <= limit, "canonical form does not reassemble");
            trial.check(canon.unitarity_residual() <= limit, "canonical basis is not unitary");
            trial.check(tol.is_psd(least, smax), "canonical block C is not positive");
            trial.check(smin > tol.tol_rank * smax, "canonical block C is not injective");
            if let Some(c0) = &rr_c {
                let spectrum = sv
                    .iter()
                    .zip(c0.singular_values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                trial.residual("canonical_spectrum", spectrum);
                trial.check(
                    sv.len() == c0.dim() && spectrum <= limit * smax.max(1.0),
                    "recovered C differs from the generating C",
                );
            }
        }
    }
    Ok(trial)
}

fn coprime(ctx: &TrialCtx) -> Result<Trial> {
    let (m, n) = coprime_mn(ctx.cfg);
    let k = ctx.cfg.k.unwrap_or(1);
    let mut s = ctx.stream(0);
    let dim = ctx.dim;
    let seed = ctx.instance_seed(0);
    let (t, name) = match pick(&mut s, 0, 4) {
        0 | 1 => (
            random_normal_annulus(dim, seed, 0.5, 1.0),
            format!("normal-annulus(dim={dim}, seed={seed})"),
        ),
        2 => {
            let lambda = rng::annulus_point(&mut s, 0.5, 2.0);
            (
                root_of_scalar_instance(dim, n, lambda, seed)?,
                format!("scalar-root(dim={dim}, n={n}, lambda={}{:+}i, seed={seed})", lambda.re, lambda.im),
            )
        }
        3 => build(Family::Ginibre, ctx, &mut s)?,
        _ => build(Family::Counterexample, ctx, &mut s)?,
    };
    let mut trial = ctx.trial(format!("{name}, m={m}, n={n}, k={k}"));
    let sv = t.singular_values();
    if sv[sv.len() - 1] <= ctx.clf.tol.tol_rank * sv[0] {
        return Ok(trial.skip("not invertible"));
    }
    if !ctx.clf.is_k_paranormal(&t.power(m), k)?.is_member() {
        return Ok(trial.skip("T^m not k-paranormal"));
    }
    if !ctx.clf.is_power_normal(&t, n).is_member() {
        return Ok(trial.skip("T^n not normal"));
    }
    let v = ctx.clf.is_normal(&t);
    trial.residual("normality", residual(&v));
    trial.check(v.is_member(), "T is not normal");
    Ok(trial)
}

fn embry(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let family = [
        Family::Normal,
        Family::NormalWithKernel,
        Family::Jordan,
        Family::Ginibre,
        Family::KQuasi,
        Family::Counterexample,
    ][pick(&mut s, 0, 5)];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, kmax={}", ctx.cfg.kmax));
    let q = ctx.clf.is_quasinormal(&t);
    let e = ctx.clf.quasinormal_embry(&t, ctx.cfg.kmax);
    trial.residual("quasinormal", residual(&q));
    trial.residual("embry", residual(&e));
    trial.check(q.status == e.status, "quasinormality and the power identities disagree");
    Ok(trial)
}

fn fuglede_putnam(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let dim = ctx.dim;
    let seed = ctx.instance_seed(0);
    let clusters = pick(&mut s, 1, dim);
    let mut labels: Vec<usize> = (0..dim)
        .map(|j| if j < clusters { j } else { pick(&mut s, 0, clusters - 1) })
        .collect();
    labels.sort_unstable();
    let values: Vec<C64> = (0..clusters).map(|_| rng::annulus_point(&mut s, 0.0, 1.5)).collect();
    let d: Vec<C64> = labels.iter().map(|&l| values[l]).collect();
    let mut b = DMatrix::<C64>::zeros(dim, dim);
    let mut start = 0;
    while start < dim {
        let end = labels[start..].iter().take_while(|&&l| l == labels[start]).count() + start;
        for i in start..end {
            for j in start..end {
                b[(i, j)] = rng::complex_gaussian(&mut s);
            }
        }
        start = end;
    }
    let u = random_unitary(dim, seed);
    let nmat = ComplexMatrix::from_diagonal(&d).conjugate_by(&u);
    let t = ComplexMatrix::new(b)?.conjugate_by(&u);
    let mut trial = ctx.trial(format!("fuglede-putnam(dim={dim}, clusters={clusters}, seed={seed})"));
    let scale = (t.operator_norm() * nmat.operator_norm()).max(1.0);
    let comm = (&t * &nmat).distance(&(&nmat * &t)) / scale;
    let nadj = nmat.adjoint();
    let adj = (&t * &nadj).distance(&(&nadj * &t)) / scale;
    trial.residual("commutator", comm);
    trial.residual("adjoint_commutator", adj);
    trial.check(comm <= ctx.clf.tol.tol_eq, "constructed T does not commute with N");
    trial.check(adj <= ctx.clf.tol.tol_eq, "T does not commute with N*");
    Ok(trial)
}

fn normaloid_criterion(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let k = k_param(ctx, &mut s);
    let family = [
        Family::Normal,
        Family::Counterexample,
        Family::KQuasi,
        Family::KQuasi,
        Family::Jordan,
        Family::Ginibre,
    ][pick(&mut s, 0, 5)];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, k={k}"));
    if !ctx.clf.is_k_quasi_paranormal(&t, k)?.is_member() {
        return Ok(trial.skip("not k-quasi-paranormal"));
    }
    let Some(th) = crate::classes::normalized(&t) else {
        return Ok(trial.skip("T = 0"));
    };
    let tol = ctx.clf.tol;
    let mut degenerate = true;
    let mut witness = None;
    for n in k..=k + 4 {
        let pn = th.power(n).operator_norm();
        if pn <= tol.tol_rank {
            continue;
        }
        degenerate = false;
        let gap = (th.power(n + 1).operator_norm() - pn).abs();
        if gap <= tol.tol_decision * pn {
            witness = Some((n, gap));
            break;
        }
    }
    let Some((n, gap)) = witness else {
        return Ok(trial.skip(if degenerate {
            "T^n = 0 for every n in [k, k+4]"
        } else {
            "norm identity fails for every n in [k, k+4]"
        }));
    };
    let v = ctx.clf.is_normaloid(&t);
    trial.residual("norm_identity", gap);
    trial.residual("normaloid", residual(&v));
    trial.instance_ref.push_str(&format!(", identity at n={n}"));
    trial.check(v.is_member(), "T is not normaloid");
    Ok(trial)
}

fn search_q2(ctx: &TrialCtx) -> Result<Trial> {
    let mut s = ctx.stream(0);
    let n = root_order(ctx, &mut s);
    let family = [Family::Normal, Family::Counterexample, Family::Ginibre, Family::KQuasi][pick(&mut s, 0, 3)];
    let (t, name) = build(family, ctx, &mut s)?;
    let mut trial = ctx.trial(format!("{name}, n={n}"));
    if !ctx.clf.is_paranormal(&t)?.is_member() {
        return Ok(trial.skip("not paranormal"));
    }
    if !ctx.clf.is_quasinormal(&t.power(n)).is_member() {
        return Ok(trial.skip("T^n not quasinormal"));
    }
    let q = ctx.clf.is_quasinormal(&t);
    if q.status != Status::Member {
        let details = [
            ("n".to_string(), json!(n)),
            ("instance".to_string(), json!(trial.instance_ref)),
            ("quasinormal".to_string(), status_json(&q)),
        ]
        .into_iter()
        .collect();
        trial.observation = Some(("q2-candidate".into(), details));
    }
    Ok(trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_values() {
        assert_eq!(gcd(2, 3), 1);
        assert_eq!(gcd(4, 6), 2);
        assert_eq!(gcd(7, 0), 7);
    }

    #[test]
    fn scalar_identity_on_constructed_roots() {
        let lam = c(8.0, 0.0);
        let t = root_of_scalar_instance(3, 3, lam, 1).unwrap();
        let (id, pw) = scalar_identity(&t, 3, lam);
        assert!(id < 1e-12 && pw < 1e-12);
        let z = root_of_scalar_instance(3, 2, c(0.0, 0.0), 1).unwrap();
        assert_eq!(scalar_identity(&z, 2, c(0.0, 0.0)), (0.0, 0.0));
    }
}
