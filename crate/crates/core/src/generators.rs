//! Seeded constructors for structured matrices.
//!
//! Each generator is a pure function of its parameters and seed. Random
//! unitaries are Haar-distributed (QR of a complex Ginibre matrix with the
//! phases of `R` folded back into `Q`).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classes::{Classifier, OperatorClass, Status};
use crate::decomposition::rr_assemble;
use crate::linalg::{c, ComplexMatrix, TolerancePolicy, C64};
use crate::rng::{self, Stream};
use crate::{Error, Result};

fn gaussian_matrix(rng: &mut Stream, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| rng::complex_gaussian(rng))
}

fn unitary_from(rng: &mut Stream, n: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    ComplexMatrix::wrap(q)
}

fn normal_from(rng: &mut Stream, eigenvalues: &[C64]) -> ComplexMatrix {
    let u = unitary_from(rng, eigenvalues.len());
    ComplexMatrix::from_diagonal(eigenvalues).conjugate_by(&u)
}

/// Haar-distributed unitary.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    unitary_from(&mut rng::stream(seed, 0), dim.max(1))
}

/// Complex Ginibre matrix scaled by `1/sqrt(dim)`.
pub fn ginibre(dim: usize, seed: u64) -> ComplexMatrix {
    let dim = dim.max(1);
    let m = gaussian_matrix(&mut rng::stream(seed, 0), dim);
    ComplexMatrix::wrap(m).scale_real(1.0 / (dim as f64).sqrt())
}

/// `U diag(λ) U*`; eigenvalues default to uniform draws from the unit disk.
pub fn random_normal(dim: usize, seed: u64, eigenvalues: Option<&[C64]>) -> Result<ComplexMatrix> {
    let mut rng = rng::stream(seed, 0);
    let eig: Vec<C64> = match eigenvalues {
        Some(e) if e.len() != dim => {
            return Err(Error::InvalidSpec(format!(
                "{} eigenvalues given for dimension {dim}",
                e.len()
            )))
        }
        Some(e) => e.to_vec(),
        None => (0..dim).map(|_| rng::annulus_point(&mut rng, 0.0, 1.0)).collect(),
    };
    if dim == 0 {
        return Err(Error::InvalidSpec("dimension must be positive".into()));
    }
    Ok(normal_from(&mut rng, &eig))
}

/// Random normal matrix with eigenvalue moduli in `[rmin, rmax]`.
pub fn random_normal_annulus(dim: usize, seed: u64, rmin: f64, rmax: f64) -> ComplexMatrix {
    let mut rng = rng::stream(seed, 0);
    let eig: Vec<C64> = (0..dim.max(1))
        .map(|_| rng::annulus_point(&mut rng, rmin, rmax))
        .collect();
    normal_from(&mut rng, &eig)
}

fn jordan_sum(sizes: &[usize]) -> ComplexMatrix {
    let blocks: Vec<DMatrix<C64>> = sizes
        .iter()
        .map(|&s| ComplexMatrix::jordan_block(s).into_inner())
        .collect();
    let refs: Vec<&DMatrix<C64>> = blocks.iter().collect();
    ComplexMatrix::wrap(crate::linalg::block_diag(&refs))
}

fn jordan_from(rng: &mut Stream, dim: usize, index: usize) -> Result<ComplexMatrix> {
    if index < 2 || index > dim {
        return Err(Error::InvalidIndex { index, dim });
    }
    let mut sizes = vec![index];
    let mut left = dim - index;
    while left > 0 {
        let s = rng::uniform_index(rng, 1, left.min(index));
        sizes.push(s);
        left -= s;
    }
    let u = unitary_from(rng, dim);
    Ok(jordan_sum(&sizes).conjugate_by(&u))
}

/// Direct sum of Jordan blocks with largest block `index`, conjugated by a
/// random unitary; nil-index exactly `index`.
pub fn jordan_nilpotent(dim: usize, index: usize, seed: u64) -> Result<ComplexMatrix> {
    jordan_from(&mut rng::stream(seed, 0), dim, index)
}

/// `M ⊕ N` with `M` normal (eigenvalue moduli in `[1/2, 1]`), `N² = 0`,
/// and `‖N‖ = ‖M‖/2`.
pub fn normaloid_counterexample(dim_m: usize, dim_n: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim_m < 1 || dim_n < 2 {
        return Err(Error::InvalidSpec(format!(
            "counterexample needs dim_m >= 1 and dim_n >= 2, got {dim_m} and {dim_n}"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let eig: Vec<C64> = (0..dim_m)
        .map(|_| rng::annulus_point(&mut rng, 0.5, 1.0))
        .collect();
    let m = normal_from(&mut rng, &eig);
    let n = jordan_from(&mut rng, dim_n, 2)?;
    let n = n.scale_real(0.5 * m.operator_norm() / n.operator_norm());
    Ok(m.direct_sum(&n))
}

/// `λ^{1/n} V diag(ω_j) V*` with `ω_j` n-th roots of unity, so `T^n = λI`.
pub fn root_of_scalar_instance(dim: usize, n: u32, lambda: C64, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidSpec("root order and dimension must be positive".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let root = if lambda.norm() == 0.0 {
        c(0.0, 0.0)
    } else {
        lambda.powf(1.0 / n as f64)
    };
    let nn = n as usize;
    let offset = rng::uniform_index(&mut rng, 0, nn - 1);
    let eig: Vec<C64> = (0..dim)
        .map(|j| {
            let idx = if j < nn {
                (j + offset) % nn
            } else {
                rng::uniform_index(&mut rng, 0, nn - 1)
            };
            root * C64::from_polar(1.0, std::f64::consts::TAU * idx as f64 / n as f64)
        })
        .collect();
    Ok(normal_from(&mut rng, &eig))
}

/// Parameters of [`k_quasi_member`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KQuasiSpec {
    pub dim_normal: usize,
    pub dim_nil: usize,
    pub k: u32,
    /// Further cap on the nil-index (e.g. `n` when `T^n` must be normal).
    #[serde(default)]
    pub max_index: Option<usize>,
    /// `‖nilpotent block‖ / ‖normal block‖`; default 1.
    #[serde(default)]
    pub nil_scale: Option<f64>,
}

impl KQuasiSpec {
    pub fn new(dim_normal: usize, dim_nil: usize, k: u32) -> Self {
        Self {
            dim_normal,
            dim_nil,
            k,
            max_index: None,
            nil_scale: None,
        }
    }

    /// Nil-index of the nilpotent summand (0 when absent).
    pub fn nil_index(&self) -> usize {
        if self.dim_nil == 0 {
            return 0;
        }
        let cap = (self.k as usize + 1).min(self.dim_nil);
        self.max_index.map_or(cap, |m| cap.min(m)).max(1)
    }
}

/// Normal ⊕ nilpotent (index at most `k+1`), conjugated by a random unitary.
/// The normal summand has eigenvalue moduli in `[1/2, 1]`.
pub fn k_quasi_member(spec: &KQuasiSpec, seed: u64) -> Result<ComplexMatrix> {
    let dim = spec.dim_normal + spec.dim_nil;
    if dim == 0 {
        return Err(Error::InvalidSpec("k-quasi instance needs a positive dimension".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let normal = (spec.dim_normal > 0).then(|| {
        let eig: Vec<C64> = (0..spec.dim_normal)
            .map(|_| rng::annulus_point(&mut rng, 0.5, 1.0))
            .collect();
        normal_from(&mut rng, &eig)
    });
    let nil = if spec.dim_nil == 0 {
        None
    } else if spec.nil_index() < 2 {
        Some(ComplexMatrix::zeros(spec.dim_nil))
    } else {
        let j = jordan_from(&mut rng, spec.dim_nil, spec.nil_index())?;
        let reference = normal.as_ref().map_or(1.0, |m| m.operator_norm());
        let scale = spec.nil_scale.unwrap_or(1.0) * reference / j.operator_norm();
        Some(j.scale_real(scale))
    };
    let t = match (normal, nil) {
        (Some(a), Some(b)) => a.direct_sum(&b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("dimension checked above"),
    };
    let u = unitary_from(&mut rng, dim);
    Ok(t.conjugate_by(&u))
}

/// Parameters of [`rr_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrSpec {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(default)]
    pub zero_b: bool,
}

impl Default for RrSpec {
    fn default() -> Self {
        Self {
            dim_a: 1,
            dim_b: 2,
            zero_b: false,
        }
    }
}

/// A square root of a normal matrix together with its blocks.
#[derive(Debug, Clone)]
pub struct RrInstance {
    pub matrix: ComplexMatrix,
    pub a: Option<ComplexMatrix>,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

/// `A ⊕ [[B, C], [0, -B]]` with `B`, `C` simultaneously diagonal in a shared
/// random basis and `C` positive definite.
pub fn rr_instance(spec: &RrSpec, seed: u64) -> Result<RrInstance> {
    if spec.dim_b == 0 {
        return Err(Error::InvalidSpec("rr instance needs dim_b >= 1".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let a = (spec.dim_a > 0).then(|| {
        let eig: Vec<C64> = (0..spec.dim_a)
            .map(|_| rng::annulus_point(&mut rng, 0.5, 1.0))
            .collect();
        normal_from(&mut rng, &eig)
    });
    let w = unitary_from(&mut rng, spec.dim_b);
    let b_eig: Vec<C64> = (0..spec.dim_b)
        .map(|_| {
            let z = rng::annulus_point(&mut rng, 0.0, 1.0);
            if spec.zero_b {
                c(0.0, 0.0)
            } else {
                z
            }
        })
        .collect();
    let c_eig: Vec<f64> = (0..spec.dim_b).map(|_| rng::uniform(&mut rng, 0.5, 1.5)).collect();
    let b = ComplexMatrix::from_diagonal(&b_eig).conjugate_by(&w);
    let cm = ComplexMatrix::from_real_diagonal(&c_eig).conjugate_by(&w);
    let matrix = rr_assemble(a.as_ref(), &b, &cm, &TolerancePolicy::default())?;
    Ok(RrInstance { matrix, a, b, c: cm })
}

/// Serializable generator request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenKind {
    Unitary { dim: usize },
    Ginibre { dim: usize },
    Normal {
        dim: usize,
        #[serde(default)]
        eigenvalues: Option<Vec<[f64; 2]>>,
    },
    Jordan { dim: usize, index: usize },
    Counterexample { dim_m: usize, dim_n: usize },
    ScalarRoot { dim: usize, n: u32, lambda: [f64; 2] },
    KQuasi(KQuasiSpec),
    Rr(RrSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub kind: GenKind,
    pub seed: u64,
}

/// One advertised property and whether the classifier confirmed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub property: String,
    pub expected: Status,
    pub observed: Status,
    pub defect: f64,
    pub confirmed: bool,
}

impl GenSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GenKind::Unitary { dim }
            | GenKind::Ginibre { dim }
            | GenKind::Normal { dim, .. }
            | GenKind::Jordan { dim, .. }
            | GenKind::ScalarRoot { dim, .. } => *dim,
            GenKind::Counterexample { dim_m, dim_n } => dim_m + dim_n,
            GenKind::KQuasi(s) => s.dim_normal + s.dim_nil,
            GenKind::Rr(s) => s.dim_a + 2 * s.dim_b,
        }
    }

    pub fn generate(&self) -> Result<ComplexMatrix> {
        if self.dim() == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        let seed = self.seed;
        match &self.kind {
            GenKind::Unitary { dim } => Ok(random_unitary(*dim, seed)),
            GenKind::Ginibre { dim } => Ok(ginibre(*dim, seed)),
            GenKind::Normal { dim, eigenvalues } => {
                let eig: Option<Vec<C64>> = eigenvalues
                    .as_ref()
                    .map(|e| e.iter().map(|p| c(p[0], p[1])).collect());
                random_normal(*dim, seed, eig.as_deref())
            }
            GenKind::Jordan { dim, index } => jordan_nilpotent(*dim, *index, seed),
            GenKind::Counterexample { dim_m, dim_n } => normaloid_counterexample(*dim_m, *dim_n, seed),
            GenKind::ScalarRoot { dim, n, lambda } => {
                root_of_scalar_instance(*dim, *n, c(lambda[0], lambda[1]), seed)
            }
            GenKind::KQuasi(s) => k_quasi_member(s, seed),
            GenKind::Rr(s) => Ok(rr_instance(s, seed)?.matrix),
        }
    }

    /// Checks the properties this generator advertises against `t`.
    pub fn certify(&self, t: &ComplexMatrix, clf: &Classifier) -> Result<Vec<Certification>> {
        use Status::*;
        let mut out = Vec::new();
        let mut push = |property: String, expected: Status, observed: Status, defect: f64| {
            out.push(Certification {
                confirmed: expected == observed,
                property,
                expected,
                observed,
                defect,
            });
        };
        let class = |c: OperatorClass| -> Result<(String, Status, f64)> {
            let v = clf.verdict(&c, t)?;
            Ok((c.to_string(), v.status, v.defect))
        };
        let normal_power = |n: u32| {
            let v = clf.is_power_normal(t, n);
            (format!("Normal(T^{n})"), v.status, v.defect)
        };
        let tol = clf.tol;
        match &self.kind {
            GenKind::Unitary { .. } => {
                let resid = t.gram().distance(&ComplexMatrix::identity(t.dim()));
                let st = if resid <= tol.tol_recon { Member } else { NonMember };
                push("Unitary".into(), Member, st, -resid);
                let (p, s, d) = class(OperatorClass::Normal)?;
                push(p, Member, s, d);
            }
            GenKind::Ginibre { .. } => {}
            GenKind::Normal { .. } | GenKind::ScalarRoot { .. } => {
                let (p, s, d) = class(OperatorClass::Normal)?;
                push(p, Member, s, d);
                if let GenKind::ScalarRoot { n, lambda, .. } = &self.kind {
                    let target = ComplexMatrix::identity(t.dim()).scale(c(lambda[0], lambda[1]));
                    let resid = t.power(*n).distance(&target);
                    let st = if tol.is_small(resid, target.frobenius_norm()) { Member } else { NonMember };
                    push(format!("T^{n} = lambda I"), Member, st, -resid);
                }
            }
            GenKind::Jordan { index, .. } => {
                let scale = t.frobenius_norm().max(1.0);
                let top = t.power(*index as u32).frobenius_norm();
                let below = t.power(*index as u32 - 1).frobenius_norm();
                let st = if top <= tol.tol_eq * scale && below > tol.tol_eq * scale {
                    Member
                } else {
                    NonMember
                };
                push(format!("NilIndex({index})"), Member, st, -top);
                let (p, s, d) = class(OperatorClass::KQuasiParanormal(*index as u32 - 1))?;
                push(p, Member, s, d);
            }
            GenKind::Counterexample { .. } => {
                let (p, s, d) = class(OperatorClass::Normaloid)?;
                push(p, Member, s, d);
                let (p, s, d) = normal_power(2);
                push(p, Member, s, d);
                let (p, s, d) = class(OperatorClass::Normal)?;
                push(p, NonMember, s, d);
                let (p, s, d) = class(OperatorClass::KQuasiParanormal(1))?;
                push(p, Member, s, d);
            }
            GenKind::KQuasi(spec) => {
                let (p, s, d) = class(OperatorClass::KQuasiParanormal(spec.k))?;
                push(p, Member, s, d);
                let (p, s, d) = normal_power(spec.nil_index().max(1) as u32);
                push(p, Member, s, d);
            }
            GenKind::Rr(_) => {
                let v = crate::decomposition::rr_check(t, clf);
                push("SquareRootOfNormal".into(), Member, v.status, v.defect);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_examples() {
        let u = random_unitary(1, 4);
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-14);
        for seed in 0..5 {
            let u = random_unitary(6, seed);
            assert!(u.gram().distance(&ComplexMatrix::identity(6)) < 1e-9);
            assert!((u.determinant().norm() - 1.0).abs() < 1e-10);
        }
        assert_eq!(random_unitary(5, 3), random_unitary(5, 3));
        assert_ne!(random_unitary(5, 3), random_unitary(5, 4));
    }

    #[test]
    fn normal_examples() {
        let clf = Classifier::default();
        let t = random_normal(3, 1, Some(&[c(2.0, 1.0); 3])).unwrap();
        assert!(t.distance(&ComplexMatrix::identity(3).scale(c(2.0, 1.0))) < 1e-12);
        let t = random_normal(5, 2, None).unwrap();
        assert!(clf.is_normal(&t).is_member());
        assert!(t.spectral_radius() <= 1.0 + 1e-12);
        let h = random_normal(4, 3, Some(&[c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0), c(3.0, 0.0)])).unwrap();
        assert!(h.is_hermitian(1e-12));
        assert!(random_normal(3, 1, Some(&[c(1.0, 0.0)])).is_err());
    }

    #[test]
    fn jordan_examples() {
        let clf = Classifier::default();
        let j = jordan_nilpotent(2, 2, 5).unwrap();
        assert!(j.power(2).frobenius_norm() < 1e-14);
        assert!((j.operator_norm() - 1.0).abs() < 1e-12);
        for (dim, index) in [(4, 3), (6, 2), (5, 5), (7, 4)] {
            let j = jordan_nilpotent(dim, index, 9).unwrap();
            assert!(j.power(index as u32).frobenius_norm() < 1e-12);
            assert!(j.power(index as u32 - 1).frobenius_norm() > 0.5);
            assert!(clf
                .is_k_quasi_paranormal(&j, index as u32 - 1)
                .unwrap()
                .is_member());
        }
        assert!(matches!(jordan_nilpotent(3, 4, 1), Err(Error::InvalidIndex { .. })));
        assert!(matches!(jordan_nilpotent(3, 1, 1), Err(Error::InvalidIndex { .. })));
    }

    #[test]
    fn counterexample_examples() {
        let clf = Classifier::default();
        let t = normaloid_counterexample(2, 3, 7).unwrap();
        let m = crate::linalg::compress(&t, &crate::linalg::Subspace::coordinate(5, &[0, 1])).unwrap();
        let n = crate::linalg::compress(&t, &crate::linalg::Subspace::coordinate(5, &[2, 3, 4])).unwrap();
        assert!((n.operator_norm() - 0.5 * m.operator_norm()).abs() < 1e-12);
        assert!(clf.is_normaloid(&t).is_member());
        assert!(clf.is_power_normal(&t, 2).is_member());
        assert!(clf.is_normal(&t).is_non_member());
        assert!(clf.is_k_quasi_paranormal(&t, 1).unwrap().is_member());
        assert!(normaloid_counterexample(1, 1, 0).is_err());
    }

    #[test]
    fn scalar_root_examples() {
        let lam = c(0.7, -1.1);
        let t = root_of_scalar_instance(4, 1, lam, 3).unwrap();
        assert!(t.distance(&ComplexMatrix::identity(4).scale(lam)) < 1e-12);
        let t = root_of_scalar_instance(3, 3, c(8.0, 0.0), 1).unwrap();
        assert!(t.power(3).distance(&ComplexMatrix::identity(3).scale(c(8.0, 0.0))) < 1e-11);
        let mut eig = t.eigenvalues();
        eig.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        for (z, want) in eig.iter().zip([-2.0 * std::f64::consts::PI / 3.0, 0.0, 2.0 * std::f64::consts::PI / 3.0]) {
            assert!((z.norm() - 2.0).abs() < 1e-10);
            assert!((z.arg() - want).abs() < 1e-8);
        }
        assert!(Classifier::default().is_normal(&t).is_member());
    }

    #[test]
    fn k_quasi_examples() {
        let clf = Classifier::default();
        let t = k_quasi_member(&KQuasiSpec::new(4, 0, 2), 1).unwrap();
        assert!(clf.is_normal(&t).is_member());
        let t = k_quasi_member(&KQuasiSpec::new(0, 3, 2), 1).unwrap();
        assert!(clf.is_k_quasi_paranormal(&t, 2).unwrap().is_member());
        assert!(t.power(3).frobenius_norm() < 1e-12);
        for seed in 0..10 {
            let spec = KQuasiSpec::new(3, 3, 1);
            let t = k_quasi_member(&spec, seed).unwrap();
            assert!(clf.is_k_quasi_paranormal(&t, 1).unwrap().is_member());
            assert!(clf.is_power_normal(&t, 2).is_member());
        }
    }

    #[test]
    fn rr_examples() {
        let clf = Classifier::default();
        let inst = rr_instance(&RrSpec { dim_a: 0, dim_b: 2, zero_b: true }, 3).unwrap();
        assert!(inst.matrix.power(2).frobenius_norm() < 1e-14);
        for seed in 0..10 {
            let inst = rr_instance(&RrSpec { dim_a: 2, dim_b: 2, zero_b: false }, seed).unwrap();
            assert!(crate::decomposition::rr_check(&inst.matrix, &clf).is_member());
        }
    }

    #[test]
    fn genspec_round_trip_and_certification() {
        let clf = Classifier::default();
        let specs = [
            r#"{"kind":"counterexample","dim_m":2,"dim_n":2,"seed":7}"#,
            r#"{"kind":"jordan","dim":4,"index":3,"seed":1}"#,
            r#"{"kind":"rr","dim_a":1,"dim_b":2,"seed":3}"#,
            r#"{"kind":"scalar-root","dim":3,"n":3,"lambda":[8.0,0.0],"seed":2}"#,
            r#"{"kind":"k-quasi","dim_normal":2,"dim_nil":2,"k":1,"seed":5}"#,
            r#"{"kind":"unitary","dim":3,"seed":5}"#,
            r#"{"kind":"normal","dim":3,"seed":5}"#,
        ];
        for s in specs {
            let spec = GenSpec::from_json(s).unwrap();
            let back: GenSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(back, spec);
            let t = spec.generate().unwrap();
            assert_eq!(t, spec.generate().unwrap());
            let certs = spec.certify(&t, &clf).unwrap();
            assert!(!certs.is_empty());
            assert!(certs.iter().all(|c| c.confirmed), "{s}: {certs:?}");
        }
    }
}
