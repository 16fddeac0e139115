//! Positivity of one-parameter Hermitian pencils over `λ > 0`.
//!
//! A pencil is `P(λ) = Σ_j c_j λ^{e_j} M_j` with Hermitian `M_j`. The check
//! scans `λ_min(P(λ))` on a log-spaced grid and refines the best bracket by
//! golden-section search.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::classes::{band_status, MembershipVerdict, Oracle, Status, Witness};
use crate::linalg::{ComplexMatrix, TolerancePolicy, C64};
use crate::{Error, Result};

pub const GRID_POINTS: usize = 257;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone)]
pub struct PencilTerm {
    pub coeff: f64,
    pub exponent: f64,
    pub matrix: ComplexMatrix,
}

/// Which characterization a pencil encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilFamily {
    /// `T*^{k+2}T^{k+2} - 2ζ T*^{k+1}T^{k+1} + ζ² T*^k T^k`
    KQuasi(u32),
    /// `T*^{k+1}T^{k+1} - (k+1)λ^k T*T + kλ^{k+1}`
    KParanormal(u32),
    /// `T*(T*T)^k T - (k+1)λ^k T*T + kλ^{k+1}`
    AbsoluteK(u32),
}

#[derive(Debug, Clone)]
pub struct PencilSpec {
    terms: Vec<PencilTerm>,
    lambda_lo: f64,
    lambda_max: f64,
}

impl PencilSpec {
    pub fn new(
        terms: Vec<PencilTerm>,
        lambda_lo: f64,
        lambda_max: f64,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidPencil("no terms".into()));
        };
        if !(lambda_max > 0.0 && lambda_lo > 0.0 && lambda_lo < lambda_max) {
            return Err(Error::InvalidPencil(format!(
                "parameter window ({lambda_lo}, {lambda_max}] is not a positive interval"
            )));
        }
        let n = first.matrix.dim();
        for (j, t) in terms.iter().enumerate() {
            if t.matrix.dim() != n {
                return Err(Error::InvalidPencil(format!("term {j} has dimension {}", t.matrix.dim())));
            }
            if !t.matrix.is_hermitian(tol.tol_eq) {
                return Err(Error::InvalidPencil(format!("term {j} is not Hermitian")));
            }
            if !(t.coeff.is_finite() && t.exponent.is_finite()) {
                return Err(Error::InvalidPencil(format!("term {j} has a non-finite coefficient")));
            }
        }
        Ok(Self {
            terms,
            lambda_lo,
            lambda_max,
        })
    }

    /// Pencil of `family` for `t`, on the window `[1e-6·s, 4·s]` with
    /// `s = max(1, ‖T‖²)`.
    pub fn for_family(family: PencilFamily, t: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let n = t.dim();
        let gram = |a: &ComplexMatrix| a.gram();
        let term = |coeff: f64, exponent: f64, matrix: ComplexMatrix| PencilTerm {
            coeff,
            exponent,
            matrix,
        };
        let terms = match family {
            PencilFamily::KQuasi(k) => vec![
                term(1.0, 0.0, gram(&t.power(k + 2))),
                term(-2.0, 1.0, gram(&t.power(k + 1))),
                term(1.0, 2.0, gram(&t.power(k))),
            ],
            PencilFamily::KParanormal(k) => {
                let kf = k as f64;
                vec![
                    term(1.0, 0.0, gram(&t.power(k + 1))),
                    term(-(kf + 1.0), kf, t.gram()),
                    term(kf, kf + 1.0, ComplexMatrix::identity(n)),
                ]
            }
            PencilFamily::AbsoluteK(k) => {
                let kf = k as f64;
                let inner = t.gram().power(k);
                let lead = &(&t.adjoint() * &inner) * t;
                vec![
                    term(1.0, 0.0, lead),
                    term(-(kf + 1.0), kf, t.gram()),
                    term(kf, kf + 1.0, ComplexMatrix::identity(n)),
                ]
            }
        };
        let s = t.operator_norm().powi(2).max(1.0);
        Self::new(terms, 1e-6 * s, 4.0 * s, tol)
    }

    pub fn dim(&self) -> usize {
        self.terms[0].matrix.dim()
    }

    pub fn lambda_window(&self) -> (f64, f64) {
        (self.lambda_lo, self.lambda_max)
    }

    pub fn evaluate(&self, lambda: f64) -> DMatrix<C64> {
        let n = self.dim();
        let mut p = DMatrix::zeros(n, n);
        for t in &self.terms {
            let w = t.coeff * lambda.powf(t.exponent);
            p += t.matrix.as_inner() * C64::new(w, 0.0);
        }
        p
    }

    /// `(λ_min(P(λ)), unit eigenvector)`
    pub fn least_eigenpair(&self, lambda: f64) -> (f64, DVector<C64>) {
        let p = self.evaluate(lambda);
        let h = (&p + p.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let (i, w) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        (w, eig.eigenvectors.column(i).clone_owned())
    }

    /// `⟨P(λ)x, x⟩`
    pub fn quadratic_form(&self, lambda: f64, x: &DVector<C64>) -> f64 {
        (x.adjoint() * self.evaluate(lambda) * x)[(0, 0)].re
    }
}

fn least(p: &PencilSpec, lambda: f64) -> f64 {
    p.least_eigenpair(lambda).0
}

/// Decides `P(λ) ⪰ 0` for all `λ` in the window.
pub fn pencil_check(p: &PencilSpec, tol: &TolerancePolicy) -> MembershipVerdict {
    let (lo, hi) = p.lambda_window();
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&l| least(p, l)).collect();
    let (imin, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");

    let mut a = grid[imin.saturating_sub(1)];
    let mut b = grid[(imin + 1).min(GRID_POINTS - 1)];
    let width = 1e-6 * hi;
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = least(p, x1);
    let mut f2 = least(p, x2);
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = least(p, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = least(p, x2);
        }
    }
    let mut best = (grid[imin], values[imin]);
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let (lambda, _) = best;
    let (defect, vector) = p.least_eigenpair(lambda);
    let mut status = band_status(defect, tol.tol_decision);
    if status == Status::NonMember && p.quadratic_form(lambda, &vector) > -tol.tol_decision {
        status = Status::Inconclusive;
    }
    MembershipVerdict {
        status,
        defect,
        witness: Some(Witness::pencil(lambda, &vector)),
        oracle: Oracle::Pencil,
        seed: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn scalar_square_pencil_is_positive() {
        let zero = ComplexMatrix::zeros(2);
        let terms = vec![
            PencilTerm { coeff: 1.0, exponent: 0.0, matrix: zero.clone() },
            PencilTerm { coeff: -2.0, exponent: 1.0, matrix: zero },
            PencilTerm { coeff: 1.0, exponent: 2.0, matrix: ComplexMatrix::identity(2) },
        ];
        let p = PencilSpec::new(terms, 1e-6, 4.0, &tol()).unwrap();
        let v = pencil_check(&p, &tol());
        assert_eq!(v.status, Status::Member);
        assert!(v.defect >= 0.0);
    }

    #[test]
    fn jordan_paranormal_pencil_fails_near_one() {
        // diag(λ², λ² - 2λ) has least value -1 at λ = 1.
        let j2 = ComplexMatrix::jordan_block(2);
        let p = PencilSpec::for_family(PencilFamily::KQuasi(0), &j2, &tol()).unwrap();
        let v = pencil_check(&p, &tol());
        assert_eq!(v.status, Status::NonMember);
        assert!((v.defect + 1.0).abs() < 1e-9, "{}", v.defect);
        match v.witness {
            Some(Witness::Pencil { lambda, .. }) => assert!((lambda - 1.0).abs() < 1e-4),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn normal_matrices_pass_every_family() {
        let t = crate::generators::random_normal(4, 5, None).unwrap();
        let t = t.scale_real(1.0 / t.operator_norm());
        for fam in [
            PencilFamily::KQuasi(0),
            PencilFamily::KQuasi(2),
            PencilFamily::KParanormal(2),
            PencilFamily::AbsoluteK(3),
        ] {
            let p = PencilSpec::for_family(fam, &t, &tol()).unwrap();
            assert_eq!(pencil_check(&p, &tol()).status, Status::Member, "{fam:?}");
        }
    }

    #[test]
    fn invalid_pencils_are_rejected() {
        let j2 = ComplexMatrix::jordan_block(2);
        let bad = vec![PencilTerm { coeff: 1.0, exponent: 0.0, matrix: j2 }];
        assert!(matches!(PencilSpec::new(bad, 1e-6, 1.0, &tol()), Err(Error::InvalidPencil(_))));
        assert!(matches!(PencilSpec::new(vec![], 1e-6, 1.0, &tol()), Err(Error::InvalidPencil(_))));
        let ok = vec![PencilTerm { coeff: 1.0, exponent: 0.0, matrix: ComplexMatrix::identity(2) }];
        assert!(matches!(PencilSpec::new(ok, 1.0, 0.0, &tol()), Err(Error::InvalidPencil(_))));
    }
}
