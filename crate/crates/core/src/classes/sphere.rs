//! Minimization of a defect function over the complex unit sphere.
//!
//! Projected (Riemannian) gradient descent with Armijo backtracking and
//! renormalization as the retraction. Objectives may supply an exact
//! gradient; otherwise it is estimated by central differences in the real
//! and imaginary direction of every coordinate.

use nalgebra::DVector;

use crate::classes::{band_status, MembershipVerdict, Oracle, Witness};
use crate::linalg::{ComplexMatrix, TolerancePolicy, C64};
use crate::rng;

/// A real function on unit vectors of `C^n`.
///
/// Gradients use the real inner product: `f(x + δ) ≈ f(x) + Re⟨g, δ⟩`.
pub trait SphereObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<C64>) -> f64;
    fn gradient(&self, _x: &DVector<C64>) -> Option<DVector<C64>> {
        None
    }
}

/// Wraps a closure; gradients are estimated numerically.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&DVector<C64>) -> f64> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&DVector<C64>) -> f64> SphereObjective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<C64>) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SphereOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub fd_step: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        Self {
            restarts: 4,
            max_iters: 400,
            seed: 0,
            fd_step: 1e-6,
        }
    }
}

fn numeric_gradient(obj: &dyn SphereObjective, x: &DVector<C64>, h: f64) -> DVector<C64> {
    let n = x.len();
    let mut g = DVector::zeros(n);
    let mut y = x.clone();
    for j in 0..n {
        let orig = y[j];
        y[j] = orig + C64::new(h, 0.0);
        let fp = obj.value(&y);
        y[j] = orig - C64::new(h, 0.0);
        let fm = obj.value(&y);
        let re = (fp - fm) / (2.0 * h);
        y[j] = orig + C64::new(0.0, h);
        let fp = obj.value(&y);
        y[j] = orig - C64::new(0.0, h);
        let fm = obj.value(&y);
        let im = (fp - fm) / (2.0 * h);
        y[j] = orig;
        g[j] = C64::new(re, im);
    }
    g
}

fn descend(obj: &dyn SphereObjective, start: DVector<C64>, opts: &SphereOptions) -> (f64, DVector<C64>) {
    let mut x = start.normalize();
    let mut fx = obj.value(&x);
    let mut step: f64 = 1.0;
    for _ in 0..opts.max_iters {
        let g = obj
            .gradient(&x)
            .unwrap_or_else(|| numeric_gradient(obj, &x, opts.fd_step));
        // Tangent projection under Re⟨·,·⟩.
        let radial = x.dotc(&g).re;
        let rg = &g - &x * C64::new(radial, 0.0);
        let gnorm2 = rg.norm_squared();
        if gnorm2 < 1e-26 {
            break;
        }
        let mut accepted = false;
        step = (step * 2.0).min(1e3);
        while step > 1e-14 {
            let cand = (&x - &rg * C64::new(step, 0.0)).normalize();
            let fc = obj.value(&cand);
            if fc <= fx - 1e-4 * step * gnorm2 {
                x = cand;
                let gain = fx - fc;
                fx = fc;
                accepted = true;
                if gain < 1e-15 * (1.0 + fx.abs()) {
                    return (fx, x);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (fx, x)
}

fn random_unit(n: usize, seed: u64, index: u64) -> DVector<C64> {
    let mut s = rng::stream(seed, index);
    DVector::from_fn(n, |_, _| rng::complex_gaussian(&mut s)).normalize()
}

/// Minimizes `obj` over the unit sphere from the given warm starts plus
/// `opts.restarts` seeded random starts; Member iff the best value clears
/// `-tol_decision`.
pub fn sphere_check(
    obj: &dyn SphereObjective,
    warm_starts: &[DVector<C64>],
    opts: &SphereOptions,
    tol: &TolerancePolicy,
) -> MembershipVerdict {
    let n = obj.dim();
    let mut starts: Vec<DVector<C64>> = warm_starts
        .iter()
        .filter(|v| v.norm() > 0.0)
        .cloned()
        .collect();
    starts.extend((0..opts.restarts).map(|i| random_unit(n, opts.seed, i as u64)));
    let stop = -10.0 * tol.tol_decision;
    let mut best: Option<(f64, DVector<C64>)> = None;
    for s in starts {
        let (f, x) = descend(obj, s, opts);
        if best.as_ref().is_none_or(|b| f < b.0) {
            best = Some((f, x));
        }
        if best.as_ref().is_some_and(|b| b.0 <= stop) {
            break;
        }
    }
    let (defect, x) = best.unwrap_or_else(|| (0.0, DVector::zeros(n)));
    MembershipVerdict {
        status: band_status(defect, tol.tol_decision),
        defect,
        witness: Some(Witness::vector(&x)),
        oracle: Oracle::Sphere,
        seed: Some(opts.seed),
    }
}

/// Default warm starts: standard basis vectors and right singular vectors.
pub fn warm_starts(t: &ComplexMatrix) -> Vec<DVector<C64>> {
    let n = t.dim();
    let mut out: Vec<DVector<C64>> = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
        .collect();
    let svd = t.as_inner().clone().svd(false, true);
    if let Some(vt) = svd.v_t {
        for i in 0..vt.nrows() {
            out.push(vt.row(i).adjoint());
        }
    }
    out
}

/// `A*Ax / ‖Ax‖`, the gradient of `‖Ax‖`; zero where `Ax` vanishes.
fn norm_gradient(a: &ComplexMatrix, ax: &DVector<C64>, norm: f64) -> DVector<C64> {
    if norm <= 1e-300 {
        DVector::zeros(ax.len())
    } else {
        a.as_inner().ad_mul(ax) / C64::new(norm, 0.0)
    }
}

/// The defining norm inequalities, written as `defect(x) ≥ 0` on unit `x`.
#[derive(Debug, Clone)]
pub enum NormInequality {
    /// `‖T^{k+2}x‖‖T^k x‖ - ‖T^{k+1}x‖²`
    KQuasi {
        low: ComplexMatrix,
        mid: ComplexMatrix,
        high: ComplexMatrix,
    },
    /// `‖Ax‖ - ‖Tx‖^{k+1}` with `A = T^{k+1}` or `A = |T|^k T`.
    Power {
        k: u32,
        lead: ComplexMatrix,
        t: ComplexMatrix,
    },
}

impl NormInequality {
    pub fn k_quasi(t: &ComplexMatrix, k: u32) -> Self {
        Self::KQuasi {
            low: t.power(k),
            mid: t.power(k + 1),
            high: t.power(k + 2),
        }
    }

    pub fn k_paranormal(t: &ComplexMatrix, k: u32) -> Self {
        Self::Power {
            k,
            lead: t.power(k + 1),
            t: t.clone(),
        }
    }

    /// Needs `|T|^k`, computed by the caller.
    pub fn absolute_k(t: &ComplexMatrix, abs_power: &ComplexMatrix, k: u32) -> Self {
        Self::Power {
            k,
            lead: abs_power * t,
            t: t.clone(),
        }
    }

    /// Defect at an arbitrary nonzero vector (normalized first; all
    /// inequalities are homogeneous).
    pub fn defect_at(&self, x: &DVector<C64>) -> f64 {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        self.value(&(x / C64::new(nx, 0.0)))
    }
}

impl SphereObjective for NormInequality {
    fn dim(&self) -> usize {
        match self {
            Self::KQuasi { low, .. } => low.dim(),
            Self::Power { t, .. } => t.dim(),
        }
    }

    fn value(&self, x: &DVector<C64>) -> f64 {
        match self {
            Self::KQuasi { low, mid, high } => {
                high.apply(x).norm() * low.apply(x).norm() - mid.apply(x).norm_squared()
            }
            Self::Power { k, lead, t } => lead.apply(x).norm() - t.apply(x).norm().powi(*k as i32 + 1),
        }
    }

    fn gradient(&self, x: &DVector<C64>) -> Option<DVector<C64>> {
        Some(match self {
            Self::KQuasi { low, mid, high } => {
                let (lx, mx, hx) = (low.apply(x), mid.apply(x), high.apply(x));
                let (ln, hn) = (lx.norm(), hx.norm());
                norm_gradient(high, &hx, hn) * C64::new(ln, 0.0)
                    + norm_gradient(low, &lx, ln) * C64::new(hn, 0.0)
                    - mid.as_inner().ad_mul(&mx) * C64::new(2.0, 0.0)
            }
            Self::Power { k, lead, t } => {
                let (ax, tx) = (lead.apply(x), t.apply(x));
                let tn = tx.norm();
                let kf = *k as f64;
                norm_gradient(lead, &ax, ax.norm())
                    - t.as_inner().ad_mul(&tx) * C64::new((kf + 1.0) * tn.powi(*k as i32 - 1), 0.0)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::Status;
    use crate::generators::ginibre;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn zero_defect_is_member() {
        let obj = FnObjective::new(3, |_: &DVector<C64>| 0.0);
        let v = sphere_check(&obj, &[], &SphereOptions::default(), &tol());
        assert_eq!(v.status, Status::Member);
        assert_eq!(v.defect, 0.0);
    }

    #[test]
    fn jordan_paranormal_defect_minimum_at_e2() {
        let j2 = ComplexMatrix::jordan_block(2);
        let obj = NormInequality::k_quasi(&j2, 0);
        let v = sphere_check(&obj, &warm_starts(&j2), &SphereOptions::default(), &tol());
        assert_eq!(v.status, Status::NonMember);
        assert!((v.defect + 1.0).abs() < 1e-12);
        let x = v.witness.unwrap().vector_c64();
        assert!((x[1].norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let t = ginibre(4, 21);
        let x = DVector::from_fn(4, |i, _| C64::new(0.3 + i as f64, 0.7 - i as f64 * 0.2)).normalize();
        let abs2 = crate::linalg::psd_power(&t.gram(), 1.0, &tol()).unwrap();
        for obj in [
            NormInequality::k_quasi(&t, 1),
            NormInequality::k_paranormal(&t, 2),
            NormInequality::absolute_k(&t, &abs2, 2),
        ] {
            let exact = obj.gradient(&x).unwrap();
            let fd = numeric_gradient(&obj, &x, 1e-6);
            assert!((exact - fd).norm() < 1e-6);
        }
    }

    #[test]
    fn numeric_and_analytic_routes_agree_on_minimum() {
        let t = ginibre(3, 4);
        let t = t.scale_real(1.0 / t.operator_norm());
        let exact = NormInequality::k_paranormal(&t, 1);
        let numeric = FnObjective::new(3, |x: &DVector<C64>| exact.value(x));
        let opts = SphereOptions { restarts: 6, ..Default::default() };
        let a = sphere_check(&exact, &warm_starts(&t), &opts, &tol());
        let b = sphere_check(&numeric, &warm_starts(&t), &opts, &tol());
        assert_eq!(a.status, b.status);
        assert!((a.defect - b.defect).abs() < 1e-5);
    }
}
