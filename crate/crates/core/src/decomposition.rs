//! Structural splittings of a matrix into orthogonal reducing blocks.
//!
//! * [`normal_pure_split`]: the largest reducing subspace on which `T` is
//!   normal, and the pure remainder.
//! * [`root_decompose`]: for a k-quasi-paranormal `T` with `T^n` normal,
//!   `T = T' ⊕ T''` with `T'` normal and `T''` nilpotent of index at most
//!   `min(n, k+1)`.
//! * [`nilpotent2_canonical`]: the form `[[0, C], [0, 0]] ⊕ 0` with `C`
//!   positive definite for `T² = 0`.
//! * [`rr_assemble`] / [`rr_check`]: square roots of normal matrices in the
//!   block form `A ⊕ [[B, C], [0, -B]]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classes::{Classifier, MembershipVerdict};
use crate::linalg::{block_diag, kernel_below, numerical_rank, psd_defect, ComplexMatrix, Subspace, TolerancePolicy, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockLabel {
    NormalPart,
    PurePart,
    NilpotentPart,
}

/// Relative residuals: reassembly `‖Q B Q* - T‖_F / max(1, ‖T‖_F)`,
/// normality of the normal blocks, and `‖N^m‖_F / max(1, ‖N‖)^m` for the
/// claimed nil-index `m` of the nilpotent block (zero when absent).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub reassembly: f64,
    pub normality: f64,
    pub nilpotency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(rename = "Q")]
    pub change_of_basis: ComplexMatrix,
    pub block_dims: Vec<usize>,
    pub labels: Vec<BlockLabel>,
    pub blocks: Vec<ComplexMatrix>,
    pub residuals: Residuals,
    /// Nil-index bound the nilpotent block was checked against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nil_index: Option<u32>,
    /// Positive definite block of the index-2 canonical form.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub canonical_c: Option<ComplexMatrix>,
}

impl Decomposition {
    fn assemble(
        t: &ComplexMatrix,
        q: DMatrix<C64>,
        parts: Vec<(BlockLabel, DMatrix<C64>)>,
        nil_index: Option<u32>,
    ) -> Self {
        let q = ComplexMatrix::wrap(q);
        let mut labels = Vec::new();
        let mut blocks = Vec::new();
        let mut block_dims = Vec::new();
        let mut offset = 0;
        for (label, basis) in parts {
            let r = basis.ncols();
            debug_assert_eq!(basis, q.as_inner().columns(offset, r));
            offset += r;
            if r == 0 {
                continue;
            }
            labels.push(label);
            block_dims.push(r);
            blocks.push(ComplexMatrix::wrap(basis.adjoint() * t.as_inner() * &basis));
        }
        let mut d = Self {
            change_of_basis: q,
            block_dims,
            labels,
            blocks,
            residuals: Residuals::default(),
            nil_index,
            canonical_c: None,
        };
        d.residuals = d.compute_residuals(t);
        d
    }

    fn compute_residuals(&self, t: &ComplexMatrix) -> Residuals {
        let reassembly = self.reassemble().distance(t) / t.frobenius_norm().max(1.0);
        let mut normality = 0.0f64;
        let mut nilpotency = 0.0f64;
        for (label, b) in self.labels.iter().zip(&self.blocks) {
            let scale = b.operator_norm().max(1.0);
            match label {
                BlockLabel::NormalPart => {
                    normality = normality.max(b.self_commutator().frobenius_norm() / (scale * scale));
                }
                BlockLabel::NilpotentPart => {
                    let m = self.nil_index.unwrap_or(b.dim() as u32);
                    nilpotency = nilpotency.max(b.power(m).frobenius_norm() / scale.powi(m as i32));
                }
                BlockLabel::PurePart => {}
            }
        }
        Residuals {
            reassembly,
            normality,
            nilpotency,
        }
    }

    pub fn dim(&self) -> usize {
        self.change_of_basis.dim()
    }

    /// `Q · blockdiag(blocks) · Q*`
    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.dim();
        let inner: Vec<&DMatrix<C64>> = self.blocks.iter().map(|b| b.as_inner()).collect();
        let d = if inner.is_empty() {
            DMatrix::zeros(n, n)
        } else {
            block_diag(&inner)
        };
        let q = self.change_of_basis.as_inner();
        ComplexMatrix::wrap(q * d * q.adjoint())
    }

    /// First block carrying `label`.
    pub fn block(&self, label: BlockLabel) -> Option<&ComplexMatrix> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.blocks[i])
    }

    /// Dimension of the blocks carrying `label`.
    pub fn dim_of(&self, label: BlockLabel) -> usize {
        self.labels
            .iter()
            .zip(&self.block_dims)
            .filter(|(&l, _)| l == label)
            .map(|(_, &d)| d)
            .sum()
    }

    /// `‖Q*Q - I‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        self.change_of_basis
            .gram()
            .distance(&ComplexMatrix::identity(n))
    }
}

fn hstack(parts: &[&DMatrix<C64>], n: usize) -> DMatrix<C64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut q = DMatrix::zeros(n, cols);
    let mut j = 0;
    for p in parts {
        q.view_mut((0, j), (n, p.ncols())).copy_from(p);
        j += p.ncols();
    }
    q
}

fn vstack(parts: &[DMatrix<C64>], n: usize) -> DMatrix<C64> {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut m = DMatrix::zeros(rows, n);
    let mut i = 0;
    for p in parts {
        m.view_mut((i, 0), (p.nrows(), n)).copy_from(p);
        i += p.nrows();
    }
    m
}

fn complement(v: &Subspace) -> DMatrix<C64> {
    let n = v.ambient_dim();
    if v.is_zero() {
        return DMatrix::identity(n, n);
    }
    kernel_below(&v.basis().adjoint(), n, 0.5).basis().clone()
}

/// Maximal normal reducing subspace by the fixed point
/// `V ← V ∩ T⁻¹V ∩ (T*)⁻¹V`, started from the kernel of the self-commutator.
pub fn normal_pure_split(t: &ComplexMatrix, tol: &TolerancePolicy) -> Decomposition {
    let n = t.dim();
    let norm = t.operator_norm();
    let th = if norm > 0.0 { t.scale_real(1.0 / norm) } else { t.clone() };
    let cutoff = tol.tol_rank.max(f64::EPSILON * n as f64 * 16.0);
    let mut v = kernel_below(th.self_commutator().as_inner(), n, cutoff);
    let id = DMatrix::<C64>::identity(n, n);
    for _ in 0..=n {
        if v.is_zero() {
            break;
        }
        let out = &id - v.projector();
        let stacked = vstack(
            &[out.clone(), &out * th.as_inner(), &out * th.adjoint().as_inner()],
            n,
        );
        let next = kernel_below(&stacked, n, cutoff);
        let stable = next.dim() == v.dim();
        v = next;
        if stable {
            break;
        }
    }
    let w = complement(&v);
    let q = hstack(&[v.basis(), &w], n);
    Decomposition::assemble(
        t,
        q,
        vec![
            (BlockLabel::NormalPart, v.basis().clone()),
            (BlockLabel::PurePart, w),
        ],
        None,
    )
}

/// `T = T' ⊕ T''` for k-quasi-paranormal `T` with `T^n` normal.
///
/// `T''` is the compression to the null space of `T^n` (numerical rank of
/// its singular values, which are the eigenvalue moduli of a normal
/// matrix); `T'` is the compression to the orthogonal complement. A power
/// with `‖T^n‖ ≤ tol_rank·‖T‖^n` is treated as zero.
pub fn root_decompose(t: &ComplexMatrix, n: u32, k: u32, clf: &Classifier) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::HypothesisViolated("root order must be positive".into()));
    }
    let tol = &clf.tol;
    let kq = clf.is_k_quasi_paranormal(t, k)?;
    if !kq.is_member() {
        return Err(Error::HypothesisViolated(format!(
            "T is not {k}-quasi-paranormal ({:?}, defect {:.3e})",
            kq.status, kq.defect
        )));
    }
    let tn = t.power(n);
    let nv = clf.is_power_normal(t, n);
    if !nv.is_member() {
        return Err(Error::HypothesisViolated(format!(
            "T^{n} is not normal ({:?}, residual {:.3e})",
            nv.status, -nv.defect
        )));
    }
    let dim = t.dim();
    let svd = tn.as_inner().clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let desc: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let floor = tol.tol_rank * t.operator_norm().powi(n as i32);
    let rank = if desc[0] <= floor {
        0
    } else {
        numerical_rank(&desc, tol.tol_rank)?
    };
    let row = |j: usize, i: usize| vt[(order[j], i)].conj();
    let range = DMatrix::from_fn(dim, rank, |i, j| row(j, i));
    let null = DMatrix::from_fn(dim, dim - rank, |i, j| row(rank + j, i));

    let p = &null * null.adjoint();
    let comm = (&p * t.as_inner() - t.as_inner() * &p).norm();
    if comm > tol.tol_eq * t.frobenius_norm().max(1.0) {
        return Err(Error::NonCommutingProjection { residual: comm });
    }
    let bound = n.min(k + 1);
    let q = hstack(&[&range, &null], dim);
    let d = Decomposition::assemble(
        t,
        q,
        vec![
            (BlockLabel::NormalPart, range),
            (BlockLabel::NilpotentPart, null),
        ],
        Some(bound),
    );
    if d.residuals.normality > tol.tol_eq || d.residuals.nilpotency > tol.tol_eq {
        return Err(Error::HypothesisViolated(format!(
            "split fails its postconditions (normality {:.3e}, nilpotency {:.3e})",
            d.residuals.normality, d.residuals.nilpotency
        )));
    }
    Ok(d)
}

/// Canonical form of an index-2 nilpotent.
///
/// With `V_r` an orthonormal basis of `(ker T)^⊥`, `T V_r = U_r X` for an
/// orthonormal `U_r` inside `ker T` (thin QR). The polar factor `W` of
/// `X = W |X|` is absorbed into `U_r`, so the basis `[U_r W, V_r, K]`
/// (with `K` the rest of the kernel) gives `Q*TQ = [[0, C], [0, 0]] ⊕ 0`
/// with `C = |X|` positive definite.
pub fn nilpotent2_canonical(t: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Decomposition> {
    let n = t.dim();
    let norm = t.operator_norm();
    if norm == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let th = t.scale_real(1.0 / norm);
    let sq = th.power(2).frobenius_norm();
    if sq > tol.tol_eq {
        return Err(Error::NotNilpotentIndex2 { residual: sq });
    }
    let svd = th.as_inner().clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let desc: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let r = numerical_rank(&desc, tol.tol_rank)?;
    if r == 0 {
        return Err(Error::ZeroOperator);
    }
    if 2 * r > n {
        return Err(Error::NotNilpotentIndex2 { residual: sq });
    }
    let vr = DMatrix::from_fn(n, r, |i, j| vt[(order[j], i)].conj());
    let y = th.as_inner() * &vr;
    let q1 = y.clone().qr().q();
    let x = q1.adjoint() * &y;
    let polar = x.svd(true, true);
    let w = polar.u.expect("u requested") * polar.v_t.expect("v_t requested");
    let ur = q1 * w;
    let rest = if 2 * r == n {
        DMatrix::zeros(n, 0)
    } else {
        let stacked = vstack(&[th.as_inner().clone(), ur.adjoint(), vr.adjoint()], n);
        let k = kernel_below(&stacked, n, tol.tol_rank.max(1e-8) * 10.0);
        if k.dim() != n - 2 * r {
            return Err(Error::NotNilpotentIndex2 { residual: sq });
        }
        k.basis().clone()
    };
    let nil_basis = hstack(&[&ur, &vr], n);
    let q = hstack(&[&nil_basis, &rest], n);
    let mut d = Decomposition::assemble(
        t,
        q,
        vec![
            (BlockLabel::NilpotentPart, nil_basis),
            (BlockLabel::NormalPart, rest),
        ],
        Some(2),
    );
    let block = d.blocks[0].as_inner();
    let c = block.view((0, r), (r, r)).clone_owned();
    let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    d.canonical_c = Some(ComplexMatrix::wrap(c));
    Ok(d)
}

/// Validated blocks of `A ⊕ [[B, C], [0, -B]]`.
#[derive(Debug, Clone)]
pub struct RrForm {
    pub a: Option<ComplexMatrix>,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

impl RrForm {
    pub fn new(a: Option<ComplexMatrix>, b: ComplexMatrix, c: ComplexMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let normal_residual = |m: &ComplexMatrix| {
            let s = m.operator_norm().max(1.0);
            m.self_commutator().frobenius_norm() / (s * s)
        };
        if let Some(a) = &a {
            if normal_residual(a) > tol.tol_eq {
                return Err(Error::InvalidRrForm("A is not normal".into()));
            }
        }
        if b.dim() != c.dim() {
            return Err(Error::InvalidRrForm(format!(
                "B is {0}x{0} but C is {1}x{1}",
                b.dim(),
                c.dim()
            )));
        }
        if normal_residual(&b) > tol.tol_eq {
            return Err(Error::InvalidRrForm("B is not normal".into()));
        }
        let least = psd_defect(&c, tol).map_err(|_| Error::InvalidRrForm("C is not Hermitian".into()))?;
        if !tol.is_psd(least, c.operator_norm()) {
            return Err(Error::InvalidRrForm(format!("C is not positive (least eigenvalue {least:.3e})")));
        }
        let sv = c.singular_values();
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        if smax == 0.0 || smin <= tol.tol_rank * smax {
            return Err(Error::InvalidRrForm("C is not injective".into()));
        }
        let comm = (&b * &c).distance(&(&c * &b));
        if comm > tol.tol_eq * (b.operator_norm() * smax).max(1.0) {
            return Err(Error::InvalidRrForm(format!("B and C do not commute (residual {comm:.3e})")));
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.as_ref().map_or(0, |a| a.dim()) + 2 * self.b.dim()
    }

    pub fn assemble(&self) -> ComplexMatrix {
        let m = self.b.dim();
        let mut core = DMatrix::zeros(2 * m, 2 * m);
        core.view_mut((0, 0), (m, m)).copy_from(self.b.as_inner());
        core.view_mut((0, m), (m, m)).copy_from(self.c.as_inner());
        core.view_mut((m, m), (m, m)).copy_from(&(-self.b.as_inner()));
        let core = ComplexMatrix::wrap(core);
        match &self.a {
            Some(a) => a.direct_sum(&core),
            None => core,
        }
    }
}

/// Validates the blocks and assembles `A ⊕ [[B, C], [0, -B]]`; the square
/// of the result is checked to be normal.
pub fn rr_assemble(
    a: Option<&ComplexMatrix>,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<ComplexMatrix> {
    let form = RrForm::new(a.cloned(), b.clone(), c.clone(), tol)?;
    let t = form.assemble();
    let sq = t.power(2);
    let s = sq.operator_norm().max(1.0);
    let resid = sq.self_commutator().frobenius_norm() / (s * s);
    if resid > tol.tol_eq {
        return Err(Error::InvalidRrForm(format!("assembled square is not normal (residual {resid:.3e})")));
    }
    Ok(t)
}

/// Member iff `T²` is normal.
pub fn rr_check(t: &ComplexMatrix, clf: &Classifier) -> MembershipVerdict {
    clf.is_power_normal(t, 2)
}
