//! Dense complex linear algebra kernel.
//!
//! Everything in the crate is expressed through [`ComplexMatrix`], a square
//! matrix with finite complex entries. Factorizations are delegated to
//! `nalgebra`; this module adds the tolerance-aware pieces on top (PSD
//! decisions, fractional powers with clamping, rank cuts, and subspace
//! algebra on orthonormal bases).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = num_complex::Complex64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical slack used by every tolerance-based decision.
///
/// All tolerances are relative: they are multiplied by `max(1, norm)` of the
/// quantity being tested, or by the largest singular value for rank cuts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Least-eigenvalue slack for PSD decisions.
    pub tol_psd: f64,
    /// Frobenius slack for matrix equalities.
    pub tol_eq: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub tol_rank: f64,
    /// Slack for reconstruction and orthonormality checks.
    pub tol_recon: f64,
    /// Decision threshold for optimizer- and pencil-based verdicts.
    pub tol_decision: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            tol_psd: 1e-10,
            tol_eq: 1e-10,
            tol_rank: 1e-10,
            tol_recon: 1e-9,
            tol_decision: 1e-8,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.tol_psd,
            self.tol_eq,
            self.tol_rank,
            self.tol_recon,
            self.tol_decision,
        ];
        if fields.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "tolerances must be finite and nonnegative: {self:?}"
            )))
        }
    }

    /// PSD decision for a Hermitian matrix with least eigenvalue `least` and
    /// spectral norm `norm`.
    pub fn is_psd(&self, least: f64, norm: f64) -> bool {
        least >= -self.tol_psd * norm.max(1.0)
    }

    /// Equality decision for a Frobenius residual against a reference norm.
    pub fn is_small(&self, residual: f64, norm: f64) -> bool {
        residual <= self.tol_eq * norm.max(1.0)
    }
}

/// Dense square complex matrix with finite entries and dimension at least one.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by internal arithmetic on valid inputs.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() > 0);
        Self(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::wrap(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        Self::wrap(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let d: Vec<C64> = d.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// The nilpotent Jordan block of size `n` (ones on the superdiagonal).
    pub fn jordan_block(n: usize) -> Self {
        Self::wrap(DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(self)
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(self)
    }

    pub fn power(&self, n: u32) -> Self {
        matrix_power(self, n)
    }

    /// `A*A`
    pub fn gram(&self) -> Self {
        Self(self.0.adjoint() * &self.0)
    }

    /// `AA*`
    pub fn cogram(&self) -> Self {
        Self(&self.0 * self.0.adjoint())
    }

    /// `T*T - TT*`
    pub fn self_commutator(&self) -> Self {
        &self.gram() - &self.cogram()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// Frobenius distance to another matrix of the same size.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol * self.frobenius_norm().max(1.0)
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self(block_diag(&[&self.0, &other.0]))
    }

    /// `U A U*`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn map_entries(&self, f: impl FnMut(C64) -> C64) -> Self {
        Self(self.0.map(f))
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.0 * x
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let sv = self.0.clone().singular_values();
        let mut v: Vec<f64> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Eigenvalues from a complex Schur form.
    pub fn eigenvalues(&self) -> Vec<C64> {
        eigenvalues(&self.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

pub(crate) fn block_diag(blocks: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    a.0.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        // Complex Schur forms are triangular; a leftover 2x2 bump is solved directly.
        if i + 1 < n && t[(i + 1, i)].norm() > 0.0 {
            let (a, b, cc, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * cc).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &ComplexMatrix) -> f64 {
    eigenvalues(&a.0).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// `A^n` by repeated squaring, `A^0 = I`.
pub fn matrix_power(a: &ComplexMatrix, n: u32) -> ComplexMatrix {
    let mut result = DMatrix::identity(a.dim(), a.dim());
    let mut base = a.0.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    ComplexMatrix(result)
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn least(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|w| w)
    }

    /// `V diag(f(w)) V*`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            scaled.column_mut(j).scale_mut(fw);
        }
        ComplexMatrix::wrap(scaled * v.adjoint())
    }
}

fn symmetrized_eigen(m: &DMatrix<C64>) -> HermitianEigen {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigendecomposition of `(A + A*)/2` after checking that `A` is Hermitian.
pub fn hermitian_eigen(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<HermitianEigen> {
    let asym = a.distance(&a.adjoint());
    if asym > tol.tol_eq * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(symmetrized_eigen(&a.0))
}

/// Least eigenvalue of a Hermitian matrix.
pub fn psd_defect(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<f64> {
    Ok(hermitian_eigen(a, tol)?.least())
}

/// `A^p` for PSD `A`.
///
/// Eigenvalues with modulus at most `tol_psd * ‖A‖` are treated as zero, so
/// roundoff in the null space never turns into `ε^p` noise.
pub fn psd_power(a: &ComplexMatrix, p: f64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(a, tol)?;
    let norm = eig.largest().abs().max(eig.least().abs());
    if !tol.is_psd(eig.least(), norm) {
        return Err(Error::NotPsd { least: eig.least() });
    }
    let floor = tol.tol_psd * norm;
    Ok(eig.reconstruct_with(|w| if w <= floor { 0.0 } else { w.powf(p) }))
}

/// Orthonormal basis of a subspace of `C^n`; `basis` is `n x r`.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<C64>,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: DMatrix<C64>) -> Result<Self> {
        if basis.nrows() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: basis.nrows(),
            });
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            ambient_dim: n,
            basis: DMatrix::identity(n, n),
        }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(n, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            basis[(i, j)] = c(1.0, 0.0);
        }
        Self {
            ambient_dim: n,
            basis,
        }
    }

    /// Orthonormalized span of arbitrary columns.
    pub fn span(n: usize, columns: &DMatrix<C64>, tol: &TolerancePolicy) -> Result<Self> {
        if columns.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: columns.nrows(),
            });
        }
        if columns.ncols() == 0 {
            return Ok(Self::zero(n));
        }
        let svd = SVD::new(columns.clone(), true, false);
        let u = svd.u.expect("u requested");
        let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
        if smax == 0.0 {
            return Ok(Self::zero(n));
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol.tol_rank * smax)
            .collect();
        let basis = DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
        Ok(Self {
            ambient_dim: n,
            basis,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    /// Orthogonal projector `QQ*`.
    pub fn projector(&self) -> DMatrix<C64> {
        &self.basis * self.basis.adjoint()
    }

    /// `‖Q*Q - I‖_F`
    pub fn orthonormality_residual(&self) -> f64 {
        let r = self.dim();
        (self.basis.adjoint() * &self.basis - DMatrix::<C64>::identity(r, r)).norm()
    }

    pub fn orthogonal_complement(&self) -> Self {
        kernel_of(&self.basis.adjoint(), self.ambient_dim, 1e-10).expect("matching columns")
    }

    /// Largest sine of the principal angles from `self` into `other`;
    /// zero means `self ⊆ other`.
    pub fn containment_gap(&self, other: &Subspace) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let n = self.ambient_dim;
        let resid = (DMatrix::<C64>::identity(n, n) - other.projector()) * &self.basis;
        resid
            .singular_values()
            .iter()
            .fold(0.0f64, |m, &s| m.max(s))
    }
}

/// Kernel of an arbitrary `m x n` matrix with a relative singular-value cutoff.
pub(crate) fn kernel_of(m: &DMatrix<C64>, n: usize, tol_rank: f64) -> Result<Subspace> {
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return Ok(Subspace::full(n));
    }
    let null: Vec<usize> = (0..sv.len())
        .filter(|&i| sv[i] <= tol_rank * smax)
        .collect();
    let basis = DMatrix::from_fn(n, null.len(), |i, j| vt[(null[j], i)].conj());
    Ok(Subspace {
        ambient_dim: n,
        basis,
    })
}

/// Kernel with an absolute singular-value cutoff; for matrices already
/// scaled to unit norm.
pub(crate) fn kernel_below(m: &DMatrix<C64>, n: usize, cutoff: f64) -> Subspace {
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cutoff).collect();
    let basis = DMatrix::from_fn(n, null.len(), |i, j| vt[(null[j], i)].conj());
    Subspace {
        ambient_dim: n,
        basis,
    }
}

/// Numerical kernel: right singular vectors with `σ ≤ tol_rank·σ_max`.
pub fn kernel(a: &ComplexMatrix, tol: &TolerancePolicy) -> Subspace {
    kernel_of(&a.0, a.dim(), tol.tol_rank).expect("square input")
}

/// `U ∩ V` as the kernel of the stacked complementary projectors.
pub fn subspace_intersect(u: &Subspace, v: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    if u.ambient_dim != v.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim,
            found: v.ambient_dim,
        });
    }
    let n = u.ambient_dim;
    if u.is_zero() || v.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let id = DMatrix::<C64>::identity(n, n);
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked
        .view_mut((0, 0), (n, n))
        .copy_from(&(&id - u.projector()));
    stacked
        .view_mut((n, 0), (n, n))
        .copy_from(&(&id - v.projector()));
    kernel_of(&stacked, n, tol.tol_rank)
}

/// `{x : Ax ∈ V}`
pub fn preimage_in(a: &ComplexMatrix, v: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    let n = a.dim();
    if v.ambient_dim != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.ambient_dim,
        });
    }
    let id = DMatrix::<C64>::identity(n, n);
    let m = (id - v.projector()) * &a.0;
    kernel_of(&m, n, tol.tol_rank)
}

/// `Q* A Q` for the basis `Q` of `V`.
pub fn compress(a: &ComplexMatrix, v: &Subspace) -> Result<ComplexMatrix> {
    if v.ambient_dim != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.ambient_dim,
        });
    }
    if v.is_zero() {
        return Err(Error::EmptySubspace);
    }
    Ok(ComplexMatrix(v.basis.adjoint() * &a.0 * &v.basis))
}

/// Numerical rank of a descending sequence of singular values (or moduli).
///
/// Values at or below `tol/10·σ_max` are zero and values at or above
/// `10·tol·σ_max` are nonzero. Values inside that window are split at the
/// largest ratio gap among the window and its two neighbours; a gap smaller
/// than a factor of ten is reported as [`Error::AmbiguousRank`].
pub fn numerical_rank(desc: &[f64], tol_rank: f64) -> Result<usize> {
    let smax = desc.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Ok(0);
    }
    let lo = tol_rank / 10.0 * smax;
    let hi = tol_rank * 10.0 * smax;
    let definite = desc.iter().take_while(|&&s| s >= hi).count();
    let ambiguous: Vec<usize> = (definite..desc.len())
        .filter(|&i| desc[i] > lo && desc[i] < hi)
        .collect();
    if ambiguous.is_empty() {
        return Ok(definite);
    }
    // Candidate cuts sit between consecutive entries from `definite - 1` to
    // the last ambiguous entry + 1.
    let first = definite.saturating_sub(1);
    let last = (ambiguous[ambiguous.len() - 1] + 1).min(desc.len() - 1);
    let mut best = (0.0f64, definite);
    for i in first..last {
        let (a, b) = (desc[i], desc[i + 1]);
        let ratio = if b <= 0.0 { f64::INFINITY } else { a / b };
        if ratio > best.0 {
            best = (ratio, i + 1);
        }
    }
    if best.0 >= 10.0 {
        Ok(best.1)
    } else {
        Err(Error::AmbiguousRank {
            values: ambiguous.iter().map(|&i| desc[i] / smax).collect(),
        })
    }
}
