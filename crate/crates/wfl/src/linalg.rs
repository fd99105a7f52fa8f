//! Dense complex linear algebra: Hermitian eigendecomposition and
//! positive-operator functional calculus (inverse, square root, inverse
//! square root).
//!
//! Everything downstream works with `CMatrix`/`CVector` (dynamically sized
//! complex matrices/vectors) at desk scale (dimensions up to a few hundred).
//! All tolerances are relative to the Frobenius norm with floor 1, so checks
//! behave identically for tiny and large operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERM_TOL: f64 = 1e-9;
/// Positive-definiteness floor, relative to the largest eigenvalue.
pub const PD_TOL_REL: f64 = 1e-10;

/// Inner product `<x, y> = sum_j x_j * conj(y_j)`.
///
/// Linear in the first slot, conjugate-linear in the second. This is the
/// single place the convention is fixed; every analysis coefficient and
/// quadratic form in the crate goes through here.
#[inline]
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    // nalgebra's `a.dotc(b)` is `sum conj(a_j) b_j`, so swap the arguments.
    y.dotc(x)
}

/// Frobenius norm.
#[inline]
pub fn frob(m: &CMatrix) -> f64 {
    m.norm()
}

/// `max(1, ||m||_F)`: the scale used by all relative tolerances.
#[inline]
pub fn frob_scale(m: &CMatrix) -> f64 {
    frob(m).max(1.0)
}

pub fn is_finite_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vector(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Conjugate transpose.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order, eigenvector columns unitary.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, ordered to match
    /// `eigenvalues`. Column phases are arbitrary.
    pub eigenvectors: CMatrix,
}

impl HermitianEig {
    /// `V diag(g(w)) V*`.
    pub fn apply_spectral<F: Fn(f64) -> f64>(&self, g: F) -> CMatrix {
        let d = self.eigenvalues.len();
        let diag = CVector::from_iterator(d, self.eigenvalues.iter().map(|&w| C64::new(g(w), 0.0)));
        &self.eigenvectors * CMatrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    /// `V diag(w) V*`, for residual checks.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_spectral(|w| w)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// `||M - M*||_F / max(1, ||M||_F)`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    frob(&(m - m.adjoint())) / frob_scale(m)
}

/// Eigendecomposition of `m`, which must be Hermitian within [`HERM_TOL`]
/// (relative). Inputs inside the tolerance are symmetrized to `(M + M*)/2`
/// before decomposing, removing accumulation noise without masking genuine
/// asymmetry.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            left: (m.nrows(), m.ncols()),
            right: (m.nrows(), m.nrows()),
        });
    }
    if !is_finite_matrix(m) {
        return Err(Error::NonFinite);
    }
    let deviation = hermitian_deviation(m);
    if deviation > HERM_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(sym);

    // nalgebra returns eigenpairs in no particular order; sort ascending.
    let d = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut eigenvectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(HermitianEig { eigenvalues, eigenvectors })
}

/// Spectral function applied by [`psd_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdKind {
    Inverse,
    Sqrt,
    InvSqrt,
}

/// Functional calculus on a positive-definite Hermitian matrix.
///
/// Every eigenvalue must exceed `PD_TOL_REL * max_eigenvalue`; anything at or
/// below that floor signals a non-frame (rank-deficient) operator and is
/// rejected rather than regularized.
pub fn psd_transform(m: &CMatrix, kind: PsdKind) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    psd_transform_eig(&eig, kind)
}

/// Same as [`psd_transform`] but reusing an existing decomposition.
pub fn psd_transform_eig(eig: &HermitianEig, kind: PsdKind) -> Result<CMatrix> {
    let floor = PD_TOL_REL * eig.max_eigenvalue();
    let min = eig.min_eigenvalue();
    if min <= floor {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(match kind {
        PsdKind::Inverse => eig.apply_spectral(|w| 1.0 / w),
        PsdKind::Sqrt => eig.apply_spectral(f64::sqrt),
        PsdKind::InvSqrt => eig.apply_spectral(|w| 1.0 / w.sqrt()),
    })
}
