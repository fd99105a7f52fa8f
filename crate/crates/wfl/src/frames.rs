//! Classical finite-frame objects: analysis/synthesis, the frame operator,
//! frame bounds, the canonical dual, and index-restricted partial operators.
//!
//! A family is just an ordered list of vectors; whether it actually *is* a
//! frame (spans C^d) is a property checked on demand by [`FrameFamily::frame_bounds`],
//! not a construction invariant, so rank-deficient families remain usable as
//! negative test inputs.
//!
//! Summation convention: every `sum over i` in this crate runs in ascending
//! index order, which keeps partial-operator decompositions reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, frob, frob_scale, hermitian_eig, inner, psd_transform_eig, CMatrix, CVector, PsdKind,
    C64, PD_TOL_REL,
};
use crate::weaving::PartitionMask;

/// Ordered family of `n` vectors in C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFamily {
    dim: usize,
    vectors: Vec<CVector>,
}

/// Optimal frame bounds: the extreme eigenvalues of the frame operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    /// `A = B` within `tol` relative.
    pub fn is_tight(&self, tol: f64) -> bool {
        (self.upper - self.lower).abs() <= tol * self.upper.max(1.0)
    }
}

impl FrameFamily {
    /// Build a family, validating that all vectors live in C^dim and are finite.
    pub fn new(dim: usize, vectors: Vec<CVector>) -> Result<Self> {
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimMismatch { expected: dim, got: v.len() });
            }
            if !linalg::is_finite_vector(v) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &CVector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CVector> {
        self.vectors.iter()
    }

    /// d x n matrix whose columns are the family vectors.
    pub fn synthesis_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.len());
        for (i, v) in self.vectors.iter().enumerate() {
            m.set_column(i, v);
        }
        m
    }

    /// Every vector multiplied by a real scalar.
    pub fn scaled(&self, factor: f64) -> FrameFamily {
        let c = C64::new(factor, 0.0);
        FrameFamily {
            dim: self.dim,
            vectors: self.vectors.iter().map(|v| v * c).collect(),
        }
    }

    /// `m` applied to every vector.
    pub fn mapped(&self, m: &CMatrix) -> FrameFamily {
        debug_assert_eq!(m.ncols(), self.dim);
        FrameFamily {
            dim: m.nrows(),
            vectors: self.vectors.iter().map(|v| m * v).collect(),
        }
    }

    /// Analysis coefficients `c_i = <f, phi_i>`.
    pub fn analysis(&self, f: &CVector) -> Result<Vec<C64>> {
        if f.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: f.len() });
        }
        Ok(self.vectors.iter().map(|phi| inner(f, phi)).collect())
    }

    /// Synthesis `sum_i c_i phi_i`, ascending index order.
    pub fn synthesis(&self, coeffs: &[C64]) -> Result<CVector> {
        if coeffs.len() != self.len() {
            return Err(Error::DimMismatch { expected: self.len(), got: coeffs.len() });
        }
        let mut out = CVector::zeros(self.dim);
        for (c, phi) in coeffs.iter().zip(&self.vectors) {
            out += phi * *c;
        }
        Ok(out)
    }

    /// Frame operator `S = sum_i phi_i phi_i*` (Hermitian PSD by construction).
    pub fn frame_operator(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for phi in &self.vectors {
            s += phi * phi.adjoint();
        }
        s
    }

    /// `S_J = sum_{i in J} phi_i phi_i*`, ascending index order, so that
    /// `S_J + S_{J^c}` reproduces `S` to machine accuracy.
    pub fn partial_frame_operator(&self, j: &PartitionMask) -> CMatrix {
        debug_assert_eq!(j.len(), self.len());
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for (i, phi) in self.vectors.iter().enumerate() {
            if j.contains(i) {
                s += phi * phi.adjoint();
            }
        }
        s
    }

    /// Extreme eigenvalues of the frame operator. Errors with [`Error::NotAFrame`]
    /// when the family fails to span (smallest eigenvalue at or below the
    /// relative positive-definiteness floor).
    pub fn frame_bounds(&self) -> Result<FrameBounds> {
        if self.len() < self.dim {
            return Err(Error::NotAFrame { min_eigenvalue: 0.0 });
        }
        let eig = hermitian_eig(&self.frame_operator())?;
        let min = eig.min_eigenvalue();
        if min <= PD_TOL_REL * eig.max_eigenvalue() {
            return Err(Error::NotAFrame { min_eigenvalue: min });
        }
        Ok(FrameBounds { lower: min, upper: eig.max_eigenvalue() })
    }

    /// Canonical dual family `{S^{-1} phi_i}`.
    pub fn canonical_dual(&self) -> Result<FrameFamily> {
        let eig = hermitian_eig(&self.frame_operator())?;
        if self.len() < self.dim || eig.min_eigenvalue() <= PD_TOL_REL * eig.max_eigenvalue() {
            return Err(Error::NotAFrame { min_eigenvalue: eig.min_eigenvalue() });
        }
        let inv = psd_transform_eig(&eig, PsdKind::Inverse)?;
        Ok(self.mapped(&inv))
    }
}

/// Serialized form: `{"dim": d, "vectors": [[[re, im], ...], ...]}` with one
/// inner list per vector.
#[derive(Debug, Serialize, Deserialize)]
pub struct FrameJson {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl From<&FrameFamily> for FrameJson {
    fn from(f: &FrameFamily) -> Self {
        FrameJson {
            dim: f.dim(),
            vectors: f
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<FrameJson> for FrameFamily {
    type Error = Error;

    fn try_from(j: FrameJson) -> Result<FrameFamily> {
        let vectors = j
            .vectors
            .into_iter()
            .map(|entries| CVector::from_iterator(entries.len(), entries.iter().map(|&[re, im]| C64::new(re, im))))
            .collect();
        FrameFamily::new(j.dim, vectors)
    }
}

/// Consistency residual `||S - (S_J + S_{J^c})||_F / max(1, ||S||_F)`; exposed
/// for tests and the verification suite.
pub fn partition_additivity_residual(f: &FrameFamily, j: &PartitionMask) -> f64 {
    let s = f.frame_operator();
    let split = f.partial_frame_operator(j) + f.partial_frame_operator(&j.complement());
    frob(&(&split - &s)) / frob_scale(&s)
}
