//! Density matrices over composite registers and the scalar figures of merit
//! computed from them.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigenvalues, re, ComplexMatrix, ZERO};
use crate::pauli;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Trace tolerance used for states produced by channels and plans, whose
/// trace-preservation is only certified to `1e-10`.
pub(crate) const OUTPUT_TRACE_TOL: f64 = 1e-9;

/// Positive, unit-trace, Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_trace_tolerance(matrix, HERMITICITY_TOL, TRACE_TOL)
    }

    /// Validates with a custom trace tolerance, then symmetrizes away the
    /// rounding-level anti-Hermitian residue.
    pub fn with_trace_tolerance(
        matrix: ComplexMatrix,
        herm_tol: f64,
        trace_tol: f64,
    ) -> Result<Self> {
        matrix.require_square("density matrix")?;
        let herm = matrix.hermiticity_residual();
        if herm > herm_tol {
            return Err(Error::InvalidState(format!(
                "hermiticity residual {herm:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr - re(1.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!(
                "trace {:.15} + {:.3e}i",
                tr.re, tr.im
            )));
        }
        let matrix = matrix.hermitian_part();
        let min_eig = hermitian_eigenvalues(&matrix)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_output(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_trace_tolerance(matrix, 1e-10, OUTPUT_TRACE_TOL)
    }

    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NonUnitVector { norm });
        }
        Self::new(ComplexMatrix::outer(psi, psi))
    }

    /// `|index><index|` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        Self {
            matrix: ComplexMatrix::unit(dim, index, index),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Re Tr(rho O)`
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        self.matrix.adjoint().inner(observable).re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.inner(&self.matrix).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// `U rho U†`; `u` must be unitary.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        u.require_dim(self.dim(), "unitary evolution")?;
        DensityMatrix::from_output(u.conjugate(&self.matrix))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// Expectation values `(<σx>, <σy>, <σz>)` of a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector::new(1.0, 0.0, 0.0);
    pub const MINUS_Y: BlochVector = BlochVector::new(0.0, -1.0, 0.0);
    pub const Z: BlochVector = BlochVector::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "bloch vector",
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(BlochVector {
        x: rho.expectation(&pauli::sigma_x()),
        y: rho.expectation(&pauli::sigma_y()),
        z: rho.expectation(&pauli::sigma_z()),
    })
}

/// `(I + x σx + y σy + z σz) / 2`
pub fn state_from_bloch(v: BlochVector) -> Result<DensityMatrix> {
    let norm = v.norm();
    if !(norm <= 1.0 + 1e-10) {
        return Err(Error::OutOfRange {
            what: "bloch vector norm",
            value: norm,
            range: "[0, 1]",
        });
    }
    let m = &(&(&pauli::identity() + &pauli::sigma_x().scale_re(v.x))
        + &pauli::sigma_y().scale_re(v.y))
        + &pauli::sigma_z().scale_re(v.z);
    Ok(DensityMatrix {
        matrix: m.scale_re(0.5),
    })
}

/// Reduced state over the factors in `keep`, in their original order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    DensityMatrix::from_output(m)
}

/// Partial trace on a raw square matrix (no positivity requirement).
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    let dim = m.require_square("partial trace")?;
    if total != dim {
        return Err(Error::DimensionMismatch {
            context: "partial trace factor dims",
            expected: dim,
            found: total,
        });
    }
    let keep: BTreeSet<usize> = keep.iter().copied().collect();
    if keep.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "partial trace keep set",
            expected: 1,
            found: 0,
        });
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch {
            context: "partial trace factor index",
            expected: dims.len(),
            found: bad,
        });
    }
    if keep.len() == dims.len() {
        return Ok(m.clone());
    }

    // Mixed-radix strides, factor 0 major.
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let kept: Vec<usize> = keep.iter().copied().collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let kept_dim: usize = kept.iter().map(|&f| dims[f]).product();
    let traced_dim: usize = traced.iter().map(|&f| dims[f]).product();

    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for &f in factors.iter().rev() {
                    off += (idx % dims[f]) * strides[f];
                    idx /= dims[f];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, kept_dim);
    let traced_off = offsets(&traced, traced_dim);

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (i, &ki) in kept_off.iter().enumerate() {
        for (j, &kj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(ki + t, kj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Normalized overlap `Tr(ab) / sqrt(Tr(a²) Tr(b²))`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "fidelity",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let pa = a.purity();
    let pb = b.purity();
    if pa < 1e-300 || pb < 1e-300 {
        return Err(Error::DivideByZero("fidelity purity factor"));
    }
    let overlap = a.matrix().inner(b.matrix()).re;
    Ok(overlap / (pa * pb).sqrt())
}

/// von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    // Validated states are square, so the eigensolver cannot fail here.
    let values = hermitian_eigenvalues(rho.matrix()).expect("square density matrix");
    values
        .into_iter()
        .map(|ev| ev.clamp(0.0, 1.0))
        .filter(|&ev| ev > 0.0)
        .map(|ev| -ev * ev.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, ONE};

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn ket_x() -> DensityMatrix {
        DensityMatrix::pure(&[re(S), re(S)]).unwrap()
    }

    #[test]
    fn rejects_bad_trace() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
    }

    #[test]
    fn rejects_non_positive() {
        let m = ComplexMatrix::diagonal(&[re(1.5), re(-0.5)]);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn trace_out_uncorrelated_ancilla() {
        let rho = state_from_bloch(BlochVector::new(0.3, -0.2, 0.5)).unwrap();
        let joint = rho.tensor(&DensityMatrix::basis(2, 0));
        let back = partial_trace(&joint, &[2, 2], &[0]).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn bell_state_marginals_are_mixed() {
        let bell = DensityMatrix::pure(&[re(S), ZERO, ZERO, re(S)]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        for keep in [0, 1] {
            let r = partial_trace(&bell, &[2, 2], &[keep]).unwrap();
            assert!(r.max_abs_diff(&mixed) < 1e-15);
        }
    }

    #[test]
    fn keep_all_is_identity() {
        let bell = DensityMatrix::pure(&[re(S), ZERO, ZERO, re(S)]).unwrap();
        let r = partial_trace(&bell, &[2, 2], &[0, 1]).unwrap();
        assert_eq!(r, bell);
    }

    #[test]
    fn partial_trace_dimension_errors() {
        let bell = DensityMatrix::pure(&[re(S), ZERO, ZERO, re(S)]).unwrap();
        assert!(matches!(
            partial_trace(&bell, &[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&bell, &[2, 2], &[]).is_err());
        assert!(partial_trace(&bell, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        assert!((fidelity(&zero, &mixed).unwrap() - S).abs() < 1e-15);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(4, 0);
        assert!(fidelity(&a, &b).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&ket_x()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(8)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_examples() {
        let v = bloch_vector(&DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!(v, BlochVector::Z);
        let v = bloch_vector(&ket_x()).unwrap();
        assert!(v.max_abs_diff(&BlochVector::X) < 1e-15);
        let minus_y = DensityMatrix::pure(&[re(S), c(0.0, -S)]).unwrap();
        let v = bloch_vector(&minus_y).unwrap();
        assert!(v.max_abs_diff(&BlochVector::MINUS_Y) < 1e-15);
    }

    #[test]
    fn bloch_requires_qubit() {
        assert!(bloch_vector(&DensityMatrix::maximally_mixed(4)).is_err());
        assert!(state_from_bloch(BlochVector::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let v = BlochVector::new(0.1, -0.7, 0.3);
        let back = bloch_vector(&state_from_bloch(v).unwrap()).unwrap();
        assert!(back.max_abs_diff(&v) < 1e-12);
        let rho = state_from_bloch(v).unwrap();
        assert!((rho.matrix().trace() - ONE).norm() < 1e-15);
    }
}
