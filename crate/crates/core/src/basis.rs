//! Orthogonal unitary operator bases, operator expansion coefficients and the
//! chi (process) matrix.
//!
//! Basis elements are kept unitary, so `Tr(U_i† U_j) = D δ_ij` and the `1/D`
//! normalization lives in [`decompose_operator`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigenvalues, tensor_all, ComplexMatrix, ZERO};
use crate::pauli::Pauli;
use crate::state::DensityMatrix;

/// Columns with norm at or below this are considered inactive.
pub const ACTIVE_COLUMN_TOL: f64 = 1e-12;
/// Absolute off-diagonal threshold for calling a chi matrix diagonal.
pub const CHI_DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Pauli,
    Weyl,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Pauli => "pauli",
            BasisKind::Weyl => "weyl",
        })
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pauli" => Ok(BasisKind::Pauli),
            "weyl" => Ok(BasisKind::Weyl),
            other => Err(Error::UnknownName {
                kind: "basis",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryBasis {
    dim: usize,
    kind: BasisKind,
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl UnitaryBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sub-basis with the given element indices, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> UnitaryBasis {
        UnitaryBasis {
            dim: self.dim,
            kind: self.kind,
            elements: indices.iter().map(|&i| self.elements[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Max of `|Tr(U_i† U_j) − D δ_ij|` over all pairs.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.dim as f64;
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let target = if i == j { d } else { 0.0 };
                worst = worst.max((a.inner(b) - target).norm());
            }
        }
        worst
    }
}

/// Tensor products of `(I, X, Y, Z)` over `n` qubits, lexicographic with the
/// first qubit as the major factor.
pub fn pauli_basis(n: usize) -> Result<UnitaryBasis> {
    if !(1..=4).contains(&n) {
        return Err(Error::OutOfRange {
            what: "pauli basis qubit count",
            value: n as f64,
            range: "[1, 4]",
        });
    }
    let count = 4usize.pow(n as u32);
    let mut elements = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for idx in 0..count {
        let word: Vec<Pauli> = (0..n)
            .map(|q| Pauli::ALL[(idx / 4usize.pow((n - 1 - q) as u32)) % 4])
            .collect();
        let mats: Vec<ComplexMatrix> = word.iter().map(|p| p.matrix()).collect();
        elements.push(tensor_all(&mats));
        labels.push(word.iter().map(|p| p.as_char()).collect());
    }
    Ok(UnitaryBasis {
        dim: 1 << n,
        kind: BasisKind::Pauli,
        elements,
        labels,
    })
}

/// `U_{nm} = Σ_k ω^{kn} |k><(k+m) mod D|`, indexed `n·D + m`.
pub fn weyl_operator(dim: usize, n: usize, m: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let angle = 2.0 * PI * ((k * n) % dim) as f64 / dim as f64;
        u[(k, (k + m) % dim)] = Complex64::from_polar(1.0, angle);
    }
    u
}

pub fn weyl_basis(dim: usize) -> Result<UnitaryBasis> {
    if !(2..=256).contains(&dim) {
        return Err(Error::OutOfRange {
            what: "weyl basis dimension",
            value: dim as f64,
            range: "[2, 256]",
        });
    }
    let mut elements = Vec::with_capacity(dim * dim);
    let mut labels = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        for m in 0..dim {
            elements.push(weyl_operator(dim, n, m));
            labels.push(format!("W{n},{m}"));
        }
    }
    Ok(UnitaryBasis {
        dim,
        kind: BasisKind::Weyl,
        elements,
        labels,
    })
}

/// Full basis of `kind` for an operator dimension.
pub fn basis_for(kind: BasisKind, dim: usize) -> Result<UnitaryBasis> {
    match kind {
        BasisKind::Weyl => weyl_basis(dim),
        BasisKind::Pauli => {
            if !dim.is_power_of_two() || dim < 2 {
                return Err(Error::DimensionMismatch {
                    context: "pauli basis needs a power-of-two dimension",
                    expected: dim.next_power_of_two().max(2),
                    found: dim,
                });
            }
            pauli_basis(dim.trailing_zeros() as usize)
        }
    }
}

/// Coefficients `c_i = Tr(U_i† E) / D`.
pub fn decompose_operator(e: &ComplexMatrix, basis: &UnitaryBasis) -> Result<Vec<Complex64>> {
    e.require_dim(basis.dim(), "operator decomposition")?;
    let d = basis.dim() as f64;
    Ok(basis.elements().iter().map(|u| u.inner(e) / d).collect())
}

/// `Σ_i c_i U_i`
pub fn recompose_operator(coeffs: &[Complex64], basis: &UnitaryBasis) -> Result<ComplexMatrix> {
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            context: "coefficient row length",
            expected: basis.len(),
            found: coeffs.len(),
        });
    }
    let mut out = ComplexMatrix::zeros(basis.dim(), basis.dim());
    for (&c, u) in coeffs.iter().zip(basis.elements()) {
        if c != ZERO {
            out += &u.scale(c);
        }
    }
    Ok(out)
}

/// Row `k` holds the expansion of Kraus operator `k`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix(pub ComplexMatrix);

impl CoefficientMatrix {
    pub fn kraus_count(&self) -> usize {
        self.0.rows()
    }

    pub fn basis_len(&self) -> usize {
        self.0.cols()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.0.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn row_norm(&self, k: usize) -> f64 {
        self.0.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Indices of columns with norm above [`ACTIVE_COLUMN_TOL`].
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.basis_len())
            .filter(|&j| self.column_norm(j) > ACTIVE_COLUMN_TOL)
            .collect()
    }

    pub fn restrict_columns(&self, cols: &[usize]) -> CoefficientMatrix {
        let mut m = ComplexMatrix::zeros(self.kraus_count(), cols.len());
        for k in 0..self.kraus_count() {
            for (dst, &src) in cols.iter().enumerate() {
                m[(k, dst)] = self.0[(k, src)];
            }
        }
        CoefficientMatrix(m)
    }

    /// `χ = cᵀ c̄`, i.e. `χ_ij = Σ_k c_ki conj(c_kj)`.
    pub fn chi(&self) -> ChiMatrix {
        let d = self.basis_len();
        let mut chi = ComplexMatrix::zeros(d, d);
        for k in 0..self.kraus_count() {
            let row = self.0.row(k);
            for i in 0..d {
                if row[i] == ZERO {
                    continue;
                }
                for j in 0..d {
                    chi[(i, j)] += row[i] * row[j].conj();
                }
            }
        }
        ChiMatrix(chi)
    }
}

pub fn coefficient_matrix(ch: &KrausChannel, basis: &UnitaryBasis) -> Result<CoefficientMatrix> {
    if ch.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "channel vs basis",
            expected: basis.dim(),
            found: ch.dim(),
        });
    }
    let mut m = ComplexMatrix::zeros(ch.ops().len(), basis.len());
    for (k, e) in ch.ops().iter().enumerate() {
        for (i, c) in decompose_operator(e, basis)?.into_iter().enumerate() {
            m[(k, i)] = c;
        }
    }
    Ok(CoefficientMatrix(m))
}

/// Process matrix of a channel in a fixed unitary basis.
#[derive(Debug, Clone)]
pub struct ChiMatrix(pub ComplexMatrix);

impl ChiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.0.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.max_off_diagonal() < CHI_DIAGONAL_TOL
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.0.rows()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)
            .ok()
            .and_then(|v| v.first().copied())
            .unwrap_or(f64::NAN)
    }
}

pub fn chi_matrix(ch: &KrausChannel, basis: &UnitaryBasis) -> Result<ChiMatrix> {
    Ok(coefficient_matrix(ch, basis)?.chi())
}

/// `ε(ρ) = Σ_ij χ_ij U_i ρ U_j†`
pub fn reconstruct_channel(
    chi: &ChiMatrix,
    basis: &UnitaryBasis,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    chi.0.require_dim(basis.len(), "chi vs basis")?;
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "state vs basis",
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    let herm = chi.0.hermiticity_residual();
    if herm > 1e-10 {
        return Err(Error::InvalidState(format!(
            "chi matrix is not Hermitian (residual {herm:.3e})"
        )));
    }
    let min_eigenvalue = chi.min_eigenvalue();
    if !(min_eigenvalue >= -1e-10) {
        return Err(Error::NotPsd { min_eigenvalue });
    }

    let rho_m = rho.matrix();
    let left: Vec<ComplexMatrix> = basis.elements().iter().map(|u| u.matmul(rho_m)).collect();
    let right: Vec<ComplexMatrix> = basis.elements().iter().map(ComplexMatrix::adjoint).collect();
    let mut out = ComplexMatrix::zeros(basis.dim(), basis.dim());
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            let w = chi.0[(i, j)];
            if w.norm() == 0.0 {
                continue;
            }
            out += &l.matmul(r).scale(w);
        }
    }
    DensityMatrix::from_output(out)
}
