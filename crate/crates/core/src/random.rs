//! Random states, unitaries and channels for verification harnesses.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::matrix::ComplexMatrix;
use crate::state::DensityMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Modified Gram-Schmidt on the columns of a complex Gaussian matrix.
/// The result has orthonormal columns (an isometry when `rows > cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= rows);
    loop {
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
        let mut ok = true;
        for _ in 0..cols {
            let mut v: Vec<Complex64> = (0..rows).map(|_| gaussian(rng)).collect();
            for _ in 0..2 {
                for q in &columns {
                    let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            columns.push(v);
        }
        if ok {
            let mut m = ComplexMatrix::zeros(rows, cols);
            for (j, col) in columns.iter().enumerate() {
                m.set_column(j, col);
            }
            return m;
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    random_isometry(dim, 1, rng).column(0)
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let psi = random_pure_vector(dim, rng);
    DensityMatrix::pure(&psi).expect("normalized by construction")
}

/// Full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = gaussian(rng);
        }
    }
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / tr).hermitian_part()).expect("Ginibre state is valid")
}

/// Random channel with `kraus_count` operators, cut from the blocks of a
/// random `(kraus_count·dim) × dim` isometry.
pub fn random_channel<R: Rng + ?Sized>(dim: usize, kraus_count: usize, rng: &mut R) -> KrausChannel {
    let iso = random_isometry(kraus_count * dim, dim, rng);
    let ops = (0..kraus_count)
        .map(|k| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    e[(i, j)] = iso[(k * dim + i, j)];
                }
            }
            e
        })
        .collect();
    KrausChannel::new(ops, format!("random(d={dim}, K={kraus_count})"))
        .expect("isometry blocks satisfy completeness")
}

/// Gaussian random operator, handy for decomposition round trips.
pub fn random_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}
