//! Cross-checks the built-in Hermitian eigensolver against nalgebra.

use chansim_core::matrix::{hermitian_eigen, hermitian_eigenvalues, ComplexMatrix};
use chansim_core::random::{random_mixed_state, random_operator};
use chansim_core::state::{state_from_bloch, von_neumann_entropy, BlochVector, DensityMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn oracle_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn oracle_entropy(rho: &DensityMatrix) -> f64 {
    oracle_eigenvalues(rho.matrix())
        .into_iter()
        .filter(|&p| p > 1e-15)
        .map(|p| -p * p.log2())
        .sum()
}

#[test]
fn eigenvalues_match_on_random_hermitian_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for dim in 1..=12 {
        for _ in 0..5 {
            let a = random_operator(dim, &mut rng);
            let h = a.hermitian_part();
            let ours = hermitian_eigenvalues(&h).unwrap();
            let theirs = oracle_eigenvalues(&h);
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-10, "dim {dim}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn eigenvectors_diagonalize() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [2, 3, 5, 8] {
        let h = random_operator(dim, &mut rng).hermitian_part();
        let eig = hermitian_eigen(&h).unwrap();
        assert!(eig.vectors.unitarity_residual() < 1e-10);
        let d = eig.vectors.adjoint().matmul(&h).matmul(&eig.vectors);
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { eig.values[i] } else { 0.0 };
                assert!((d[(i, j)] - Complex64::new(expected, 0.0)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn entropy_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for dim in [2, 3, 4, 6, 8] {
        for _ in 0..10 {
            let rho = random_mixed_state(dim, &mut rng);
            assert!((von_neumann_entropy(&rho) - oracle_entropy(&rho)).abs() < 1e-10);
        }
    }
}

#[test]
fn amplitude_damped_x_entropy_at_half() {
    // Output of amplitude damping at λ = 0.5 on |+>: Bloch (√0.5, 0, 0.5).
    let rho = state_from_bloch(BlochVector::new(0.5f64.sqrt(), 0.0, 0.5)).unwrap();
    let s = oracle_entropy(&rho);
    assert!((s - 0.3546).abs() < 1e-3, "{s}");
    assert!((von_neumann_entropy(&rho) - s).abs() < 1e-12);
}
