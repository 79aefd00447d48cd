//! NMR-style state preparation and readout: pseudo-pure and thermal states,
//! peak-resolved spin observables, the readout pulse, single-qubit
//! tomography and the deviation statistic used to compare sweeps.
//!
//! Qubit 0 (the system spin) is the major tensor factor.

use std::f64::consts::FRAC_PI_4;

use crate::channel::check_unit_interval;
use crate::error::{Error, Result};
use crate::matrix::{tensor_all, ComplexMatrix};
use crate::pauli;
use crate::state::{state_from_bloch, BlochVector, DensityMatrix};

const BLOCH_NORM_TOL: f64 = 1e-8;
const EXPECTATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoPureSpec {
    pub n: usize,
    pub epsilon: f64,
}

impl PseudoPureSpec {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        check_qubits(n)?;
        check_unit_interval(epsilon, "polarization")?;
        Ok(Self { n, epsilon })
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > 12 {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n as f64,
            range: "1..=12",
        });
    }
    Ok(())
}

/// `(1−ε)/2ⁿ · I + ε |0…0><0…0|`
pub fn pps_state(spec: PseudoPureSpec) -> Result<DensityMatrix> {
    check_qubits(spec.n)?;
    check_unit_interval(spec.epsilon, "polarization")?;
    let dim = 1usize << spec.n;
    let mut m = ComplexMatrix::identity(dim).scale_re((1.0 - spec.epsilon) / dim as f64);
    m[(0, 0)] += spec.epsilon;
    DensityMatrix::new(m)
}

/// The traceless part `ρ − I/D` that carries every observable signal.
pub fn deviation_part(rho: &DensityMatrix) -> ComplexMatrix {
    let dim = rho.dim();
    rho.matrix() - &ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64)
}

/// `σ_z` on qubit `i` of `n`.
fn sigma_z_on(i: usize, n: usize) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = (0..n)
        .map(|j| if j == i { pauli::sigma_z() } else { pauli::identity() })
        .collect();
    tensor_all(&factors)
}

/// `I/2ⁿ + Σ_i ε_i σ_z^(i)`, rejected if not positive semidefinite.
pub fn thermal_state(polarizations: &[f64]) -> Result<DensityMatrix> {
    let n = polarizations.len();
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64);
    for (i, &eps) in polarizations.iter().enumerate() {
        if !eps.is_finite() {
            return Err(Error::OutOfRange {
                what: "polarization",
                value: eps,
                range: "finite",
            });
        }
        m += &sigma_z_on(i, n).scale_re(eps);
    }
    // Diagonal, so positivity is the smallest diagonal entry.
    let min = (0..dim).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    DensityMatrix::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn sigma(self) -> ComplexMatrix {
        match self {
            Axis::X => pauli::sigma_x(),
            Axis::Y => pauli::sigma_y(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeakObservable {
    pub axis: Axis,
    pub m: usize,
    pub n: usize,
    pub matrix: ComplexMatrix,
}

/// `σ_axis ⊗ |b><b|` where `b` is `m − 1` written in `n − 1` bits, most
/// significant bit first.
pub fn peak_observable(axis: Axis, m: usize, n: usize) -> Result<PeakObservable> {
    check_qubits(n)?;
    let peaks = 1usize << (n - 1);
    if m == 0 || m > peaks {
        return Err(Error::OutOfRange {
            what: "peak index",
            value: m as f64,
            range: "1..=2^(n-1)",
        });
    }
    let projector = ComplexMatrix::unit(peaks, m - 1, m - 1);
    Ok(PeakObservable {
        axis,
        m,
        n,
        matrix: axis.sigma().kron(&projector),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReading {
    pub m: usize,
    pub x: f64,
    pub y: f64,
}

fn require_qubits(rho: &DensityMatrix, n: usize) -> Result<()> {
    check_qubits(n)?;
    if rho.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            context: "joint state for peak readout",
            expected: 1 << n,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `<M_x^{m,n}>` and `<M_y^{m,n}>` for every peak `m = 1..2^{n−1}`.
pub fn peak_expectations(rho: &DensityMatrix, n: usize) -> Result<Vec<PeakReading>> {
    require_qubits(rho, n)?;
    (1..=1usize << (n - 1))
        .map(|m| {
            Ok(PeakReading {
                m,
                x: rho.expectation(&peak_observable(Axis::X, m, n)?.matrix),
                y: rho.expectation(&peak_observable(Axis::Y, m, n)?.matrix),
            })
        })
        .collect()
}

/// `exp(−i π/4 σ_y)`, which rotates `σ_z` magnetization onto `x`.
pub fn readout_pulse() -> ComplexMatrix {
    let (s, c) = FRAC_PI_4.sin_cos();
    ComplexMatrix::from_real_rows(&[[c, -s], [s, c]])
}

/// Applies the readout pulse to the system spin and sums the `x` peaks.
pub fn readout_z(rho: &DensityMatrix, n: usize) -> Result<f64> {
    require_qubits(rho, n)?;
    let pulse = readout_pulse().kron(&ComplexMatrix::identity(1 << (n - 1)));
    let rotated = rho.evolve(&pulse)?;
    Ok(peak_expectations(&rotated, n)?.iter().map(|p| p.x).sum())
}

/// `<σ_x>`, `<σ_y>` from the peaks and `<σ_z>` from the readout pulse.
pub fn system_expectations(rho: &DensityMatrix, n: usize) -> Result<BlochVector> {
    let peaks = peak_expectations(rho, n)?;
    Ok(BlochVector::new(
        peaks.iter().map(|p| p.x).sum(),
        peaks.iter().map(|p| p.y).sum(),
        readout_z(rho, n)?,
    ))
}

/// `ρ = ½(I + Σ_a (<M_a>/scale) σ_a)`; `scale = 1` gives the plain Bloch rule.
pub fn tomography_reconstruct(expectations: BlochVector, scale: f64) -> Result<DensityMatrix> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::OutOfRange {
            what: "tomography scale",
            value: scale,
            range: "(0, inf)",
        });
    }
    let v = BlochVector::new(
        expectations.x / scale,
        expectations.y / scale,
        expectations.z / scale,
    );
    for value in v.as_array() {
        if !(value.abs() <= 1.0 + EXPECTATION_TOL) {
            return Err(Error::OutOfRange {
                what: "expectation value",
                value,
                range: "[-1, 1]",
            });
        }
    }
    if v.norm() > 1.0 + BLOCH_NORM_TOL {
        return Err(Error::InvalidState(format!(
            "Bloch vector norm {} exceeds 1",
            v.norm()
        )));
    }
    // Tiny overshoots inside the tolerance are pulled back onto the sphere.
    let norm = v.norm();
    let v = if norm > 1.0 {
        BlochVector::new(v.x / norm, v.y / norm, v.z / norm)
    } else {
        v
    };
    state_from_bloch(v)
}

/// `√(Σ (sim − th)² / (M − 1))`
pub fn deviation_metric(sim: &[f64], th: &[f64]) -> Result<f64> {
    if sim.len() != th.len() {
        return Err(Error::LengthMismatch(sim.len(), th.len()));
    }
    if sim.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: sim.len(),
        });
    }
    let ss: f64 = sim.iter().zip(th).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((ss / (sim.len() - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::re;
    use crate::random::{random_mixed_state, random_pure_state};
    use crate::state::{bloch_vector, partial_trace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus_x() -> DensityMatrix {
        state_from_bloch(BlochVector::X).unwrap()
    }

    #[test]
    fn pps_examples() {
        let rho = pps_state(PseudoPureSpec::new(2, 1.0).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::basis(4, 0)) == 0.0);
        let rho = pps_state(PseudoPureSpec::new(1, 0.0).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(2)) == 0.0);
        assert!(PseudoPureSpec::new(2, 1.2).is_err());
        assert!(PseudoPureSpec::new(0, 0.5).is_err());
    }

    #[test]
    fn pps_deviation_part_and_linearity() {
        for n in 1..=3 {
            let p0 = pps_state(PseudoPureSpec { n, epsilon: 0.0 }).unwrap();
            let p1 = pps_state(PseudoPureSpec { n, epsilon: 1.0 }).unwrap();
            for eps in [0.1, 0.37, 0.9] {
                let rho = pps_state(PseudoPureSpec { n, epsilon: eps }).unwrap();
                assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
                let mix = &p0.matrix().scale_re(1.0 - eps) + &p1.matrix().scale_re(eps);
                assert!(rho.matrix().approx_eq(&mix, 1e-15));
                // ε |0><0| − ε I/D is the traceless remainder.
                let dim = 1 << n;
                let mut expected = ComplexMatrix::identity(dim).scale_re(-eps / dim as f64);
                expected[(0, 0)] += eps;
                assert!(deviation_part(&rho).approx_eq(&expected, 1e-15));
            }
        }
    }

    #[test]
    fn deviation_part_keeps_traceless_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_mixed_state(4, &mut rng);
        let obs = pauli::sigma_x().kron(&pauli::sigma_z());
        let dev = deviation_part(&rho);
        assert!((rho.expectation(&obs) - dev.matmul(&obs).trace().re).abs() < 1e-14);
    }

    #[test]
    fn thermal_examples() {
        let rho = thermal_state(&[0.0, 0.0, 0.0]).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(8)) == 0.0);

        let rho = thermal_state(&[0.1]).unwrap();
        let expected = ComplexMatrix::diagonal(&[re(0.6), re(0.4)]);
        assert!(rho.matrix().approx_eq(&expected, 1e-15));

        let rho = thermal_state(&[0.01, 0.002]).unwrap();
        let expected = ComplexMatrix::diagonal(&[re(0.262), re(0.258), re(0.242), re(0.238)]);
        assert!(rho.matrix().approx_eq(&expected, 1e-15));

        assert!(matches!(thermal_state(&[0.6]), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn peak_operators() {
        let p = peak_observable(Axis::X, 2, 3).unwrap();
        // m − 1 = 1 → b = 01, so the projector sits on ancilla index 1.
        let expected = pauli::sigma_x().kron(&ComplexMatrix::unit(4, 1, 1));
        assert!(p.matrix.approx_eq(&expected, 0.0));
        assert!(peak_observable(Axis::X, 0, 2).is_err());
        assert!(peak_observable(Axis::X, 3, 2).is_err());
    }

    #[test]
    fn peak_completeness_is_exact() {
        for n in 1..=4 {
            for axis in [Axis::X, Axis::Y] {
                let mut sum = ComplexMatrix::zeros(1 << n, 1 << n);
                for m in 1..=1 << (n - 1) {
                    sum += &peak_observable(axis, m, n).unwrap().matrix;
                }
                let full = axis.sigma().kron(&ComplexMatrix::identity(1 << (n - 1)));
                assert!(sum.approx_eq(&full, 0.0));
            }
        }
    }

    #[test]
    fn peak_examples() {
        let rho = plus_x().tensor(&DensityMatrix::basis(2, 0));
        let peaks = peak_expectations(&rho, 2).unwrap();
        assert!((peaks[0].x - 1.0).abs() < 1e-15);
        assert!(peaks[1].x.abs() < 1e-15);

        let rho = plus_x().tensor(&DensityMatrix::maximally_mixed(2));
        for p in peak_expectations(&rho, 2).unwrap() {
            assert!((p.x - 0.5).abs() < 1e-15);
        }
        assert!(peak_expectations(&rho, 3).is_err());
    }

    #[test]
    fn readout_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let anc = random_mixed_state(2, &mut rng);
        let up = DensityMatrix::basis(2, 0).tensor(&anc);
        assert!((readout_z(&up, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(readout_z(&plus_x().tensor(&anc), 2).unwrap().abs() < 1e-12);

        let z_full = pauli::sigma_z().kron(&ComplexMatrix::identity(4));
        for _ in 0..20 {
            let rho = random_mixed_state(8, &mut rng);
            assert!((readout_z(&rho, 3).unwrap() - rho.expectation(&z_full)).abs() < 1e-12);
        }
    }

    #[test]
    fn pulse_maps_z_to_x() {
        let r = readout_pulse();
        let back = r.adjoint().matmul(&pauli::sigma_x()).matmul(&r);
        assert!(back.approx_eq(&pauli::sigma_z(), 1e-15));
    }

    #[test]
    fn tomography_examples() {
        let rho = tomography_reconstruct(BlochVector::Z, 1.0).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::basis(2, 0)) < 1e-15);
        let rho = tomography_reconstruct(BlochVector::X, 1.0).unwrap();
        assert!(rho.max_abs_diff(&plus_x()) < 1e-15);
        let rho = tomography_reconstruct(BlochVector::new(4.0, 0.0, 0.0), 4.0).unwrap();
        assert!(rho.max_abs_diff(&plus_x()) < 1e-15);
        assert!(tomography_reconstruct(BlochVector::new(0.8, 0.8, 0.0), 1.0).is_err());
        assert!(tomography_reconstruct(BlochVector::new(1.5, 0.0, 0.0), 1.0).is_err());
        assert!(tomography_reconstruct(BlochVector::Z, 0.0).is_err());
    }

    #[test]
    fn tomography_matches_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            let anc_dim = 1 << (n - 1);
            for _ in 0..50 {
                let rho = random_mixed_state(1 << n, &mut rng);
                let v = system_expectations(&rho, n).unwrap();
                let rebuilt = tomography_reconstruct(v, 1.0).unwrap();
                let reduced = partial_trace(&rho, &[2, anc_dim], &[0]).unwrap();
                assert!(rebuilt.max_abs_diff(&reduced) < 1e-12);
            }
        }
    }

    #[test]
    fn tomography_recovers_product_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let sys = random_pure_state(2, &mut rng);
            let rho = sys.tensor(&DensityMatrix::basis(2, 0));
            let v = system_expectations(&rho, 2).unwrap();
            assert!(v.max_abs_diff(&bloch_vector(&sys).unwrap()) < 1e-12);
            let rebuilt = tomography_reconstruct(v, 1.0).unwrap();
            assert!(rebuilt.max_abs_diff(&sys) < 1e-12);
        }
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(deviation_metric(&[0.3, 0.2, 0.1], &[0.3, 0.2, 0.1]).unwrap(), 0.0);
        assert_eq!(deviation_metric(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(deviation_metric(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(deviation_metric(&[1.0], &[1.0]), Err(Error::TooFewSamples { .. })));
    }
}
