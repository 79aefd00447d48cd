//! Kraus-operator channels: completeness checks, direct application (the
//! reference every compiled plan is checked against) and the phase-damping,
//! amplitude-damping and depolarizing presets with their closed-form outputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pauli;
use crate::state::{BlochVector, DensityMatrix};

pub const CPTP_TOL: f64 = 1e-10;

/// Operators with Frobenius norm below this are dropped from presets.
pub const ZERO_OP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub max_deviation: f64,
    pub ok: bool,
}

/// Max entry of `Σ E†E − I`; `ok` iff it is below [`CPTP_TOL`].
pub fn validate_cptp(ops: &[ComplexMatrix]) -> CptpReport {
    let Some(first) = ops.first() else {
        return CptpReport {
            max_deviation: f64::INFINITY,
            ok: false,
        };
    };
    let dim = first.cols();
    if ops.iter().any(|e| e.rows() != dim || e.cols() != dim) {
        return CptpReport {
            max_deviation: f64::INFINITY,
            ok: false,
        };
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in ops {
        sum += &e.adjoint().matmul(e);
    }
    let max_deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    CptpReport {
        max_deviation,
        ok: max_deviation < CPTP_TOL,
    }
}

/// Ordered Kraus operators with a passed completeness check.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = ops.first().ok_or(Error::DimensionMismatch {
            context: "kraus operator count",
            expected: 1,
            found: 0,
        })?;
        let dim = first.require_square("kraus operator")?;
        for e in &ops {
            e.require_dim(dim, "kraus operator")?;
        }
        let report = validate_cptp(&ops);
        if !report.ok {
            return Err(Error::NotCptp {
                deviation: report.max_deviation,
            });
        }
        Ok(Self {
            dim,
            ops,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cptp_report(&self) -> CptpReport {
        validate_cptp(&self.ops)
    }

    /// `Σ_k E_k ρ E_k†` without any state validation.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.ops {
            out += &e.conjugate(rho);
        }
        out
    }

    fn without_zero_ops(mut self) -> Self {
        let keep: Vec<ComplexMatrix> = self
            .ops
            .iter()
            .filter(|e| e.frobenius_norm() >= ZERO_OP_TOL)
            .cloned()
            .collect();
        if !keep.is_empty() {
            self.ops = keep;
        }
        self
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            context: "apply channel",
            expected: ch.dim(),
            found: rho.dim(),
        });
    }
    DensityMatrix::from_output(ch.apply_matrix(rho.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    /// Phase damping, strength λ.
    Pd,
    /// Amplitude damping, strength λ.
    Ad,
    /// Depolarizing, probability p.
    Dep,
}

impl PresetKind {
    pub const ALL: [PresetKind; 3] = [PresetKind::Pd, PresetKind::Ad, PresetKind::Dep];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::Pd => "pd",
            PresetKind::Ad => "ad",
            PresetKind::Dep => "dep",
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pd" => Ok(PresetKind::Pd),
            "ad" => Ok(PresetKind::Ad),
            "dep" => Ok(PresetKind::Dep),
            other => Err(Error::UnknownName {
                kind: "channel",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPreset {
    pub kind: PresetKind,
    pub param: f64,
}

impl ChannelPreset {
    pub fn new(kind: PresetKind, param: f64) -> Result<Self> {
        check_unit_interval(param, "channel parameter")?;
        Ok(Self { kind, param })
    }
}

pub(crate) fn check_unit_interval(value: f64, what: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            range: "[0, 1]",
        })
    }
}

/// `sqrt(max(x, 0))`, absorbing tiny negative rounding.
#[inline]
pub(crate) fn clamped_sqrt(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

pub fn pd_kraus(lambda: f64) -> [ComplexMatrix; 2] {
    let keep = clamped_sqrt(1.0 - lambda);
    [
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, keep]]),
        ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, clamped_sqrt(lambda)]]),
    ]
}

pub fn ad_kraus(lambda: f64) -> [ComplexMatrix; 2] {
    [
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, clamped_sqrt(1.0 - lambda)]]),
        ComplexMatrix::from_real_rows(&[[0.0, clamped_sqrt(lambda)], [0.0, 0.0]]),
    ]
}

pub fn dep_kraus(p: f64) -> [ComplexMatrix; 4] {
    let w0 = clamped_sqrt(1.0 - 0.75 * p);
    let w = clamped_sqrt(p / 4.0);
    [
        pauli::identity().scale_re(w0),
        pauli::sigma_x().scale_re(w),
        pauli::sigma_y().scale_re(w),
        pauli::sigma_z().scale_re(w),
    ]
}

/// Lowering operator `|0><1|`.
pub fn lowering() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
}

/// Raising operator `|1><0|`.
pub fn raising() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]])
}

/// The parameter-free channel `{|0><1|, |1><0|}` whose first operator is the
/// amplitude-damping jump.
pub fn jump_pair_channel() -> KrausChannel {
    KrausChannel::new(vec![lowering(), raising()], "jump-pair").expect("complete by construction")
}

pub fn channel_preset(spec: ChannelPreset) -> Result<KrausChannel> {
    check_unit_interval(spec.param, "channel parameter")?;
    let (ops, label): (Vec<ComplexMatrix>, String) = match spec.kind {
        PresetKind::Pd => (pd_kraus(spec.param).into(), format!("pd({})", spec.param)),
        PresetKind::Ad => (ad_kraus(spec.param).into(), format!("ad({})", spec.param)),
        PresetKind::Dep => (dep_kraus(spec.param).into(), format!("dep({})", spec.param)),
    };
    Ok(KrausChannel::new(ops, label)?.without_zero_ops())
}

/// Amplitude damping written as `M0 ρ M0† + λ S0 ρ S0†`.
#[derive(Debug, Clone)]
pub struct AdSplit {
    pub m0: ComplexMatrix,
    pub jump: ComplexMatrix,
    pub weight: f64,
}

impl AdSplit {
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        &self.m0.conjugate(rho) + &self.jump.conjugate(rho).scale_re(self.weight)
    }
}

pub fn ad_split(lambda: f64) -> Result<AdSplit> {
    check_unit_interval(lambda, "lambda")?;
    let [m0, _] = ad_kraus(lambda);
    Ok(AdSplit {
        m0,
        jump: lowering(),
        weight: lambda,
    })
}

/// Closed-form output Bloch vector of a preset.
pub fn analytic_output(spec: ChannelPreset, v: BlochVector) -> Result<BlochVector> {
    check_unit_interval(spec.param, "channel parameter")?;
    let t = spec.param;
    Ok(match spec.kind {
        PresetKind::Pd => {
            let s = clamped_sqrt(1.0 - t);
            BlochVector::new(v.x * s, v.y * s, v.z)
        }
        PresetKind::Ad => {
            let s = clamped_sqrt(1.0 - t);
            BlochVector::new(v.x * s, v.y * s, v.z * (1.0 - t) + t)
        }
        PresetKind::Dep => {
            let k = 1.0 - t;
            BlochVector::new(v.x * k, v.y * k, v.z * k)
        }
    })
}
