//! Synthesis of dilation circuits from Kraus channels.
//!
//! Every circuit prepares the ancilla with `V|0>`, applies the select unitary
//! `Σ_i U_i ⊗ |i><i|` and mixes the ancilla with `W`. Three strategies are
//! available, tried in this order by [`Strategy::Auto`]:
//!
//! * diagonal chi: the channel is a mixture of basis unitaries, `V_i0 = √χ_ii`
//!   and `W = I`;
//! * kraus-matched: one ancilla outcome per Kraus operator, valid when the
//!   active coefficient columns are orthogonal and as many as the operators;
//! * branch: one post-selected circuit per Kraus operator, recombined with
//!   classical weights. Always applicable.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{
    basis_for, coefficient_matrix, BasisKind, UnitaryBasis, ACTIVE_COLUMN_TOL, CHI_DIAGONAL_TOL,
};
use crate::channel::{
    channel_preset, check_unit_interval, clamped_sqrt, ChannelPreset, KrausChannel, PresetKind,
};
use crate::error::{Error, Result};
use crate::matrix::{re, ComplexMatrix, I, ONE};
use crate::pauli;

/// Unitarity tolerance accepted when building a circuit.
pub const CIRCUIT_UNITARY_TOL: f64 = 1e-10;
/// Column-orthogonality tolerance of the kraus-matched strategy.
pub const COLUMN_ORTHOGONALITY_TOL: f64 = 1e-10;

/// `V`, `W` and the controlled unitaries of one dilation.
#[derive(Debug, Clone)]
pub struct DilationCircuit {
    v: ComplexMatrix,
    w: ComplexMatrix,
    unitaries: Vec<ComplexMatrix>,
}

impl DilationCircuit {
    pub fn new(v: ComplexMatrix, w: ComplexMatrix, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let d = unitaries.len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                context: "controlled unitary count",
                expected: 1,
                found: 0,
            });
        }
        v.require_dim(d, "ancilla preparation V")?;
        w.require_dim(d, "ancilla recombination W")?;
        let sys = unitaries[0].require_square("controlled unitary")?;
        for u in &unitaries {
            u.require_dim(sys, "controlled unitary")?;
        }
        check_unitary(&v, "V")?;
        check_unitary(&w, "W")?;
        for (i, u) in unitaries.iter().enumerate() {
            check_unitary(u, &format!("U_{i}"))?;
        }
        Ok(Self { v, w, unitaries })
    }

    pub fn system_dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.unitaries.len()
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// `(WV)_k0 = Σ_i W_ki V_i0`, bounded by 1 in modulus.
    pub fn outcome_amplitudes(&self) -> Vec<Complex64> {
        let wv = self.w.matmul(&self.v);
        wv.column(0)
    }

    /// Returns a copy with a different `V`, re-validated.
    pub fn with_v(&self, v: ComplexMatrix) -> Result<Self> {
        Self::new(v, self.w.clone(), self.unitaries.clone())
    }
}

fn check_unitary(m: &ComplexMatrix, what: &str) -> Result<()> {
    let residual = m.unitarity_residual();
    if residual > CIRCUIT_UNITARY_TOL {
        return Err(Error::NotUnitary {
            what: what.to_string(),
            residual,
        });
    }
    Ok(())
}

/// What is done with the ancilla after a circuit runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomePolicy {
    /// Sum over every ancilla outcome (partial trace).
    TraceAll,
    /// Keep only the listed outcomes, each scaled by a classical weight.
    SelectOutcomes(Vec<(usize, f64)>),
}

#[derive(Debug, Clone)]
pub struct PlannedCircuit {
    pub circuit: DilationCircuit,
    pub policy: OutcomePolicy,
}

/// One or more dilation circuits whose (weighted) outputs add up to the
/// channel output.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    label: String,
    circuits: Vec<PlannedCircuit>,
}

impl SimulationPlan {
    pub fn new(label: impl Into<String>, circuits: Vec<PlannedCircuit>) -> Result<Self> {
        let first = circuits.first().ok_or(Error::DimensionMismatch {
            context: "plan circuit count",
            expected: 1,
            found: 0,
        })?;
        let sys = first.circuit.system_dim();
        for pc in &circuits {
            if pc.circuit.system_dim() != sys {
                return Err(Error::DimensionMismatch {
                    context: "plan system dimension",
                    expected: sys,
                    found: pc.circuit.system_dim(),
                });
            }
            if let OutcomePolicy::SelectOutcomes(sel) = &pc.policy {
                for &(k, w) in sel {
                    if k >= pc.circuit.ancilla_dim() {
                        return Err(Error::OutcomeOutOfRange {
                            outcome: k,
                            dim: pc.circuit.ancilla_dim(),
                        });
                    }
                    if !(w >= 0.0) {
                        return Err(Error::NegativeWeight(w));
                    }
                }
            }
        }
        Ok(Self {
            label: label.into(),
            circuits,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn circuits(&self) -> &[PlannedCircuit] {
        &self.circuits
    }

    pub fn system_dim(&self) -> usize {
        self.circuits[0].circuit.system_dim()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PlanDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlanDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    ancilla_dim: usize,
    #[serde(rename = "V")]
    v: ComplexMatrix,
    #[serde(rename = "W")]
    w: ComplexMatrix,
    unitaries: Vec<ComplexMatrix>,
    policy: OutcomePolicy,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    label: String,
    circuits: Vec<CircuitDoc>,
}

impl From<&SimulationPlan> for PlanDoc {
    fn from(plan: &SimulationPlan) -> Self {
        PlanDoc {
            label: plan.label.clone(),
            circuits: plan
                .circuits
                .iter()
                .map(|pc| CircuitDoc {
                    ancilla_dim: pc.circuit.ancilla_dim(),
                    v: pc.circuit.v.clone(),
                    w: pc.circuit.w.clone(),
                    unitaries: pc.circuit.unitaries.clone(),
                    policy: pc.policy.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PlanDoc> for SimulationPlan {
    type Error = Error;

    fn try_from(doc: PlanDoc) -> Result<Self> {
        let circuits = doc
            .circuits
            .into_iter()
            .map(|c| {
                if c.ancilla_dim != c.unitaries.len() {
                    return Err(Error::Malformed(format!(
                        "ancilla_dim {} but {} unitaries",
                        c.ancilla_dim,
                        c.unitaries.len()
                    )));
                }
                Ok(PlannedCircuit {
                    circuit: DilationCircuit::new(c.v, c.w, c.unitaries)?,
                    policy: c.policy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SimulationPlan::new(doc.label, circuits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Diagonal,
    Matched,
    Branch,
    /// The hand-built circuits for the three presets.
    Paper,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Auto,
        Strategy::Diagonal,
        Strategy::Matched,
        Strategy::Branch,
        Strategy::Paper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::Diagonal => "diagonal",
            Strategy::Matched => "matched",
            Strategy::Branch => "branch",
            Strategy::Paper => "paper",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or(Error::UnknownName {
                kind: "strategy",
                name: s,
            })
    }
}

/// Deterministic unitary whose first column is `v`.
///
/// A Householder reflection sends `e_0` to `e^{-iφ} v`, where `φ` is the
/// phase of `v_0`, and the result is rescaled by `e^{iφ}`. When `v` is
/// already `e_0` up to that phase, the reflection is the identity.
pub fn complete_unitary(v: &[Complex64]) -> Result<ComplexMatrix> {
    let d = v.len();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if d == 0 || !((norm - 1.0).abs() < 1e-10) {
        return Err(Error::NonUnitVector { norm });
    }
    let phase = if v[0].norm() > 0.0 {
        v[0] / v[0].norm()
    } else {
        ONE
    };
    let rotated: Vec<Complex64> = v.iter().map(|&z| z * phase.conj()).collect();
    // u = e_0 − rotated; reflection I − 2uu†/(u†u)
    let mut u = rotated.iter().map(|z| -z).collect::<Vec<_>>();
    u[0] += ONE;
    let u_norm_sqr: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let mut h = ComplexMatrix::identity(d);
    if u_norm_sqr > 1e-30 {
        let outer = ComplexMatrix::outer(&u, &u).scale_re(2.0 / u_norm_sqr);
        h = &h - &outer;
    }
    // Pin column 0 to the requested vector exactly.
    let mut out = h.scale(phase);
    out.set_column(0, v);
    Ok(out)
}

/// `(F†)_{jk} = ω^{-jk} / √d`; the first row is constant `1/√d`.
pub fn fourier_adjoint(d: usize) -> ComplexMatrix {
    let mut w = ComplexMatrix::zeros(d, d);
    let scale = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        for k in 0..d {
            let angle = -2.0 * PI * ((j * k) % d) as f64 / d as f64;
            w[(j, k)] = Complex64::from_polar(scale, angle);
        }
    }
    w
}

fn inapplicable(strategy: &'static str, reason: impl Into<String>) -> Error {
    Error::StrategyInapplicable {
        strategy,
        reason: reason.into(),
    }
}

/// Mixture-of-unitaries channels: `V_i0 = √χ_ii`, `W = I`.
pub fn compile_diagonal_chi(ch: &KrausChannel, basis: &UnitaryBasis) -> Result<SimulationPlan> {
    let coeffs = coefficient_matrix(ch, basis)?;
    let active = coeffs.active_columns();
    let chi = coeffs.restrict_columns(&active).chi();
    let off = chi.max_off_diagonal();
    if off >= CHI_DIAGONAL_TOL {
        return Err(inapplicable(
            "diagonal",
            format!("chi has off-diagonal magnitude {off:.3e}"),
        ));
    }
    let v: Vec<Complex64> = chi
        .diagonal()
        .into_iter()
        .map(|x| re(clamped_sqrt(x)))
        .collect();
    let d = v.len();
    let circuit = DilationCircuit::new(
        complete_unitary(&v)?,
        ComplexMatrix::identity(d),
        active.iter().map(|&i| basis.element(i).clone()).collect(),
    )?;
    SimulationPlan::new(
        format!("{} [diagonal]", ch.label()),
        vec![PlannedCircuit {
            circuit,
            policy: OutcomePolicy::TraceAll,
        }],
    )
}

/// One outcome per Kraus operator: `V_i0 = ‖c_{·i}‖`, `W_ki = c_ki / V_i0`.
///
/// Each active basis element is rephased so that the first non-negligible
/// entry of its coefficient column is real and positive.
pub fn compile_kraus_matched(ch: &KrausChannel, basis: &UnitaryBasis) -> Result<SimulationPlan> {
    let coeffs = coefficient_matrix(ch, basis)?;
    let active = coeffs.active_columns();
    let k_count = coeffs.kraus_count();
    let d = active.len();
    if k_count != d {
        return Err(inapplicable(
            "matched",
            format!("{k_count} Kraus operators but {d} active basis elements"),
        ));
    }
    let sub = coeffs.restrict_columns(&active);
    let columns: Vec<Vec<Complex64>> = (0..d).map(|j| sub.0.column(j)).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            let overlap: Complex64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            if overlap.norm() >= COLUMN_ORTHOGONALITY_TOL {
                return Err(inapplicable(
                    "matched",
                    format!("coefficient columns {i} and {j} overlap by {:.3e}", overlap.norm()),
                ));
            }
        }
    }

    let mut v = Vec::with_capacity(d);
    let mut w = ComplexMatrix::zeros(d, d);
    let mut unitaries = Vec::with_capacity(d);
    for (j, col) in columns.iter().enumerate() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateColumn { index: j, norm });
        }
        let lead = col
            .iter()
            .find(|z| z.norm() > ACTIVE_COLUMN_TOL)
            .copied()
            .unwrap_or(ONE);
        let phase = lead / lead.norm();
        for (k, &c) in col.iter().enumerate() {
            w[(k, j)] = c * phase.conj() / norm;
        }
        v.push(re(norm));
        unitaries.push(basis.element(active[j]).scale(phase));
    }
    let circuit = DilationCircuit::new(complete_unitary(&v)?, w, unitaries)?;
    SimulationPlan::new(
        format!("{} [matched]", ch.label()),
        vec![PlannedCircuit {
            circuit,
            policy: OutcomePolicy::TraceAll,
        }],
    )
}

/// One post-selected circuit per Kraus operator. Outcome 0 of circuit `k`
/// carries `E_k / (√d_k s_k)`, restored by the classical weight `d_k s_k²`.
pub fn compile_branch(ch: &KrausChannel, basis: &UnitaryBasis) -> Result<SimulationPlan> {
    let coeffs = coefficient_matrix(ch, basis)?;
    let mut circuits = Vec::with_capacity(coeffs.kraus_count());
    for k in 0..coeffs.kraus_count() {
        let row = coeffs.0.row(k);
        let active: Vec<usize> = (0..row.len())
            .filter(|&i| row[i].norm() > ACTIVE_COLUMN_TOL)
            .collect();
        let s = active.iter().map(|&i| row[i].norm_sqr()).sum::<f64>().sqrt();
        if s < 1e-14 {
            return Err(Error::ZeroRow { index: k });
        }
        let d = active.len();
        let v: Vec<Complex64> = active.iter().map(|&i| row[i] / s).collect();
        let circuit = DilationCircuit::new(
            complete_unitary(&v)?,
            fourier_adjoint(d),
            active.iter().map(|&i| basis.element(i).clone()).collect(),
        )?;
        circuits.push(PlannedCircuit {
            circuit,
            policy: OutcomePolicy::SelectOutcomes(vec![(0, d as f64 * s * s)]),
        });
    }
    SimulationPlan::new(format!("{} [branch]", ch.label()), circuits)
}

pub fn compile(ch: &KrausChannel, basis: &UnitaryBasis, strategy: Strategy) -> Result<SimulationPlan> {
    match strategy {
        Strategy::Diagonal => compile_diagonal_chi(ch, basis),
        Strategy::Matched => compile_kraus_matched(ch, basis),
        Strategy::Branch => compile_branch(ch, basis),
        Strategy::Auto => match compile_diagonal_chi(ch, basis) {
            Err(Error::StrategyInapplicable { .. }) => match compile_kraus_matched(ch, basis) {
                Err(Error::StrategyInapplicable { .. }) => compile_branch(ch, basis),
                other => other,
            },
            other => other,
        },
        Strategy::Paper => Err(inapplicable(
            "paper",
            "only the pd, ad and dep presets have hand-built circuits",
        )),
    }
}

/// Compiles a preset with any strategy, `Paper` included.
pub fn compile_preset(preset: ChannelPreset, strategy: Strategy, basis: BasisKind) -> Result<SimulationPlan> {
    if strategy == Strategy::Paper {
        return paper_preset(preset.kind, preset.param);
    }
    let ch = channel_preset(preset)?;
    compile(&ch, &basis_for(basis, ch.dim())?, strategy)
}

/// The phase-damping `V = W` with `U_0 = I`, `U_1 = σz`.
pub fn phase_damping_vw(lambda: f64) -> ComplexMatrix {
    let s = clamped_sqrt(1.0 - lambda);
    let a = clamped_sqrt((1.0 + s) / 2.0);
    let b = clamped_sqrt((1.0 - s) / 2.0);
    ComplexMatrix::from_real_rows(&[[a, b], [b, -a]])
}

/// The Hadamard-like `V = W` used with `U_0 = σx`, `U_1 = iσy`.
pub fn jump_vw() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[[h, h], [h, -h]])
}

/// The depolarizing ancilla preparation; its first column is
/// `(√(1−3p/4), √(p/4), √(p/4), √(p/4))`.
pub fn depolarizing_v(p: f64) -> ComplexMatrix {
    let q = p / 4.0;
    let a = clamped_sqrt(1.0 - 3.0 * q);
    let sq = clamped_sqrt(q);
    let one_q = 1.0 - q;
    let half = 1.0 - p / 2.0;
    ComplexMatrix::from_real_rows(&[
        [
            a,
            -clamped_sqrt(q * (1.0 - 3.0 * q) / one_q),
            -clamped_sqrt(q * (1.0 - 3.0 * q) / (one_q * half)),
            -clamped_sqrt(p / (4.0 - 2.0 * p)),
        ],
        [sq, clamped_sqrt(one_q), 0.0, 0.0],
        [sq, -p / (4.0 * one_q.sqrt()), clamped_sqrt(half / one_q), 0.0],
        [
            sq,
            -p / (4.0 * one_q.sqrt()),
            -p / (4.0 * (one_q * half).sqrt()),
            clamped_sqrt((4.0 - 3.0 * p) / (4.0 - 2.0 * p)),
        ],
    ])
}

/// The hand-built circuits: phase damping as one trace-all circuit, amplitude
/// damping as two post-selected runs (`M_0` part and the λ-weighted jump),
/// depolarizing with the explicit 4×4 `V` and `W = I`.
pub fn paper_preset(kind: PresetKind, param: f64) -> Result<SimulationPlan> {
    check_unit_interval(param, "channel parameter")?;
    let label = format!("{kind}({param}) [paper]");
    let pd_circuit = || {
        let vw = phase_damping_vw(param);
        DilationCircuit::new(vw.clone(), vw, vec![pauli::identity(), pauli::sigma_z()])
    };
    let circuits = match kind {
        PresetKind::Pd => vec![PlannedCircuit {
            circuit: pd_circuit()?,
            policy: OutcomePolicy::TraceAll,
        }],
        PresetKind::Ad => {
            let jump = DilationCircuit::new(
                jump_vw(),
                jump_vw(),
                vec![pauli::sigma_x(), pauli::sigma_y().scale(I)],
            )?;
            vec![
                PlannedCircuit {
                    circuit: pd_circuit()?,
                    policy: OutcomePolicy::SelectOutcomes(vec![(0, 1.0)]),
                },
                PlannedCircuit {
                    circuit: jump,
                    policy: OutcomePolicy::SelectOutcomes(vec![(0, param)]),
                },
            ]
        }
        PresetKind::Dep => vec![PlannedCircuit {
            circuit: DilationCircuit::new(
                depolarizing_v(param),
                ComplexMatrix::identity(4),
                vec![
                    pauli::identity(),
                    pauli::sigma_x(),
                    pauli::sigma_y(),
                    pauli::sigma_z(),
                ],
            )?,
            policy: OutcomePolicy::TraceAll,
        }],
    };
    SimulationPlan::new(label, circuits)
}

/// Absolute value of the largest `(WV)_k0`.
pub fn max_outcome_amplitude(c: &DilationCircuit) -> f64 {
    c.outcome_amplitudes()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
