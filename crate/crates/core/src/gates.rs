//! Decomposition of multi-controlled Pauli-product gates into single-qubit
//! gates and CNOTs, with gate counting and matrix reconstruction.
//!
//! Wire 0 is the most significant qubit of the reconstructed matrix. For
//! `decompose_controlled(m, u)` the controls occupy wires `0..m` and the
//! target factors wires `m..m+n`, major factor first.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{tensor_all, ComplexMatrix, ONE};
use crate::pauli::{self, parse_pauli_string};

pub const MAX_WIRES: usize = 12;
const SINGLE_UNITARY_TOL: f64 = 1e-12;
const IDENTITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Single { wire: usize, matrix: ComplexMatrix },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn single(wire: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch {
                context: "single-qubit gate",
                expected: 2,
                found: matrix.rows(),
            });
        }
        let residual = matrix.unitarity_residual();
        if residual > SINGLE_UNITARY_TOL {
            return Err(Error::NotUnitary {
                what: format!("gate on wire {wire}"),
                residual,
            });
        }
        Ok(Gate::Single { wire, matrix })
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(Error::Malformed(format!("CNOT with control = target = {control}")));
        }
        Ok(Gate::Cnot { control, target })
    }

    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::Single { wire, .. } => vec![*wire],
            Gate::Cnot { control, target } => vec![*control, *target],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateList {
    wires: usize,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn new(wires: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            if let Some(&w) = g.wires().iter().find(|&&w| w >= wires) {
                return Err(Error::OutcomeOutOfRange { outcome: w, dim: wires });
            }
        }
        Ok(Self { wires, gates })
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GateListDoc {
            wires: self.wires,
            gates: self
                .gates
                .iter()
                .map(|g| match g {
                    Gate::Single { wire, matrix } => GateDoc {
                        kind: GateKind::Single,
                        wires: vec![*wire],
                        matrix: Some(matrix.clone()),
                    },
                    Gate::Cnot { control, target } => GateDoc {
                        kind: GateKind::Cnot,
                        wires: vec![*control, *target],
                        matrix: None,
                    },
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GateListDoc = serde_json::from_str(text)?;
        let gates = doc
            .gates
            .into_iter()
            .map(|g| match (g.kind, g.wires.as_slice(), g.matrix) {
                (GateKind::Single, &[w], Some(m)) => Gate::single(w, m),
                (GateKind::Cnot, &[ctl, tgt], None) => Gate::cnot(ctl, tgt),
                (kind, wires, _) => Err(Error::Malformed(format!(
                    "{kind:?} gate with wires {wires:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        GateList::new(doc.wires, gates)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GateKind {
    Single,
    Cnot,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    kind: GateKind,
    wires: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    matrix: Option<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct GateListDoc {
    wires: usize,
    gates: Vec<GateDoc>,
}

/// `global_phase · (factors[0] ⊗ factors[1] ⊗ ...)`
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    factors: Vec<ComplexMatrix>,
    global_phase: Complex64,
}

impl LocalUnitary {
    pub fn new(factors: Vec<ComplexMatrix>, global_phase: Complex64) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "local unitary factor count",
                expected: 1,
                found: 0,
            });
        }
        for (i, f) in factors.iter().enumerate() {
            f.require_dim(2, "local unitary factor")?;
            let residual = f.unitarity_residual();
            if residual > SINGLE_UNITARY_TOL {
                return Err(Error::NotUnitary {
                    what: format!("factor {i}"),
                    residual,
                });
            }
        }
        if (global_phase.norm() - 1.0).abs() > SINGLE_UNITARY_TOL {
            return Err(Error::NonUnitVector {
                norm: global_phase.norm(),
            });
        }
        Ok(Self {
            factors,
            global_phase,
        })
    }

    /// Parses a Pauli product such as `"ZX"`.
    pub fn pauli_product(s: &str) -> Result<Self> {
        let paulis = parse_pauli_string(s).ok_or_else(|| Error::UnknownName {
            kind: "Pauli product",
            name: s.to_string(),
        })?;
        Self::new(paulis.into_iter().map(|p| p.matrix()).collect(), ONE)
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn global_phase(&self) -> Complex64 {
        self.global_phase
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        tensor_all(&self.factors).scale(self.global_phase)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|f| f.adjoint()).collect(),
            global_phase: self.global_phase.conj(),
        }
    }

    /// Factors with the global phase folded into the first one.
    fn absorbed_factors(&self) -> Vec<ComplexMatrix> {
        let mut out = self.factors.clone();
        out[0] = out[0].scale(self.global_phase);
        out
    }
}

/// Principal square root with the eigenphase `−π` mapped to `+π`.
fn principal_sqrt(z: Complex64) -> Complex64 {
    let mut phase = z.arg();
    if phase <= -PI + 1e-12 {
        phase = PI;
    }
    Complex64::from_polar(z.norm().sqrt(), phase / 2.0)
}

/// Principal square root of a 2×2 unitary.
pub fn sqrt_single(u: &ComplexMatrix) -> ComplexMatrix {
    let tr = u.trace();
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let s1 = principal_sqrt((tr + disc) / 2.0);
    let s2 = principal_sqrt((tr - disc) / 2.0);
    // (U + s1 s2 I) has eigenvalues s_i (s1 + s2); s1 + s2 ≠ 0 on the principal branch.
    let shifted = u + &ComplexMatrix::identity(2).scale(s1 * s2);
    shifted.scale(ONE / (s1 + s2))
}

/// Factor-wise principal square root; the global phase is rooted separately.
pub fn local_sqrt(u: &LocalUnitary) -> LocalUnitary {
    LocalUnitary {
        factors: u.factors.iter().map(sqrt_single).collect(),
        global_phase: principal_sqrt(u.global_phase),
    }
}

fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::from_polar(1.0, theta / 2.0),
    ])
}

fn ry(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[[co, -s], [s, co]])
}

/// `U = e^{iα} Rz(β) Ry(γ) Rz(δ)`
#[derive(Debug, Clone, Copy)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

pub fn zyz_angles(u: &ComplexMatrix) -> ZyzAngles {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.arg() / 2.0;
    let phase = Complex64::from_polar(1.0, -alpha);
    let a = u[(0, 0)] * phase;
    let b = u[(1, 0)] * phase;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let (arg_a, arg_b) = (a.arg(), b.arg());
    ZyzAngles {
        alpha,
        beta: arg_b - arg_a,
        gamma,
        delta: -arg_a - arg_b,
    }
}

fn is_identity(m: &ComplexMatrix) -> bool {
    m.approx_eq(&ComplexMatrix::identity(2), IDENTITY_TOL)
}

struct Builder {
    wires: usize,
    gates: Vec<Gate>,
}

impl Builder {
    fn single(&mut self, wire: usize, m: ComplexMatrix) {
        if !is_identity(&m) {
            self.gates.push(Gate::Single { wire, matrix: m });
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        self.gates.push(Gate::Cnot { control, target });
    }

    /// Controlled single-qubit gate: `C, CNOT, B, CNOT, A` on the target and
    /// `diag(1, e^{iα})` on the control, with `ABC = I`.
    fn controlled_single(&mut self, control: usize, target: usize, u: &ComplexMatrix) {
        if is_identity(u) {
            return;
        }
        // A multiple of X only needs the CNOT and a phase on the control.
        let x = pauli::sigma_x();
        let factor = u[(0, 1)];
        if (factor.norm() - 1.0).abs() < IDENTITY_TOL && u.approx_eq(&x.scale(factor), IDENTITY_TOL) {
            self.cnot(control, target);
            self.single(control, ComplexMatrix::diagonal(&[ONE, factor]));
            return;
        }
        let ZyzAngles {
            alpha,
            beta,
            gamma,
            delta,
        } = zyz_angles(u);
        let a = rz(beta).matmul(&ry(gamma / 2.0));
        let b = ry(-gamma / 2.0).matmul(&rz(-(delta + beta) / 2.0));
        let cc = rz((delta - beta) / 2.0);
        self.single(target, cc);
        self.cnot(control, target);
        self.single(target, b);
        self.cnot(control, target);
        self.single(target, a);
        self.single(control, ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, alpha)]));
    }

    /// Exact Toffoli with 6 CNOTs.
    fn toffoli(&mut self, a: usize, b: usize, t: usize) {
        let h = hadamard();
        let tg = t_gate();
        let tdg = tg.adjoint();
        self.single(t, h.clone());
        self.cnot(b, t);
        self.single(t, tdg.clone());
        self.cnot(a, t);
        self.single(t, tg.clone());
        self.cnot(b, t);
        self.single(t, tdg.clone());
        self.cnot(a, t);
        self.single(b, tg.clone());
        self.single(t, tg.clone());
        self.single(t, h);
        self.cnot(a, b);
        self.single(a, tg);
        self.single(b, tdg);
        self.cnot(a, b);
    }

    fn idle_wires(&self, busy: &[usize]) -> Vec<usize> {
        (0..self.wires).filter(|w| !busy.contains(w)).collect()
    }

    /// Multi-controlled X. Idle wires are borrowed in an arbitrary state
    /// and returned unchanged, so no extra wires are needed.
    fn multi_x(&mut self, controls: &[usize], target: usize) {
        let k = controls.len();
        match k {
            0 => self.single(target, pauli::sigma_x()),
            1 => self.cnot(controls[0], target),
            2 => self.toffoli(controls[0], controls[1], target),
            _ => {
                let mut busy = controls.to_vec();
                busy.push(target);
                let spare = self.idle_wires(&busy);
                if spare.len() >= k - 2 {
                    self.toffoli_chain(controls, &spare[..k - 2], target);
                } else if let Some(&anc) = spare.first() {
                    let (c1, c2) = controls.split_at(k.div_ceil(2));
                    let mut c2a = c2.to_vec();
                    c2a.push(anc);
                    for _ in 0..2 {
                        self.multi_x(c1, anc);
                        self.multi_x(&c2a, target);
                    }
                } else {
                    let x = LocalUnitary {
                        factors: vec![pauli::sigma_x()],
                        global_phase: ONE,
                    };
                    self.barenco(controls, &[target], &x);
                }
            }
        }
    }

    /// `4(k−2)` Toffolis with `k−2` borrowed wires.
    fn toffoli_chain(&mut self, x: &[usize], a: &[usize], t: usize) {
        let k = x.len();
        // Toffoli(x_i, a_{i-2}; a_{i-1}), with t standing in for a_{k-2}.
        let step = |b: &mut Builder, i: usize| {
            let tgt = if i == k - 1 { t } else { a[i - 1] };
            b.toffoli(x[i], a[i - 2], tgt);
        };
        for i in (2..k).rev() {
            step(self, i);
        }
        self.toffoli(x[0], x[1], a[0]);
        for i in 2..k {
            step(self, i);
        }
        for i in (2..k - 1).rev() {
            step(self, i);
        }
        self.toffoli(x[0], x[1], a[0]);
        for i in 2..k - 1 {
            step(self, i);
        }
    }

    /// Routes a bare `X` target to `multi_x`, everything else to `barenco`.
    fn controlled(&mut self, controls: &[usize], targets: &[usize], u: &LocalUnitary) {
        if let [t] = targets {
            if u.absorbed_factors()[0].max_abs_diff(&pauli::sigma_x()) < IDENTITY_TOL {
                self.multi_x(controls, *t);
                return;
            }
        }
        self.barenco(controls, targets, u);
    }

    fn barenco(&mut self, controls: &[usize], targets: &[usize], u: &LocalUnitary) {
        match controls {
            [] => {
                for (&w, f) in targets.iter().zip(u.absorbed_factors()) {
                    self.gates.push(Gate::Single { wire: w, matrix: f });
                }
            }
            [c] => {
                for (&w, f) in targets.iter().zip(u.absorbed_factors()) {
                    self.controlled_single(*c, w, &f);
                }
            }
            [rest @ .., last] => {
                let m = local_sqrt(u);
                let m_dag = m.adjoint();
                self.barenco(&[*last], targets, &m);
                self.multi_x(rest, *last);
                self.barenco(&[*last], targets, &m_dag);
                self.multi_x(rest, *last);
                self.barenco(rest, targets, &m);
            }
        }
    }
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[[h, h], [h, -h]])
}

pub fn t_gate() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, PI / 4.0)])
}

fn check_budget(wires: usize) -> Result<()> {
    if wires > MAX_WIRES {
        return Err(Error::WireBudget {
            wires,
            max: MAX_WIRES,
        });
    }
    Ok(())
}

/// `C_m(U)` on `m + n` wires: controls `0..m`, target factors `m..m+n`.
pub fn decompose_controlled(m: usize, target: &LocalUnitary) -> Result<GateList> {
    let wires = m + target.qubits();
    check_budget(wires)?;
    let controls: Vec<usize> = (0..m).collect();
    let targets: Vec<usize> = (m..wires).collect();
    let mut b = Builder {
        wires,
        gates: Vec::new(),
    };
    b.controlled(&controls, &targets, target);
    GateList::new(wires, b.gates)
}

/// `C_k(X)` on `k + 1` wires with the target last.
pub fn decompose_multi_x(k: usize) -> Result<GateList> {
    let wires = k + 1;
    check_budget(wires)?;
    let controls: Vec<usize> = (0..k).collect();
    let mut b = Builder {
        wires,
        gates: Vec::new(),
    };
    b.multi_x(&controls, k);
    GateList::new(wires, b.gates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GateCounts {
    pub single: usize,
    pub cnot: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.single + self.cnot
    }
}

pub fn count_gates(g: &GateList) -> GateCounts {
    let mut counts = GateCounts::default();
    for gate in &g.gates {
        match gate {
            Gate::Single { .. } => counts.single += 1,
            Gate::Cnot { .. } => counts.cnot += 1,
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMethod {
    Lcu,
    Stinespring,
}

/// Asymptotic gate-count model (not a measured count):
/// `lcu(n) = 8n³2^{4n} + n²2^{2n}`, `stinespring(n) = 27n³2^{6n}`.
pub fn cost_model(method: CostMethod, n: u32) -> f64 {
    let nf = n as f64;
    match method {
        CostMethod::Lcu => 8.0 * nf.powi(3) * 2f64.powi(4 * n as i32) + nf * nf * 2f64.powi(2 * n as i32),
        CostMethod::Stinespring => 27.0 * nf.powi(3) * 2f64.powi(6 * n as i32),
    }
}

/// Applies `gate` from the left to `m` (a `2^q`-row, row-major matrix).
fn apply_gate(m: &mut ComplexMatrix, gate: &Gate, wires: usize) {
    let dim = m.rows();
    let cols = m.cols();
    let bit = |w: usize| 1usize << (wires - 1 - w);
    let data = m.as_mut_slice();
    match gate {
        Gate::Single { wire, matrix } => {
            let mask = bit(*wire);
            let (g00, g01, g10, g11) = (matrix[(0, 0)], matrix[(0, 1)], matrix[(1, 0)], matrix[(1, 1)]);
            for r in (0..dim).filter(|r| r & mask == 0) {
                let (head, tail) = data.split_at_mut((r | mask) * cols);
                let row0 = &mut head[r * cols..(r + 1) * cols];
                let row1 = &mut tail[..cols];
                for (x0, x1) in row0.iter_mut().zip(row1.iter_mut()) {
                    let (a, b) = (*x0, *x1);
                    *x0 = g00 * a + g01 * b;
                    *x1 = g10 * a + g11 * b;
                }
            }
        }
        Gate::Cnot { control, target } => {
            let (cm, tm) = (bit(*control), bit(*target));
            for r in (0..dim).filter(|r| r & cm != 0 && r & tm == 0) {
                let (head, tail) = data.split_at_mut((r | tm) * cols);
                head[r * cols..(r + 1) * cols].swap_with_slice(&mut tail[..cols]);
            }
        }
    }
}

/// Product of the gate embeddings, first gate rightmost.
pub fn reconstruct(g: &GateList) -> Result<ComplexMatrix> {
    check_budget(g.wires)?;
    let mut m = ComplexMatrix::identity(1 << g.wires);
    for gate in &g.gates {
        apply_gate(&mut m, gate, g.wires);
    }
    Ok(m)
}

/// `(I − P) ⊗ I + P ⊗ U` with `P = |1…1><1…1|` on the `m` controls.
pub fn controlled_reference(m: usize, u: &ComplexMatrix) -> ComplexMatrix {
    let cdim = 1usize << m;
    let tdim = u.rows();
    let mut out = ComplexMatrix::identity(cdim * tdim);
    let base = (cdim - 1) * tdim;
    for i in 0..tdim {
        for j in 0..tdim {
            out[(base + i, base + j)] = u[(i, j)];
        }
    }
    out
}
