//! Exact execution of simulation plans.
//!
//! Composite indices are `system · d + ancilla` (system major) everywhere.

use rand::Rng;

use crate::channel::{apply_channel, KrausChannel};
use crate::compiler::{DilationCircuit, OutcomePolicy, SimulationPlan};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::random::random_pure_state;
use crate::state::DensityMatrix;

/// `(I ⊗ W) · (Σ_i U_i ⊗ |i><i|) · (I ⊗ V)`
pub fn assemble_total_unitary(c: &DilationCircuit) -> ComplexMatrix {
    let sys = c.system_dim();
    let d = c.ancilla_dim();
    let eye = ComplexMatrix::identity(sys);
    let mut select = ComplexMatrix::zeros(sys * d, sys * d);
    for (i, u) in c.unitaries().iter().enumerate() {
        for r in 0..sys {
            for s in 0..sys {
                select[(r * d + i, s * d + i)] = u[(r, s)];
            }
        }
    }
    eye.kron(c.w()).matmul(&select).matmul(&eye.kron(c.v()))
}

/// `B_k = Σ_i W_ki V_i0 U_i`
pub fn branch_operator(c: &DilationCircuit, k: usize) -> Result<ComplexMatrix> {
    let d = c.ancilla_dim();
    if k >= d {
        return Err(Error::OutcomeOutOfRange { outcome: k, dim: d });
    }
    let sys = c.system_dim();
    let mut b = ComplexMatrix::zeros(sys, sys);
    for (i, u) in c.unitaries().iter().enumerate() {
        let coeff = c.w()[(k, i)] * c.v()[(i, 0)];
        if coeff != ZERO {
            b += &u.scale(coeff);
        }
    }
    Ok(b)
}

/// `(I ⊗ <k|) T (I ⊗ |0>)` read off an assembled total unitary.
pub fn branch_from_total(total: &ComplexMatrix, system_dim: usize, k: usize) -> ComplexMatrix {
    let d = total.rows() / system_dim;
    let mut b = ComplexMatrix::zeros(system_dim, system_dim);
    for r in 0..system_dim {
        for s in 0..system_dim {
            b[(r, s)] = total[(r * d + k, s * d)];
        }
    }
    b
}

/// `T (ρ ⊗ |0><0|) T†` for one circuit.
pub fn joint_output(c: &DilationCircuit, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != c.system_dim() {
        return Err(Error::DimensionMismatch {
            context: "circuit input state",
            expected: c.system_dim(),
            found: rho.dim(),
        });
    }
    let total = assemble_total_unitary(c);
    let ancilla0 = ComplexMatrix::unit(c.ancilla_dim(), 0, 0);
    Ok(total.conjugate(&rho.matrix().kron(&ancilla0)))
}

/// The unnormalized system block `(I ⊗ <k|) ρ_SA (I ⊗ |k>)`.
pub fn ancilla_block(joint: &ComplexMatrix, system_dim: usize, k: usize) -> ComplexMatrix {
    let d = joint.rows() / system_dim;
    let mut b = ComplexMatrix::zeros(system_dim, system_dim);
    for r in 0..system_dim {
        for s in 0..system_dim {
            b[(r, s)] = joint[(r * d + k, s * d + k)];
        }
    }
    b
}

#[derive(Debug, Clone)]
pub struct BranchOutput {
    pub circuit: usize,
    pub outcome: usize,
    /// `B_k ρ B_k†`, before any classical weight.
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Diagnostics {
    /// Worst `|T†T − I|` entry over the plan's circuits.
    pub unitarity_residual: f64,
    /// `|Tr(output) − 1|`
    pub trace_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExecutionResult {
    pub output: DensityMatrix,
    pub branch_outputs: Vec<BranchOutput>,
    pub diagnostics: Diagnostics,
}

impl ExecutionResult {
    pub fn branch(&self, circuit: usize, outcome: usize) -> Option<&ComplexMatrix> {
        self.branch_outputs
            .iter()
            .find(|b| b.circuit == circuit && b.outcome == outcome)
            .map(|b| &b.matrix)
    }
}

/// Runs every circuit on `ρ ⊗ |0><0|`, applies each circuit's outcome policy
/// and sums the contributions. Weights are not renormalized.
pub fn run_plan(plan: &SimulationPlan, rho_in: &DensityMatrix) -> Result<ExecutionResult> {
    let sys = plan.system_dim();
    if rho_in.dim() != sys {
        return Err(Error::DimensionMismatch {
            context: "plan input state",
            expected: sys,
            found: rho_in.dim(),
        });
    }
    let mut output = ComplexMatrix::zeros(sys, sys);
    let mut branch_outputs = Vec::new();
    let mut unitarity_residual: f64 = 0.0;
    for (ci, pc) in plan.circuits().iter().enumerate() {
        let total = assemble_total_unitary(&pc.circuit);
        unitarity_residual = unitarity_residual.max(total.unitarity_residual());
        let ancilla0 = ComplexMatrix::unit(pc.circuit.ancilla_dim(), 0, 0);
        let joint = total.conjugate(&rho_in.matrix().kron(&ancilla0));
        match &pc.policy {
            OutcomePolicy::TraceAll => {
                for k in 0..pc.circuit.ancilla_dim() {
                    let block = ancilla_block(&joint, sys, k);
                    output += &block;
                    branch_outputs.push(BranchOutput {
                        circuit: ci,
                        outcome: k,
                        matrix: block,
                    });
                }
            }
            OutcomePolicy::SelectOutcomes(selection) => {
                for &(k, weight) in selection {
                    if k >= pc.circuit.ancilla_dim() {
                        return Err(Error::OutcomeOutOfRange {
                            outcome: k,
                            dim: pc.circuit.ancilla_dim(),
                        });
                    }
                    if !(weight >= 0.0) {
                        return Err(Error::NegativeWeight(weight));
                    }
                    let block = ancilla_block(&joint, sys, k);
                    output += &block.scale_re(weight);
                    branch_outputs.push(BranchOutput {
                        circuit: ci,
                        outcome: k,
                        matrix: block,
                    });
                }
            }
        }
    }
    let trace_residual = (output.trace().re - 1.0).abs();
    Ok(ExecutionResult {
        output: DensityMatrix::from_output(output)?,
        branch_outputs,
        diagnostics: Diagnostics {
            unitarity_residual,
            trace_residual,
        },
    })
}

/// Largest entry-wise deviation between the plan and direct Kraus
/// application over `trials` random pure inputs.
pub fn verify_plan<R: Rng + ?Sized>(
    plan: &SimulationPlan,
    ch: &KrausChannel,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_pure_state(ch.dim(), rng);
        let simulated = run_plan(plan, &rho)?;
        let oracle = apply_channel(ch, &rho)?;
        worst = worst.max(simulated.output.max_abs_diff(&oracle));
    }
    Ok(worst)
}
