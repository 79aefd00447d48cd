use chansim_core::channel::{analytic_output, channel_preset, ChannelPreset};
use chansim_core::compiler::compile_preset;
use chansim_core::sim::{run_plan, verify_plan};
use chansim_core::state::{bloch_vector, fidelity, state_from_bloch, von_neumann_entropy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepConfig;

/// Plans whose deviation reaches this are reported as failures.
pub const DEVIATION_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub exp_x: f64,
    pub exp_y: f64,
    pub exp_z: f64,
    pub fid_vs_input: f64,
    pub fid_vs_theory: f64,
    pub entropy: f64,
    pub plan_deviation: f64,
}

/// Random test states for grid point `index` come from their own stream, so
/// results do not depend on evaluation order.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn sweep_point(cfg: &SweepConfig, index: usize, param: f64) -> chansim_core::Result<SweepRow> {
    let preset = ChannelPreset::new(cfg.channel, param)?;
    let plan = compile_preset(preset, cfg.strategy, cfg.basis)?;
    let rho_in = state_from_bloch(cfg.input)?;
    let out = run_plan(&plan, &rho_in)?.output;
    let v = bloch_vector(&out)?;
    let theory = state_from_bloch(analytic_output(preset, cfg.input)?)?;
    let channel = channel_preset(preset)?;
    let mut rng = point_rng(cfg.seed, index);
    Ok(SweepRow {
        param,
        exp_x: v.x,
        exp_y: v.y,
        exp_z: v.z,
        fid_vs_input: fidelity(&out, &rho_in)?,
        fid_vs_theory: fidelity(&out, &theory)?,
        entropy: von_neumann_entropy(&out),
        plan_deviation: verify_plan(&plan, &channel, cfg.verify_trials, &mut rng)?,
    })
}

/// One row per grid point, evaluated in parallel and returned in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> chansim_core::Result<Vec<SweepRow>> {
    let points = cfg.grid.points();
    let mut rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| sweep_point(cfg, i, p))
        .collect::<chansim_core::Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(rows)
}

pub fn all_within_limit(rows: &[SweepRow]) -> bool {
    rows.iter().all(|r| r.plan_deviation < DEVIATION_LIMIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_input;
    use chansim_core::channel::PresetKind;
    use chansim_core::compiler::Strategy;

    fn cfg(kind: PresetKind, input: &str) -> SweepConfig {
        let mut c = SweepConfig::new(kind);
        c.input = parse_input(input).unwrap();
        c.verify_trials = 5;
        c
    }

    #[test]
    fn pd_x_follows_sqrt() {
        let rows = run_sweep(&cfg(PresetKind::Pd, "X")).unwrap();
        assert_eq!(rows.len(), 21);
        for r in &rows {
            assert!((r.exp_x - (1.0 - r.param).sqrt()).abs() < 1e-10);
            assert!(r.fid_vs_theory > 1.0 - 1e-9);
        }
        assert!(all_within_limit(&rows));
    }

    #[test]
    fn dep_minus_y() {
        let rows = run_sweep(&cfg(PresetKind::Dep, "-Y")).unwrap();
        for r in &rows {
            assert!((r.exp_y + (1.0 - r.param)).abs() < 1e-10);
        }
    }

    #[test]
    fn ad_z_is_fixed() {
        let rows = run_sweep(&cfg(PresetKind::Ad, "Z")).unwrap();
        for r in &rows {
            assert!((r.exp_z - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn strategies_agree() {
        for kind in PresetKind::ALL {
            let mut base = cfg(kind, "0.3, -0.4, 0.5");
            base.strategy = Strategy::Paper;
            let reference = run_sweep(&base).unwrap();
            for strategy in [Strategy::Auto, Strategy::Branch] {
                base.strategy = strategy;
                let rows = run_sweep(&base).unwrap();
                for (a, b) in rows.iter().zip(&reference) {
                    assert!((a.exp_x - b.exp_x).abs() < 1e-9);
                    assert!((a.exp_y - b.exp_y).abs() < 1e-9);
                    assert!((a.exp_z - b.exp_z).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn inapplicable_strategy_is_an_error() {
        let mut c = cfg(PresetKind::Ad, "X");
        c.strategy = Strategy::Matched;
        assert!(run_sweep(&c).is_err());
    }

    #[test]
    fn streams_are_order_independent() {
        let c = cfg(PresetKind::Ad, "X");
        let all = run_sweep(&c).unwrap();
        let single = sweep_point(&c, 7, all[7].param).unwrap();
        assert_eq!(single, all[7]);
    }
}
