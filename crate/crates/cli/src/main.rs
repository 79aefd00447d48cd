use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chansim_core::basis::{basis_for, BasisKind};
use chansim_core::channel::{channel_preset, ChannelPreset, PresetKind};
use chansim_core::compiler::{compile, compile_preset, Strategy};
use chansim_core::gates::{count_gates, decompose_controlled, LocalUnitary};
use chansim_core::random::random_channel;
use chansim_core::sim::verify_plan;
use chansim_cli::config::{resolve, Grid, OutputFormat, SweepOverrides};
use chansim_cli::costs::{render_table, report_costs};
use chansim_cli::output::{emit_csv, emit_json, format_sig};
use chansim_cli::sweep::{all_within_limit, run_sweep, DEVIATION_LIMIT};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "chansim", version, about = "Simulate quantum channels through unitary dilations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a preset channel over its parameter and tabulate the output state
    Sweep(SweepArgs),
    /// Compare compiled plans against direct Kraus application
    Verify(VerifyArgs),
    /// Gate-cost model table with measured decomposition counts
    Costs(CostsArgs),
    /// Print the simulation plan for one channel as JSON
    PlanDump(PlanDumpArgs),
    /// Emit the gate list of a multi-controlled Pauli product as JSON
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with a [sweep] table; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// pd, ad or dep
    #[arg(long)]
    channel: Option<String>,
    /// auto, diagonal, matched, branch or paper
    #[arg(long)]
    strategy: Option<String>,
    /// Operator basis for compiled strategies: pauli or weyl
    #[arg(long)]
    basis: Option<String>,
    /// Input Bloch vector: X, -Y, Z, ... or "x,y,z"
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    /// start:stop:step [default: 0:1:0.05]
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated subset of output columns
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Random inputs per grid point for plan verification [default: 20]
    #[arg(long)]
    verify_trials: Option<i64>,
    /// Seed for the verification inputs [default: 0]
    #[arg(long)]
    seed: Option<i64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to one preset (default: all)
    #[arg(long)]
    channel: Option<PresetKind>,
    /// Restrict to one strategy (default: all)
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long, default_value = "0:1:0.05")]
    grid: Grid,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Also check this many random single-qubit channels
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Kraus operators per random channel
    #[arg(long, default_value_t = 3)]
    kraus: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CostsArgs {
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct PlanDumpArgs {
    #[arg(long)]
    channel: PresetKind,
    #[arg(long)]
    param: f64,
    #[arg(long, default_value = "paper")]
    strategy: Strategy,
    #[arg(long, default_value = "pauli")]
    basis: BasisKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Number of control qubits
    #[arg(long)]
    controls: usize,
    /// Pauli product on the target wires, e.g. ZX
    #[arg(long)]
    target: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let flags = SweepOverrides {
        channel: args.channel,
        strategy: args.strategy,
        basis: args.basis,
        input: args.input,
        grid: args.grid,
        columns: args.columns,
        out: args.out,
        format: args.format,
        verify_trials: args.verify_trials,
        seed: args.seed,
    };
    let cfg = resolve(args.config.as_deref(), flags)?;
    let rows = run_sweep(&cfg)?;
    let path = cfg.out_path.as_deref();
    match cfg.format {
        OutputFormat::Csv => emit_csv(&rows, &cfg.columns, path)?,
        OutputFormat::Json => emit_json(&rows, &cfg.columns, path)?,
    }
    let ok = all_within_limit(&rows);
    if !ok {
        let worst = rows.iter().map(|r| r.plan_deviation).fold(0.0, f64::max);
        eprintln!("plan deviation {worst:e} exceeds {DEVIATION_LIMIT:e}");
    }
    Ok(ok)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let kinds: Vec<PresetKind> = args.channel.map_or(PresetKind::ALL.to_vec(), |k| vec![k]);
    let strategies: Vec<Strategy> = args.strategy.map_or(Strategy::ALL.to_vec(), |s| vec![s]);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut ok = true;
    println!("channel,strategy,points,max_deviation");
    for &kind in &kinds {
        for &strategy in &strategies {
            let mut worst: f64 = 0.0;
            let mut points = 0;
            for param in args.grid.points() {
                let preset = ChannelPreset::new(kind, param)?;
                let plan = match compile_preset(preset, strategy, BasisKind::Pauli) {
                    Ok(p) => p,
                    Err(chansim_core::Error::StrategyInapplicable { .. }) => continue,
                    Err(e) => return Err(e.into()),
                };
                worst = worst.max(verify_plan(&plan, &channel_preset(preset)?, args.trials, &mut rng)?);
                points += 1;
            }
            if points == 0 {
                println!("{kind},{strategy},0,n/a");
                continue;
            }
            ok &= worst < DEVIATION_LIMIT;
            println!("{kind},{strategy},{points},{}", format_sig(worst));
        }
    }
    if args.random > 0 {
        let basis = basis_for(BasisKind::Pauli, 2)?;
        let mut worst: f64 = 0.0;
        for _ in 0..args.random {
            let ch = random_channel(2, args.kraus, &mut rng);
            let plan = compile(&ch, &basis, Strategy::Branch)?;
            worst = worst.max(verify_plan(&plan, &ch, args.trials, &mut rng)?);
        }
        ok &= worst < DEVIATION_LIMIT;
        println!("random,branch,{},{}", args.random, format_sig(worst));
    }
    Ok(ok)
}

fn costs(args: CostsArgs) -> Result<()> {
    let rows = report_costs(args.n_max)?;
    let text = match args.format {
        OutputFormat::Csv => render_table(&rows),
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    write_text(None, &text)
}

fn plan_dump(args: PlanDumpArgs) -> Result<()> {
    let preset = ChannelPreset::new(args.channel, args.param)?;
    let plan = compile_preset(preset, args.strategy, args.basis)?;
    write_text(args.out.as_deref(), &(plan.to_json()? + "\n"))
}

fn decompose(args: DecomposeArgs) -> Result<()> {
    let target = LocalUnitary::pauli_product(&args.target)?;
    let gates = decompose_controlled(args.controls, &target)?;
    let counts = count_gates(&gates);
    eprintln!("single-qubit gates: {}, CNOTs: {}", counts.single, counts.cnot);
    write_text(args.out.as_deref(), &(gates.to_json()? + "\n"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Costs(a) => costs(a).map(|_| true),
        Command::PlanDump(a) => plan_dump(a).map(|_| true),
        Command::Decompose(a) => {
            if a.target.trim().is_empty() {
                bail!("--target must name at least one Pauli");
            }
            decompose(a).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
