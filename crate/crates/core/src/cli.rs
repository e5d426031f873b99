//! Command-line front end.
//!
//! Every subcommand writes its artifacts into `--out` together with a
//! `*.manifest.json` file echoing the resolved inputs, seed, thread count and
//! tool version.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::loss_constant;
use crate::config::{self, Overrides};
use crate::figures::{self, FigureSettings, LOSS_TABLE_BITS};
use crate::format::{db, sig, sig_list};
use crate::noise::{NoiseFamily, NoiseModel};
use crate::quantizer::{optimize_c_delta, CDeltaGrid, DesignTable, QuantizerDesign};
use crate::report;
use crate::simulator::run_experiment;

#[derive(Debug, Parser)]
#[command(
    name = "adaquant",
    version,
    about = "Adaptive estimation from quantized measurements: quantizer design, loss tables and Monte Carlo runs"
)]
pub struct Cli {
    /// Worker threads for the Monte Carlo engine (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed override
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal uniform quantizer for one noise model
    Design(DesignArgs),
    /// Quantization losses for a set of noises and resolutions
    LossTable(LossTableArgs),
    /// Run an experiment described by a config file
    Simulate(SimulateArgs),
    /// Write the CSV tables behind the loss figures
    Figures(FiguresArgs),
}

fn parse_family(s: &str) -> Result<NoiseFamily, String> {
    NoiseFamily::from_tag(s).ok_or_else(|| format!("unknown noise family '{s}' (use gg or st)"))
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

impl GridArgs {
    pub fn grid(&self) -> CDeltaGrid {
        let d = CDeltaGrid::default();
        CDeltaGrid {
            min: self.grid_min.unwrap_or(d.min),
            max: self.grid_max.unwrap_or(d.max),
            step: self.grid_step.unwrap_or(d.step),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Noise family: gg (generalized Gaussian) or st (Student's t)
    #[arg(long, value_parser = parse_family, required_unless_present = "table")]
    pub noise: Option<NoiseFamily>,
    #[arg(long, required_unless_present = "table")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Quantizer resolution in bits (N_I = 2^nbits intervals)
    #[arg(long, default_value_t = 1)]
    pub nbits: u32,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Re-import a stored design table instead of optimizing
    #[arg(long, conflicts_with_all = ["noise", "beta"])]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LossTableArgs {
    /// Restrict to one family (default: the seven reference noises)
    #[arg(long, value_parser = parse_family, requires = "beta")]
    pub noise: Option<NoiseFamily>,
    #[arg(long, requires = "noise")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Comma-separated resolutions in bits
    #[arg(long, value_delimiter = ',', default_values_t = LOSS_TABLE_BITS)]
    pub nbits: Vec<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Experiment config (TOML)
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_parser = parse_family)]
    pub noise: Option<NoiseFamily>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub nbits: Option<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    /// Multiplier on the desk-scale replication counts
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    argv: Vec<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: String,
    resolved: T,
    artifacts: Vec<String>,
}

fn write_manifest<T: Serialize>(
    cli: &Cli,
    subcommand: &str,
    stem: &str,
    resolved: T,
    artifacts: &[PathBuf],
) -> Result<PathBuf> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        argv: std::env::args().collect(),
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out.display().to_string(),
        resolved,
        artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = cli.out.join(format!("{stem}.manifest.json"));
    write(&path, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn beta_tag(beta: f64) -> String {
    beta.to_string().replace('.', "p")
}

/// Human-readable design summary.
pub fn describe_design(design: &QuantizerDesign) -> Result<String> {
    let noise = design.noise();
    let ic = noise
        .fisher_continuous()
        .with_context(|| format!("continuous Fisher information of {noise}"))?;
    let lq = loss_constant(design.fisher(), ic)?;
    Ok(format!(
        "noise      {noise}\n\
         intervals  {}\n\
         c_delta    {}\n\
         tau        {}\n\
         eta        {}\n\
         I_q        {}\n\
         I_c        {}\n\
         L_q        {} dB\n",
        design.spec().n_intervals(),
        sig(design.spec().c_delta()),
        if design.spec().thresholds().is_empty() {
            "(single threshold at the offset)".to_string()
        } else {
            sig_list(design.spec().thresholds())
        },
        sig_list(design.levels()),
        sig(design.fisher()),
        sig(ic),
        db(lq),
    ))
}

fn cmd_design(cli: &Cli, args: &DesignArgs) -> Result<()> {
    let (design, stem) = if let Some(path) = &args.table {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table = DesignTable::parse(&text)?;
        let design = table.rebuild()?;
        let stem = path
            .file_stem()
            .map(|s| format!("{}_check", s.to_string_lossy()))
            .unwrap_or_else(|| "design_check".into());
        (design, stem)
    } else {
        let family = args.noise.expect("required by clap");
        let beta = args.beta.expect("required by clap");
        let noise = NoiseModel::new(family, beta, args.delta)?;
        // fail early with the Fisher-information message for β < 1
        noise
            .fisher_continuous()
            .with_context(|| format!("cannot design for {noise}"))?;
        if !(1..=16).contains(&args.nbits) {
            bail!("--nbits must be in 1..=16");
        }
        let design = optimize_c_delta(&noise, 1usize << args.nbits, &args.grid.grid())?;
        let stem = format!("design_{}_b{}_nb{}", family, beta_tag(beta), args.nbits);
        (design, stem)
    };
    let text = describe_design(&design)?;
    print!("{text}");
    let table_path = cli.out.join(format!("{stem}.txt"));
    write(&table_path, &DesignTable::from_design(&design).to_text())?;
    let grid = args.grid.grid();
    write_manifest(
        cli,
        "design",
        &stem,
        serde_json::json!({
            "noise": design.noise().family(),
            "beta": design.noise().beta(),
            "delta": design.noise().delta(),
            "n_intervals": design.spec().n_intervals(),
            "grid": {"min": grid.min, "max": grid.max, "step": grid.step},
            "table_input": args.table.as_ref().map(|p| p.display().to_string()),
        }),
        &[table_path],
    )?;
    Ok(())
}

fn cmd_loss_table(cli: &Cli, args: &LossTableArgs) -> Result<()> {
    let noises = match (args.noise, args.beta) {
        (Some(family), Some(beta)) => vec![NoiseModel::new(family, beta, args.delta)?],
        _ => NoiseModel::reference_set(),
    };
    let grid = args.grid.grid();
    let rows = figures::loss_rows(&noises, &args.nbits, &grid)?;
    let table = figures::loss_table(&rows, &grid);
    println!("family  beta  N_B  c_delta      L_q dB   L_q^W dB  L_q^WD dB");
    for r in &rows {
        println!(
            "{:<6} {:>5} {:>4}  {:<10.4} {:>8} {:>9} {:>10}",
            r.family.to_string(),
            r.beta,
            r.n_bits,
            r.c_delta,
            db(r.loss_db),
            db(r.loss_wiener_db),
            db(r.loss_drift_db)
        );
    }
    let path = cli.out.join("loss_table.csv");
    write(&path, &table.to_text())?;
    write_manifest(
        cli,
        "loss-table",
        "loss_table",
        serde_json::json!({
            "noises": noises.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            "n_bits": args.nbits,
            "grid": {"min": grid.min, "max": grid.max, "step": grid.step},
        }),
        &[path],
    )?;
    Ok(())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        family: args.noise,
        beta: args.beta,
        delta: args.delta,
        n_bits: args.nbits,
        grid_min: args.grid.grid_min,
        grid_max: args.grid.grid_max,
        grid_step: args.grid.grid_step,
    };
    let config = config::load(&args.config, &overrides)?;
    let result = run_experiment(&config).with_context(|| format!("experiment {}", config.name))?;
    let csv = cli.out.join(format!("{}.csv", config.name));
    write(&csv, &report::result_csv(&result))?;
    let summary = cli.out.join(format!("{}.summary.json", config.name));
    write(&summary, &report::summary_json(&result))?;
    write_manifest(cli, "simulate", &config.name, &config, &[csv, summary])?;
    println!(
        "{}: asymptotic MSE {} (theory {}), simulated loss {} dB, theory {} dB, {} diverged",
        config.name,
        sig(result.asymptotic_mse),
        sig(result.theory_mse),
        db(result.simulated_loss_db),
        db(result.theory_loss_db),
        result.diverged.len()
    );
    Ok(())
}

fn cmd_figures(cli: &Cli, args: &FiguresArgs) -> Result<()> {
    let settings = FigureSettings {
        seed: cli.seed.unwrap_or(1),
        scale: args.scale,
        grid: args.grid.grid(),
    };
    type Builder = fn(&FigureSettings) -> Result<crate::report::CsvTable, figures::FigureError>;
    let builders: [(&str, Builder); 5] = [
        ("fig3", figures::figure3),
        ("fig4", figures::figure4),
        ("fig5", figures::figure5),
        ("fig6", figures::figure6),
        ("fig7", figures::figure7),
    ];
    let mut artifacts = Vec::new();
    for (name, build) in builders {
        let table = build(&settings).with_context(|| format!("building {name}"))?;
        let path = cli.out.join(format!("{name}.csv"));
        write(&path, &table.to_text())?;
        println!("wrote {} ({} rows)", path.display(), table.rows.len());
        artifacts.push(path);
    }
    write_manifest(
        cli,
        "figures",
        "figures",
        serde_json::json!({
            "seed": settings.seed,
            "scale": settings.scale,
            "grid": {"min": settings.grid.min, "max": settings.grid.max, "step": settings.grid.step},
        }),
        &artifacts,
    )?;
    Ok(())
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    let dispatch = || match &cli.command {
        Command::Design(a) => cmd_design(cli, a),
        Command::LossTable(a) => cmd_loss_table(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Figures(a) => cmd_figures(cli, a),
    };
    match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(dispatch),
        None => dispatch(),
    }
}
