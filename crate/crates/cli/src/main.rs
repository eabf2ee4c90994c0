//! Command-line front end: loads a problem spec, runs the classification /
//! energy / simulation pipelines, and writes reports.
//!
//! Exit codes: 0 success (including Inconclusive verdicts), 2 specification
//! error (bad file, bad schema, positivity violation), 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gradform_core::error::CoreError;
use gradform_core::hamza::detect_hamza_set;
use gradform_core::mcdiff::{corroborate, run_ensemble, summarize, SimConfig};
use gradform_core::recur1d::{build_un, closed_form_energy, dirichlet_energy, sequence_an};
use gradform_core::{classify_spec, fixtures, Domain, ProblemSpec};

#[derive(Parser)]
#[command(
    name = "gradform",
    about = "Numerical recurrence classification for gradient-type Dirichlet forms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Problem specification file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory (default: $GRADFORM_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the maximum sequence index n_max.
    #[arg(long)]
    n_max: Option<u32>,
    /// Override the quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Enable the natural-scale transience probe (an extension beyond the
    /// sufficient criteria; off by default).
    #[arg(long)]
    enable_scale_probe: bool,
}

#[derive(Args)]
struct SimOverrides {
    /// Override the number of simulated paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the time horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Override the time step dt.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a spec and write the verdict report.
    Classify(CommonOpts),
    /// Write the per-n energy trace (a_n, b_n, closed-form vs quadrature energy).
    EnergyTrace(CommonOpts),
    /// Simulate the associated diffusion and write per-path results.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        sim: SimOverrides,
    },
    /// Classify, simulate, and report whether the statistics agree.
    Corroborate {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        sim: SimOverrides,
    },
    /// Regenerate every bundled example spec into the output directory.
    Fixtures {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Spec(_) | CoreError::Serde(_) | CoreError::Io(_) => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    2
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Classify(common) => cmd_classify(&common),
        Command::EnergyTrace(common) => cmd_energy_trace(&common),
        Command::Simulate { common, sim } => cmd_simulate(&common, &sim),
        Command::Corroborate { common, sim } => cmd_corroborate(&common, &sim),
        Command::Fixtures { out } => cmd_fixtures(out),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os("GRADFORM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_spec(common: &CommonOpts) -> anyhow::Result<ProblemSpec> {
    let mut spec = ProblemSpec::load(&common.spec)?;
    if let Some(n) = common.n_max {
        spec.options.n_max = n;
    }
    if let Some(t) = common.tol {
        spec.options.tol = t;
    }
    if let Some(s) = common.seed {
        spec.options.seed = s;
    }
    if common.enable_scale_probe {
        spec.options.enable_scale_probe = true;
    }
    Ok(spec)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn cmd_classify(common: &CommonOpts) -> anyhow::Result<()> {
    let spec = load_spec(common)?;
    let verdict = classify_spec(&spec)?;
    let report = serde_json::to_string_pretty(&verdict)?;
    let path = write_out(&out_dir(&common.out), "verdict.json", &report)?;
    println!("verdict: {:?}", verdict.kind);
    if let Some(tag) = verdict.case_tag {
        println!("case: {}", serde_json::to_string(&tag)?.trim_matches('"'));
    }
    for s in &verdict.sequences {
        println!(
            "sequence {}: {:?} (model {:?}, residual {:.2e})",
            s.label, s.diagnosis.kind, s.diagnosis.fitted_model, s.diagnosis.rel_residual
        );
    }
    for r in &verdict.ratios {
        println!("ratio {}: {:?}", r.label, r.diagnosis.kind);
    }
    for a in &verdict.assumptions {
        println!("assumption: {a}");
    }
    for n in &verdict.notes {
        println!("note: {n}");
    }
    println!("report: {}", path.display());
    Ok(())
}

fn cmd_energy_trace(common: &CommonOpts) -> anyhow::Result<()> {
    let spec = load_spec(common)?;
    if matches!(spec.domain, Domain::Euclidean { .. }) {
        return Err(CoreError::Spec("energy-trace requires a one-dimensional spec".into()).into());
    }
    let dec = detect_hamza_set(&spec, spec.options.window, spec.options.tol)?;
    let seqs = sequence_an(&spec, &dec, spec.options.n_max)?;
    let mut csv = String::from("n,a_n,b_n,closed_form_energy,quadrature_energy\n");
    for (i, a) in seqs.a.iter().enumerate() {
        let b = seqs.b.as_ref().map(|bs| bs[i]);
        let (closed, quad) = if a.value > 0.0 && b.map(|s| s.value > 0.0).unwrap_or(true) {
            let u = build_un(&spec, &dec, a.n)?;
            let e = dirichlet_energy(&u, &spec, spec.options.tol)?;
            (format!("{}", closed_form_energy(&u)), format!("{e}"))
        } else {
            (String::new(), String::new())
        };
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            a.n,
            a.value,
            b.map(|s| s.value.to_string()).unwrap_or_default(),
            closed,
            quad
        ));
    }
    let path = write_out(&out_dir(&common.out), "energy_trace.csv", &csv)?;
    println!("energy trace: {}", path.display());
    Ok(())
}

fn sim_config(spec: &ProblemSpec, sim: &SimOverrides) -> anyhow::Result<SimConfig> {
    let mut cfg = SimConfig::from_spec(spec)?;
    if let Some(p) = sim.paths {
        cfg.n_paths = p;
    }
    if let Some(h) = sim.horizon {
        cfg.horizon = h;
    }
    if let Some(dt) = sim.dt {
        cfg.dt = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn paths_csv(paths: &[gradform_core::mcdiff::PathSummary]) -> String {
    let mut csv = String::from("path_index,first_return_time,occupation_time,aborted,unresolved\n");
    for p in paths {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            p.index,
            p.first_return.map(|t| t.to_string()).unwrap_or_default(),
            p.occupation,
            p.aborted,
            p.unresolved
        ));
    }
    csv
}

fn cmd_simulate(common: &CommonOpts, sim: &SimOverrides) -> anyhow::Result<()> {
    let spec = load_spec(common)?;
    let drift = spec.drift_from_coefficients()?;
    let cfg = sim_config(&spec, sim)?;
    let paths = run_ensemble(&drift, &cfg)?;
    let estimate = summarize(&paths, &cfg)?;
    let dir = out_dir(&common.out);
    let csv_path = write_out(&dir, "paths.csv", &paths_csv(&paths))?;
    let sum_path = write_out(
        &dir,
        "simulation_summary.json",
        &serde_json::to_string_pretty(&estimate)?,
    )?;
    println!(
        "return fraction: {:.4} ± {:.4} ({} completed, {} aborted, {} unresolved)",
        estimate.return_probability,
        estimate.ci_halfwidth,
        estimate.n_completed,
        estimate.n_aborted,
        estimate.n_unresolved
    );
    println!("paths: {}", csv_path.display());
    println!("summary: {}", sum_path.display());
    Ok(())
}

fn cmd_corroborate(common: &CommonOpts, sim: &SimOverrides) -> anyhow::Result<()> {
    let spec = load_spec(common)?;
    let verdict = classify_spec(&spec)?;
    let drift = spec.drift_from_coefficients()?;
    let cfg = sim_config(&spec, sim)?;
    let report = corroborate(&verdict, &drift, &cfg)?;
    let dir = out_dir(&common.out);
    let path = write_out(
        &dir,
        "corroboration.json",
        &serde_json::to_string_pretty(&report)?,
    )?;
    println!("{}", report.summary);
    println!(
        "consistent: {} (return fraction {:.4})",
        report.consistent, report.estimate.return_probability
    );
    println!("caveat: {}", report.caveat);
    println!("report: {}", path.display());
    Ok(())
}

fn cmd_fixtures(out: Option<PathBuf>) -> anyhow::Result<()> {
    let dir = out_dir(&out);
    for (name, spec) in fixtures::all() {
        let path = write_out(&dir, &format!("{name}.json"), &spec.to_json_pretty())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
