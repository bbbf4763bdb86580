use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bathpair::config::{Format, ScenarioConfig};
use bathpair::grid::TimeGrid;
use bathpair::kernels::InversionPrefactor;
use bathpair::output::{write_csv, write_json, write_trajectory, Sidecar, Stamp, VERSION};
use bathpair::scenario::{self, COUPLING_COLUMNS, KERNEL_COLUMNS, RESPONSE_COLUMNS};
use bathpair::verify::{self, Effort, CRITERIA};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

/// Two oscillators in a shared heat bath: kernels, noise checks, simulations.
#[derive(Parser)]
#[command(name = "bathpair", version)]
struct Cli {
    /// Worker threads for ensemble work (default: available parallelism).
    #[arg(long, global = true, env = "BATHPAIR_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Override a config value before validation, e.g. `--set pair.d=3`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Replace existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate chi, chi_d, chi_R and chi_Z.
    Kernels {
        #[command(flatten)]
        common: Common,
        /// Time step (default: solver.h, else 0.01).
        #[arg(long)]
        step: Option<f64>,
        /// Last time (default: solver.t_end, else 10).
        #[arg(long)]
        t_end: Option<f64>,
        /// Also write the coupling recovered from the kernel at this many wavenumbers.
        #[arg(long, value_name = "N")]
        invert: Option<usize>,
        /// Use the inversion prefactor as originally printed (2u0^2/pi) instead of 2u0^3/pi.
        #[arg(long, requires = "invert")]
        paper_prefactor: bool,
    },
    /// Tabulate the induced potential V and force F against u12.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Monte-Carlo check of the noise correlations against their targets.
    NoiseCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate trajectories, one file pair per realization.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Mode response functions eta and xi for both modes.
    Respond {
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        /// Smaller ensembles; for a fast smoke test.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Write the outcomes, with their ensemble summaries, as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Loaded {
    cfg: ScenarioConfig,
    overrides: Vec<String>,
    force: bool,
    dir: PathBuf,
    stamp: Stamp,
}

fn load(common: Common) -> Fallible<Loaded> {
    let cfg = ScenarioConfig::load(&common.config, &common.overrides)?;
    let dir = PathBuf::from(&cfg.output.directory);
    let mut stamp = Stamp::new(cfg.hash()).with(format!("model {} u0 {} d {}", cfg.model()?.tag(), cfg.model.u0, cfg.pair.d));
    if !common.overrides.is_empty() {
        stamp = stamp.with(format!("overrides {}", common.overrides.join(" ")));
    }
    Ok(Loaded { cfg, overrides: common.overrides, force: common.force, dir, stamp })
}

/// Write a table in every configured format.
fn write_table(l: &Loaded, stem: &str, names: &[&str], cols: &[Vec<f64>]) -> Fallible<()> {
    for format in &l.cfg.output.formats {
        let path = match format {
            Format::Csv => {
                let p = l.dir.join(format!("{stem}.csv"));
                let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
                write_csv(&p, &l.stamp, names, &refs, l.force)?;
                p
            }
            Format::Json => {
                let p = l.dir.join(format!("{stem}.json"));
                let columns: serde_json::Map<String, serde_json::Value> =
                    names.iter().zip(cols).map(|(n, c)| (n.to_string(), json!(c))).collect();
                let doc = json!({ "version": VERSION, "config_hash": l.stamp.config_hash, "header": l.stamp.extra, "columns": columns });
                write_json(&p, &doc, l.force)?;
                p
            }
        };
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(command: Command) -> Fallible<bool> {
    match command {
        Command::Kernels { common, step, t_end, invert, paper_prefactor } => {
            let l = load(common)?;
            let solver = l.cfg.solver.as_ref();
            let h = step.or(solver.map(|s| s.h)).unwrap_or(0.01);
            let t_end = t_end.or(solver.map(|s| s.t_end)).unwrap_or(10.0);
            let cols = scenario::kernel_columns(&l.cfg, TimeGrid::covering(h, t_end)?)?;
            write_table(&l, "kernels", &KERNEL_COLUMNS, &cols)?;
            if let Some(n) = invert {
                let prefactor = if paper_prefactor { InversionPrefactor::AsPrinted } else { InversionPrefactor::Consistent };
                let cols = scenario::coupling_columns(&l.cfg, n, prefactor)?;
                write_table(&l, "coupling", &COUPLING_COLUMNS, &cols)?;
            }
            Ok(true)
        }
        Command::Potential { common, from, to, points } => {
            let l = load(common)?;
            let d = l.cfg.pair.d;
            let width = 10.0 / l.cfg.model()?.characteristic_wavenumber().unwrap_or(1.0);
            let cols = scenario::potential_columns(&l.cfg, from.unwrap_or(d - width), to.unwrap_or(d + width), points)?;
            write_table(&l, "potential", &["u12", "V", "F"], &cols)?;
            Ok(true)
        }
        Command::NoiseCheck { common } => {
            let l = load(common)?;
            let mut summary = scenario::noise_check(&l.cfg)?;
            summary.config_hash = Some(l.stamp.config_hash.clone());
            summary.params.insert("version".into(), json!(VERSION));
            let path = l.dir.join("noise_check.json");
            write_json(&path, &summary, l.force)?;
            println!(
                "{}: {}/{} cells beyond |z|=3 (max |z| {:.2}) -> {}",
                summary.check,
                summary.failed_cells(),
                summary.cells.len(),
                summary.max_abs_z(),
                if summary.passed() { "pass" } else { "fail" }
            );
            println!("wrote {}", path.display());
            Ok(summary.passed())
        }
        Command::Simulate { common } => simulate(load(common)?),
        Command::Respond { common } => {
            let l = load(common)?;
            let (plus, minus) = scenario::responses(&l.cfg)?;
            write_table(&l, "response", &RESPONSE_COLUMNS, &scenario::response_columns(&plus, &minus))?;
            let flagged = plus.flagged.len() + minus.flagged.len();
            if flagged > 0 {
                eprintln!(
                    "warning: {flagged} points with inversion discrepancy above the flag threshold (max {:.2e})",
                    plus.max_discrepancy.max(minus.max_discrepancy)
                );
            }
            Ok(true)
        }
        Command::Verify { quick, only, report, force } => {
            let effort = if quick { Effort::Quick } else { Effort::Full };
            let ids: Vec<u32> = if only.is_empty() { (1..=CRITERIA.len() as u32).collect() } else { only };
            let mut outcomes = Vec::new();
            for id in ids {
                let out = verify::run(id, effort);
                println!("{}", out.line());
                for note in &out.notes {
                    println!("       {note}");
                }
                outcomes.push(out);
            }
            let passed = outcomes.iter().all(|o| o.passed);
            println!("{} of {} checks pass", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
            if let Some(path) = report {
                write_json(&path, &outcomes, force)?;
                println!("wrote {}", path.display());
            }
            Ok(passed)
        }
    }
}

fn simulate(l: Loaded) -> Fallible<bool> {
    let solver = l.cfg.solver_section()?.clone();
    let n = solver.n_realizations as u64;
    let config = serde_json::to_value(&l.cfg)?;
    let width = n.saturating_sub(1).to_string().len().max(4);
    let chunk = 2 * rayon::current_num_threads() as u64;
    let mut files = Vec::new();
    let mut finals = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let batch: Vec<_> = (start..end).into_par_iter().map(|i| scenario::simulate(&l.cfg, i)).collect::<Result<_, _>>()?;
        for (tr, i) in batch.iter().zip(start..end) {
            let stem = format!("trajectory_{i:0width$}");
            let sidecar = Sidecar {
                version: VERSION.into(),
                config_hash: l.stamp.config_hash.clone(),
                config: config.clone(),
                overrides: l.overrides.clone(),
                seed: solver.seed,
                realization: i,
                solver: tr.provenance.solver.clone(),
                history: tr.provenance.history.clone(),
                inversion_discrepancy: tr.provenance.inversion_discrepancy,
                data: format!("{stem}.csv"),
            };
            let (csv, json) = write_trajectory(&l.dir, &stem, tr, &sidecar, l.force)?;
            files.push(json!({ "realization": i, "csv": name(&csv), "sidecar": name(&json) }));
            let last = tr.x1.len() - 1;
            finals.push([tr.x1[last], tr.x2[last], tr.v1[last], tr.v2[last]]);
        }
        start = end;
    }
    let summary = json!({
        "version": VERSION,
        "config_hash": l.stamp.config_hash,
        "overrides": l.overrides,
        "seed": solver.seed,
        "n_realizations": n,
        "method": solver.method.tag(),
        "final_state_mean": mean_state(&finals),
        "files": files,
    });
    let path = l.dir.join("summary.json");
    write_json(&path, &summary, l.force)?;
    println!("wrote {n} trajectories and {}", path.display());
    Ok(true)
}

fn name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn mean_state(finals: &[[f64; 4]]) -> serde_json::Value {
    let n = finals.len().max(1) as f64;
    let mut m = [0.0; 4];
    for f in finals {
        for (a, b) in m.iter_mut().zip(f) {
            *a += b / n;
        }
    }
    json!({ "x1": m[0], "x2": m[1], "v1": m[2], "v2": m[3] })
}
