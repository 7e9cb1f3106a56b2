mod report;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sfr_inertia::estimators::{
    estimate_inoue, estimate_sliding_window, fit_sfr, sweep_poly_orders, sweep_window_lengths,
    DEFAULT_FIT_HORIZON,
};
use sfr_inertia::preprocess::clean_dataset;
use sfr_inertia::sim::{export_event, simulate_event, ScenarioConfig, TruthRecord, TRUTH_FILE};
use sfr_inertia::timeseries::write_trace_csv;
use sfr_inertia::EventManifest;

use report::{InputRecord, Metadata, MethodResult, RunReport, SweepRow, SweepTable};

#[derive(Parser)]
#[command(name = "sfrfit", version, about = "Estimate power system inertia from disturbance recordings")]
struct Cli {
    /// Directory for reports, tables and plots.
    #[arg(long, global = true, default_value = "sfrfit-out")]
    out: PathBuf,
    /// Suppress the summary printed to stdout.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and export it as CSV traces plus a manifest.
    Simulate {
        config: PathBuf,
        /// Export directory (defaults to --out).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Run inertia estimators on an event manifest.
    Estimate {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::All)]
        method: Method,
        /// Sliding-window length (s).
        #[arg(long, default_value_t = 0.5)]
        window_s: f64,
        /// Polynomial order for the Inoue method.
        #[arg(long, default_value_t = 12)]
        order: usize,
        /// Model-fit horizon after onset (s); overrides the manifest.
        #[arg(long)]
        horizon_s: Option<f64>,
        /// Span fitted by the polynomial method (s).
        #[arg(long, default_value_t = DEFAULT_FIT_HORIZON)]
        poly_horizon_s: f64,
        /// Remove inertial power from the PFR channels before fitting.
        #[arg(long)]
        washout: bool,
    },
    /// Sweep a hyperparameter of a swing-equation estimator.
    Sweep {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        method: SweepMethod,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Span fitted by the polynomial method (s).
        #[arg(long, default_value_t = DEFAULT_FIT_HORIZON)]
        poly_horizon_s: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Sliding,
    Inoue,
    Modelfit,
    All,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Sliding => "sliding",
            Method::Inoue => "inoue",
            Method::Modelfit => "modelfit",
            Method::All => "all",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMethod {
    Sliding,
    Inoue,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, status) = classify(&err);
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("error[{code}]: {message}");
            ExitCode::from(status)
        }
    }
}

/// Stable code and exit status: 2 for bad inputs, 3 for estimator failures.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    if let Some(e) = err.downcast_ref::<sfr_inertia::Error>() {
        (e.code(), if e.is_input_error() { 2 } else { 3 })
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        ("io", 2)
    } else if err.downcast_ref::<UsageError>().is_some() {
        ("usage", 2)
    } else {
        ("internal", 3)
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { config, output } => {
            cmd_simulate(config, output.as_deref().unwrap_or(&cli.out), cli.quiet)
        }
        Command::Estimate {
            manifest,
            method,
            window_s,
            order,
            horizon_s,
            poly_horizon_s,
            washout,
        } => cmd_estimate(
            cli,
            manifest,
            &EstimateArgs {
                method: *method,
                window_s: *window_s,
                order: *order,
                horizon_s: *horizon_s,
                poly_horizon_s: *poly_horizon_s,
                washout: *washout,
            },
        ),
        Command::Sweep {
            manifest,
            method,
            from,
            to,
            step,
            poly_horizon_s,
        } => cmd_sweep(cli, manifest, *method, (*from, *to, *step), *poly_horizon_s),
    }
}

fn cmd_simulate(config: &Path, out: &Path, quiet: bool) -> Result<()> {
    let config = ScenarioConfig::load(config)?;
    let event = simulate_event(&config)?;
    let manifest = export_event(&event, out)?;
    if !quiet {
        let f = event.truth.frequency.values();
        let nadir = f.iter().copied().fold(f64::INFINITY, f64::min);
        println!("wrote {}", manifest.display());
        println!("  true inertia       {:>10.1} MW.s", event.truth.ke);
        println!("  true load relief   {:>10.2} %/Hz", event.truth.d);
        println!("  machine inertia    {:>10.1} MW.s", event.truth.machine_inertia);
        println!("  contingency        {:>10.1} MW", event.dataset.p_cont_size());
        println!("  nadir              {:>10.4} Hz", nadir);
    }
    Ok(())
}

struct EstimateArgs {
    method: Method,
    window_s: f64,
    order: usize,
    horizon_s: Option<f64>,
    poly_horizon_s: f64,
    washout: bool,
}

fn cmd_estimate(cli: &Cli, manifest_path: &Path, args: &EstimateArgs) -> Result<()> {
    let start = Instant::now();
    let loaded = EventManifest::load(manifest_path)?;
    let input = InputRecord::from_manifest(manifest_path, &loaded)?;
    let mut dataset = loaded.dataset()?;
    let mut fit_options = loaded.manifest.fit_options();
    if let Some(h) = args.horizon_s {
        fit_options.horizon_s = h;
    }
    let washout = if args.washout {
        let Some(config) = loaded.manifest.washout_config()? else {
            return Err(UsageError("--washout needs a `washout` section in the manifest".into()).into());
        };
        dataset = clean_dataset(&dataset, &config)?;
        Some(config.t_w())
    } else {
        None
    };

    let run_all = args.method == Method::All;
    let mut results = Vec::new();
    let mut first_error = None;
    let mut fitted = None;

    if run_all || args.method == Method::Sliding {
        let hyper = json!({ "window_s": args.window_s });
        results.push(match estimate_sliding_window(&dataset, args.window_s) {
            Ok(e) => MethodResult::swing(&e, hyper),
            Err(e) => {
                let r = MethodResult::failed("sliding_window", hyper, &e);
                first_error.get_or_insert(e);
                r
            }
        });
    }
    if run_all || args.method == Method::Inoue {
        let hyper = json!({ "order": args.order, "fit_horizon_s": args.poly_horizon_s });
        results.push(match estimate_inoue(&dataset, args.order, args.poly_horizon_s) {
            Ok(e) => MethodResult::swing(&e, hyper),
            Err(e) => {
                let r = MethodResult::failed("inoue", hyper, &e);
                first_error.get_or_insert(e);
                r
            }
        });
    }
    if run_all || args.method == Method::Modelfit {
        let hyper = serde_json::to_value(fit_options)?;
        results.push(match fit_sfr(&dataset, &fit_options) {
            Ok(e) => {
                let r = MethodResult::fit(&e, hyper, washout.is_some());
                fitted = Some(e.fitted_frequency);
                r
            }
            Err(e) => {
                let r = MethodResult::failed("model_fit", hyper, &e);
                first_error.get_or_insert(e);
                r
            }
        });
    }

    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    if let Some(trace) = &fitted {
        write_trace_csv(cli.out.join("fitted_frequency.csv"), trace)?;
    }
    let options = json!({
        "method": args.method.name(),
        "washout_t_w_s": washout,
        "onset_s": dataset.onset_time(),
        "p_cont_mw": dataset.p_cont_size(),
    });
    let report = RunReport::new(input, options, results, Vec::new(), metadata(start))?;
    report.write(&cli.out.join("report.json"))?;
    if !cli.quiet {
        print_summary(&report);
    }

    // a single requested method that failed is a failed run
    let all_failed = report.results.iter().all(|r| r.error.is_some());
    match first_error {
        Some(e) if all_failed => Err(e.into()),
        _ => Ok(()),
    }
}

fn metadata(start: Instant) -> Metadata {
    Metadata {
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        generated_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}

fn print_summary(report: &RunReport) {
    let fmt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
    println!("{:<16}{:>12}{:>10}  remarks", "method", "KE (MW.s)", "D (%/Hz)");
    for r in &report.results {
        let remarks = r.error.as_deref().unwrap_or(&r.remarks);
        println!(
            "{:<16}{:>12}{:>10}  {}",
            r.method,
            fmt(r.ke_mws, 1),
            fmt(r.d_pct_per_hz, 2),
            remarks
        );
    }
}

/// Inclusive grid `from, from + step, ..., <= to`.
fn range_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && from.is_finite() && to >= from) {
        bail!(UsageError(format!(
            "invalid range: from {from} to {to} step {step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    // rounding keeps 0.02 + 3 * 0.01 printing as 0.05
    Ok((0..n)
        .map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn cmd_sweep(
    cli: &Cli,
    manifest_path: &Path,
    method: SweepMethod,
    (from, to, step): (f64, f64, f64),
    poly_horizon_s: f64,
) -> Result<()> {
    let start = Instant::now();
    let values = range_values(from, to, step)?;
    let loaded = EventManifest::load(manifest_path)?;
    let input = InputRecord::from_manifest(manifest_path, &loaded)?;
    let dataset = loaded.dataset()?;

    let (name, hyper_name, x_label, result) = match method {
        SweepMethod::Sliding => (
            "sliding_window",
            "window_s",
            "window length (s)",
            sweep_window_lengths(&dataset, &values)?,
        ),
        SweepMethod::Inoue => {
            let orders: Vec<usize> = values.iter().map(|v| v.round() as usize).collect();
            if orders.iter().zip(&values).any(|(o, v)| (*o as f64 - v).abs() > 1e-9) {
                bail!(UsageError("polynomial orders must be whole numbers".into()));
            }
            (
                "inoue",
                "order",
                "polynomial order",
                sweep_poly_orders(&dataset, &orders, poly_horizon_s)?,
            )
        }
    };
    let rows: Vec<SweepRow> = result
        .hyperparameter_values
        .iter()
        .zip(&result.estimates)
        .map(|(v, e)| SweepRow {
            value: *v,
            ke_mws: e.map(|e| e.ke),
        })
        .collect();

    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut csv = format!("{hyper_name},ke_mws\n");
    for r in &rows {
        let ke = r.ke_mws.map(|k| k.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{ke}\n", r.value));
    }
    let csv_path = cli.out.join(format!("sweep_{name}.csv"));
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;

    let truth_path = loaded.base_dir.join(TRUTH_FILE);
    let truth = if truth_path.exists() {
        Some(TruthRecord::load(&truth_path)?.ke_mws)
    } else {
        None
    };
    let points: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.value, r.ke_mws)).collect();
    let title = format!("{name} inertia estimate");
    let chart = svg::Chart {
        title: &title,
        x_label,
        y_label: "KE estimate (MW.s)",
        points: &points,
        truth,
    };
    let svg_path = cli.out.join(format!("sweep_{name}.svg"));
    fs::write(&svg_path, chart.render()).with_context(|| format!("writing {}", svg_path.display()))?;

    let failed = rows.iter().filter(|r| r.ke_mws.is_none()).count();
    let options = json!({
        "method": name,
        "from": from,
        "to": to,
        "step": step,
        "poly_horizon_s": if method == SweepMethod::Inoue { Some(poly_horizon_s) } else { None },
    });
    let table = SweepTable {
        method: name,
        hyperparameter: hyper_name,
        rows,
    };
    let report = RunReport::new(input, options, Vec::new(), vec![table], metadata(start))?;
    report.write(&cli.out.join(format!("sweep_{name}.json")))?;
    if !cli.quiet {
        println!(
            "{} points ({failed} failed) -> {}",
            values.len(),
            csv_path.display()
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_counts() {
        assert_eq!(range_values(0.02, 1.0, 0.01).unwrap().len(), 99);
        assert_eq!(range_values(2.0, 30.0, 1.0).unwrap().len(), 29);
        assert_eq!(range_values(0.02, 1.0, 0.01).unwrap()[3], 0.05);
        assert!(range_values(1.0, 0.5, 0.1).is_err());
        assert!(range_values(0.0, 1.0, 0.0).is_err());
    }
}
