//! Batch front-end: single-point analysis, coupling sweeps, and the
//! strong-coupling asymptotic study. Emits CSV or JSON.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
//! 3 partial sweep failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

use harmonium::error::Error;
use harmonium::pipeline::{self, AnalysisConfig};
use harmonium::report;
use harmonium::wigner::{self, WignerConfig};

#[derive(Parser)]
#[command(
    name = "harmonium",
    version,
    about = "Singlet ground state and entanglement diagnostics of two \
             Coulomb-coupled electrons in a 2D harmonic trap",
    after_help = "Numerical defaults (value `auto`):\n  \
r-max           2 (g/2)^(1/3) + 10\n  \
basis-size      max(60, 20 + ceil(0.75 (g/2)^(2/3)))\n  \
basis-scale     1.0\n  \
grid-points     max(360, 2 basis-size + 80)\n  \
angular-points  max(160, 4 (l_max + 1), ceil(16 (g/2)^(1/3)))\n  \
l-max           smallest l with 2 eta_l < 1e-8 (cap 64)\n  \
jobs            available parallelism\n\n\
All resolved values are echoed in the output metadata; rerunning with the \
echoed values reproduces results byte for byte."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full diagnostics at a single coupling
    Solve(SolveArgs),
    /// Coupling ladder, one CSV row (or JSON record) per point
    Sweep(SweepArgs),
    /// Strong-coupling limits from the harmonic-approximation wavefunction
    Wigner(WignerArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Coupling strength g (or the Wigner parameter with --wigner-parameter)
    #[arg(long)]
    g: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    g_min: f64,
    #[arg(long)]
    g_max: f64,
    /// Number of couplings, endpoints included
    #[arg(long)]
    points: usize,
    /// Space the couplings logarithmically
    #[arg(long)]
    log: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct WignerArgs {
    /// Increasing couplings for the extrapolation, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = wigner::default_g_list())]
    g_list: Vec<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Variational basis size, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_auto_usize)]
    basis_size: AutoUsize,
    /// Variational basis Gaussian scale alpha
    #[arg(long, default_value_t = 1.0)]
    basis_scale: f64,
    /// Radial quadrature points, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_auto_usize)]
    grid_points: AutoUsize,
    /// Radial truncation radius, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_auto_f64)]
    r_max: AutoF64,
    /// Highest angular channel, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_auto_usize)]
    l_max: AutoUsize,
    /// Angular quadrature points, or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_auto_usize)]
    angular_points: AutoUsize,
    /// Interpret coupling inputs as the Wigner parameter R_w (g = sqrt(2) R_w)
    #[arg(long)]
    wigner_parameter: bool,
    /// Worker threads for sweep points (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json; defaults to json for solve/wigner and csv for sweep
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Clone, Copy)]
struct AutoUsize(Option<usize>);
#[derive(Clone, Copy)]
struct AutoF64(Option<f64>);

fn parse_auto_usize(s: &str) -> Result<AutoUsize, String> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(AutoUsize(None))
    } else {
        s.parse::<usize>()
            .map(|v| AutoUsize(Some(v)))
            .map_err(|e| format!("expected `auto` or an unsigned integer: {e}"))
    }
}

fn parse_auto_f64(s: &str) -> Result<AutoF64, String> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(AutoF64(None))
    } else {
        s.parse::<f64>()
            .map(|v| AutoF64(Some(v)))
            .map_err(|e| format!("expected `auto` or a number: {e}"))
    }
}

impl CommonArgs {
    fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            basis_size: self.basis_size.0,
            basis_scale: self.basis_scale,
            grid_points: self.grid_points.0,
            r_max: self.r_max.0,
            l_max: self.l_max.0,
            angular_points: self.angular_points.0,
        }
    }

    /// g from a user-facing coupling input, honoring --wigner-parameter.
    fn coupling(&self, input: f64) -> f64 {
        if self.wigner_parameter {
            2.0f64.sqrt() * input
        } else {
            input
        }
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, contents)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn fail(err: &Error, context: serde_json::Value) -> i32 {
    eprint!("{}", report::error_document(err, context));
    err.exit_code()
}

fn run_solve(args: &SolveArgs) -> i32 {
    let g = args.common.coupling(args.g);
    let config = args.common.analysis_config();
    let context = json!({"mode": "solve", "g": g});
    let rep = match pipeline::analyze(g, &config) {
        Ok(r) => r,
        Err(e) => return fail(&e, context),
    };
    let text = match args.common.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => report::to_json(&rep),
        OutputFormat::Csv => format!("{}\n{}\n", report::CSV_HEADER, report::csv_row(&rep)),
    };
    match write_output(args.common.output.as_deref(), &text) {
        Ok(()) => 0,
        Err(e) => fail(&e, context),
    }
}

#[derive(serde::Serialize)]
struct SweepMetadata<'a> {
    mode: &'a str,
    g_min: f64,
    g_max: f64,
    points: usize,
    log_scale: bool,
    couplings: &'a [f64],
    /// per-row resolved parameters (null for failed rows)
    resolved: Vec<Option<&'a report::ReportMetadata>>,
    l_max_used: Vec<Option<usize>>,
}

fn run_sweep(args: &SweepArgs) -> i32 {
    let context = json!({
        "mode": "sweep",
        "g_min": args.g_min,
        "g_max": args.g_max,
        "points": args.points,
    });
    let g_min = args.common.coupling(args.g_min);
    let g_max = args.common.coupling(args.g_max);
    let couplings = match pipeline::coupling_ladder(g_min, g_max, args.points, args.log) {
        Ok(c) => c,
        Err(e) => return fail(&e, context),
    };
    let config = args.common.analysis_config();
    let result = match pipeline::sweep(&couplings, &config, args.common.jobs) {
        Ok(r) => r,
        Err(e) => return fail(&e, context),
    };

    let metadata = SweepMetadata {
        mode: "sweep",
        g_min,
        g_max,
        points: args.points,
        log_scale: args.log,
        couplings: &couplings,
        resolved: result
            .rows
            .iter()
            .map(|r| r.outcome.as_ref().ok().map(|rep| &rep.metadata))
            .collect(),
        l_max_used: result
            .rows
            .iter()
            .map(|r| r.outcome.as_ref().ok().map(|rep| rep.l_max_used))
            .collect(),
    };

    let code = match args.common.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from(report::CSV_HEADER);
            text.push('\n');
            for row in &result.rows {
                match &row.outcome {
                    Ok(rep) => text.push_str(&report::csv_row(rep)),
                    Err(e) => text.push_str(&report::csv_error_row(row.g, e)),
                }
                text.push('\n');
            }
            if let Err(e) = write_output(args.common.output.as_deref(), &text) {
                return fail(&e, context);
            }
            // resolved-parameter echo: sidecar file next to the CSV, or the
            // error stream when the table goes to stdout
            let meta_text = report::to_json(&metadata);
            match args.common.output.as_deref() {
                Some(p) => {
                    let meta_path = p.with_extension(match p.extension() {
                        Some(e) => format!("{}.meta.json", e.to_string_lossy()),
                        None => "meta.json".to_string(),
                    });
                    if let Err(e) = write_output(Some(&meta_path), &meta_text) {
                        return fail(&e, context);
                    }
                }
                None => eprint!("{meta_text}"),
            }
            0
        }
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct JsonSweep<'a> {
                metadata: &'a SweepMetadata<'a>,
                rows: Vec<serde_json::Value>,
            }
            let rows: Vec<serde_json::Value> = result
                .rows
                .iter()
                .map(|row| match &row.outcome {
                    Ok(rep) => serde_json::to_value(rep).expect("report serializes"),
                    Err(e) => json!({
                        "g": row.g,
                        "error": {"code": e.code(), "message": e.to_string()},
                    }),
                })
                .collect();
            let doc = JsonSweep {
                metadata: &metadata,
                rows,
            };
            if let Err(e) = write_output(args.common.output.as_deref(), &report::to_json(&doc)) {
                return fail(&e, context);
            }
            0
        }
    };
    if code != 0 {
        return code;
    }
    if result.any_failed() {
        3
    } else {
        0
    }
}

fn run_wigner(args: &WignerArgs) -> i32 {
    let g_list: Vec<f64> = args
        .g_list
        .iter()
        .map(|&g| args.common.coupling(g))
        .collect();
    let context = json!({"mode": "wigner", "g_list": g_list});
    let out = match wigner::asymptotic_spectrum(&g_list, &WignerConfig::default()) {
        Ok(o) => o,
        Err(e) => return fail(&e, context),
    };
    let text = match args.common.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => report::to_json(&out),
        OutputFormat::Csv => {
            let mut t = String::from(
                "g,classical_radius,grid_points,r_max,angular_points,omega_0,omega_1,omega_2,\
                 omega_3,lambda_ratio_1,lambda_ratio_2,lambda_ratio_3,parity_01,parity_12,\
                 parity_23,circular_variance\n",
            );
            for p in &out.points {
                let f = report::format_float;
                t.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    f(p.g),
                    f(p.classical_radius),
                    p.grid_points,
                    f(p.r_max),
                    p.angular_points,
                    f(p.omega_0),
                    f(p.omega_higher[0]),
                    f(p.omega_higher[1]),
                    f(p.omega_higher[2]),
                    f(p.lambda_ratios[0]),
                    f(p.lambda_ratios[1]),
                    f(p.lambda_ratios[2]),
                    f(p.parity_overlaps[0]),
                    f(p.parity_overlaps[1]),
                    f(p.parity_overlaps[2]),
                    f(p.circular_variance),
                ));
            }
            t
        }
    };
    match write_output(args.common.output.as_deref(), &text) {
        Ok(()) => 0,
        Err(e) => fail(&e, context),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    let err = Error::Config(e.to_string());
                    eprint!(
                        "{}",
                        report::error_document(&err, json!({"mode": "argument_parsing"}))
                    );
                    std::process::exit(1);
                }
            }
        }
    };
    let code = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Wigner(a) => run_wigner(a),
    };
    std::process::exit(code);
}
