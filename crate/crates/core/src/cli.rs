//! Command-line front end. Exit codes: 0 success or dissipative, 1 not
//! certified, 2 parse or configuration error, 3 failed precondition,
//! 4 dimension mismatch, 5 acceptance failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_bundle, load_system, AnalysisDesc, Bundle, SupplyDesc, SupplyKind};
use crate::dissipativity::{
    assemble_closed_loop_b, check_closed_loop_dissipativity, FiniteHorizonLfr, Tolerances,
};
use crate::error::{Error, Result};
use crate::experiments::{
    gain_sweep, pe_data, run_example1, run_example2, run_fig1, shipped_example2_controller,
    ExperimentConfig, Fig1Config, GainReport,
};
use crate::linalg;
use crate::signals::{hankel_rank, is_persistently_exciting, load_dictionary, write_dictionary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;
pub const EXIT_ACCEPTANCE: i32 = 5;

/// Reference H-infinity norm of the tracking loop.
const EXAMPLE1_HINF: f64 = 1.0428;
const FIG1_SEEDS: u64 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "ddgp",
    version,
    about = "Data-driven dissipativity analysis of interconnected systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print additional detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check persistency of excitation and the data rank condition.
    Diagnose(DiagnoseArgs),
    /// Certify dissipativity of a data-driven closed loop at one depth.
    Check(CheckArgs),
    /// Sweep the finite-horizon l2-gain over a range of depths.
    Gain(GainArgs),
    /// Rerun a benchmark and compare against its acceptance thresholds.
    Reproduce(ReproduceArgs),
    /// Generate an input-output record from a model file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Default)]
pub struct ToleranceArgs {
    /// Relative singular-value threshold for numerical rank [default: 1e-9].
    #[arg(long = "rank-tol")]
    pub rank_tol: Option<f64>,
    /// PSD margin relative to the projected matrix norm [default: 1e-8].
    #[arg(long = "psd-tol")]
    pub psd_tol: Option<f64>,
    /// Relative stopping width of the gain bisection [default: 1e-8].
    #[arg(long = "bisect-tol")]
    pub bisect_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Data dictionary CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Hankel depth.
    #[arg(long = "L")]
    pub horizon: usize,
    /// State dimension of the plant.
    #[arg(long = "nx")]
    pub n_x: usize,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Data dictionary CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Interconnection file, or a bundle with an `[interconnection]` table.
    #[arg(long)]
    pub model: PathBuf,
    /// Supply-rate file; overrides the bundle's `[supply]`.
    #[arg(long)]
    pub supply: Option<PathBuf>,
    /// l2-gain bound; overrides any supply file.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Trajectory depth; the bundle's `analysis.L` otherwise.
    #[arg(long = "L")]
    pub horizon: Option<usize>,
    /// Zero-prefix length, at least the lag bound and above the model lag; else `analysis.nu`.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Upper bound on the plant lag; else `analysis.lag_bound`.
    #[arg(long = "lag-bound")]
    pub lag_bound: Option<usize>,
    /// Certificate output (TOML); printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    /// Data dictionary CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Interconnection file, or a bundle with an `[interconnection]` table.
    #[arg(long)]
    pub model: PathBuf,
    /// Single depth.
    #[arg(long = "L", conflicts_with = "horizon_range")]
    pub horizon: Option<usize>,
    /// Inclusive depth range `a:b`.
    #[arg(long = "L-range", value_parser = parse_range)]
    pub horizon_range: Option<(usize, usize)>,
    /// Zero-prefix length, at least the lag bound and above the model lag; else `analysis.nu`.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Upper bound on the plant lag; else `analysis.lag_bound`.
    #[arg(long = "lag-bound")]
    pub lag_bound: Option<usize>,
    /// Append the model-based gain; needs a `[plant]` in the model bundle.
    #[arg(long = "with-oracle")]
    pub with_oracle: bool,
    /// CSV output; printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Benchmark {
    Fig1,
    Example1,
    Example2,
}

impl Benchmark {
    fn name(self) -> &'static str {
        match self {
            Benchmark::Fig1 => "fig1",
            Benchmark::Example1 => "example1",
            Benchmark::Example2 => "example2",
        }
    }
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    pub name: Benchmark,
    /// Seed of the excitation (first of ten seeds for `fig1`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Controller file for `example2`; the shipped stabilizer otherwise.
    #[arg(long)]
    pub controller: Option<PathBuf>,
    /// Directory for the CSV report and summary; nothing is written when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// System file, or a bundle whose `[plant]` is simulated.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of samples.
    #[arg(long = "N")]
    pub n_samples: Option<usize>,
    /// Seed of the uniform input.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output; printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected a:b, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Config(_) | Error::Io(_) => EXIT_PARSE,
        Error::DimensionMismatch { .. } => EXIT_DIMENSION,
        Error::NoFiniteGain { .. } => EXIT_NOT_CERTIFIED,
        _ => EXIT_PRECONDITION,
    }
}

fn tolerances(analysis: &AnalysisDesc, flags: &ToleranceArgs) -> Result<Tolerances> {
    let base = analysis.tolerances();
    let tol = Tolerances {
        rank_tol: flags.rank_tol.unwrap_or(base.rank_tol),
        psd_tol: flags.psd_tol.unwrap_or(base.psd_tol),
        bisect_tol: flags.bisect_tol.unwrap_or(base.bisect_tol),
        max_bisect: base.max_bisect,
    };
    for (name, v) in [
        ("rank-tol", tol.rank_tol),
        ("psd-tol", tol.psd_tol),
        ("bisect-tol", tol.bisect_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("--{name} must be positive, got {v}")));
        }
    }
    Ok(tol)
}

fn required<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| {
        Error::Config(format!(
            "missing {what}: pass it as a flag or in the bundle's [analysis] table"
        ))
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Run a parsed command; errors are reported on `stderr` and mapped to exit codes.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Diagnose(a) => diagnose(a, stdout),
        Command::Check(a) => check(a, cli.verbose, stdout),
        Command::Gain(a) => gain(a, stdout),
        Command::Reproduce(a) => reproduce(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn diagnose(a: &DiagnoseArgs, stdout: &mut dyn Write) -> Result<i32> {
    let d = load_dictionary(&a.data)?;
    let tol = tolerances(&AnalysisDesc::default(), &a.tol)?;
    let order = a.horizon + a.n_x;
    let mut text = String::new();
    writeln!(
        text,
        "samples: {}, inputs: {}, outputs: {}",
        d.len(),
        d.n_u(),
        d.n_y()
    )
    .expect("string write");
    let pe = order <= d.len() && is_persistently_exciting(&d.u, order, tol.rank_tol)?;
    writeln!(
        text,
        "persistency of excitation of order {order}: {}",
        if pe { "satisfied" } else { "violated" }
    )
    .expect("string write");
    let h = d.stacked_hankel(a.horizon)?;
    let rank = hankel_rank(&d, a.horizon, tol.rank_tol)?;
    let required = d.n_u() * a.horizon + a.n_x;
    let rank_ok = rank == required;
    writeln!(
        text,
        "rank condition at depth {}: rank {rank}, required {required}: {}",
        a.horizon,
        if rank_ok {
            "rank condition satisfied"
        } else {
            "rank condition violated"
        }
    )
    .expect("string write");
    let sv: Vec<String> = linalg::singular_values(&h)
        .iter()
        .map(|&s| format!("{s:.6e}"))
        .collect();
    writeln!(text, "hankel singular values: {}", sv.join(" ")).expect("string write");
    stdout.write_all(text.as_bytes())?;
    Ok(if pe && rank_ok {
        EXIT_OK
    } else {
        EXIT_PRECONDITION
    })
}

fn interconnection(bundle: &Bundle) -> Result<crate::polymat::IoRepresentation> {
    bundle
        .interconnection
        .as_ref()
        .ok_or_else(|| Error::Config("model file defines no interconnection".into()))?
        .to_io()
}

fn check(a: &CheckArgs, verbose: u8, stdout: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&a.model)?;
    let d = load_dictionary(&a.data)?;
    let an = &bundle.analysis;
    let tol = tolerances(an, &a.tol)?;
    let horizon = required(a.horizon.or(an.horizon), "depth L")?;
    let nu = required(a.nu.or(an.nu), "prefix nu")?;
    let lag_bound = required(a.lag_bound.or(an.lag_bound), "lag bound")?;
    let supply_desc = match (&a.gamma, &a.supply) {
        (Some(g), _) => SupplyDesc {
            supply: SupplyKind::L2,
            gamma: Some(*g),
            nu_param: None,
            beta: None,
            q: None,
            s: None,
            r: None,
        },
        (None, Some(path)) => crate::config::load_supply(path)?,
        (None, None) => required(bundle.supply.clone(), "supply rate")?,
    };
    let m = interconnection(&bundle)?;
    let lfr = FiniteHorizonLfr::from_io(&m, &d, horizon, nu, lag_bound)?;
    let cs = assemble_closed_loop_b(&lfr)?;
    let pi = supply_desc.to_supply(lfr.n_w, lfr.n_z)?;
    let mut cert = check_closed_loop_dissipativity(&cs, &pi, &tol)?;
    cert.rank_condition_ok =
        Some(linalg::numerical_rank(&lfr.h_u, tol.rank_tol) == lfr.h_u.nrows());
    let text = cert.to_toml();
    emit(a.out.as_deref(), &text, stdout)?;
    if a.out.is_some() || verbose > 0 {
        writeln!(
            stdout,
            "{} (min eigenvalue {:.6e}, nullspace dimension {})",
            if cert.is_dissipative() {
                "dissipative"
            } else {
                "not certified"
            },
            cert.min_eig,
            cert.nullspace_dim
        )?;
    }
    Ok(if cert.is_dissipative() {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    })
}

fn gain(a: &GainArgs, stdout: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&a.model)?;
    let d = load_dictionary(&a.data)?;
    let an = &bundle.analysis;
    let (lo, hi) = match (a.horizon, a.horizon_range) {
        (Some(l), _) => (l, l),
        (None, Some(r)) => r,
        (None, None) => match (an.horizon_range, an.horizon) {
            (Some([lo, hi]), _) => (lo, hi),
            (None, Some(l)) => (l, l),
            (None, None) => {
                return Err(Error::Config("missing depth: pass --L or --L-range".into()))
            }
        },
    };
    let cfg = ExperimentConfig {
        seed: 0,
        n_samples: d.len(),
        horizons: lo..=hi,
        nu: required(a.nu.or(an.nu), "prefix nu")?,
        lag_bound: required(a.lag_bound.or(an.lag_bound), "lag bound")?,
        noise: 0.0,
        tolerances: tolerances(an, &a.tol)?,
        output: None,
    };
    cfg.validate()?;
    let m = interconnection(&bundle)?;
    let plant = if a.with_oracle {
        let desc = bundle.plant.as_ref().ok_or_else(|| {
            Error::Config("--with-oracle needs a [plant] table in the model bundle".into())
        })?;
        Some(desc.to_state_space()?)
    } else {
        None
    };
    let report = gain_sweep(&m, &d, plant.as_ref(), &cfg)?;
    emit(a.out.as_deref(), &report.to_csv(), stdout)?;
    let unbounded = report.rows.iter().any(|r| r.gamma_dd.is_infinite());
    Ok(if unbounded {
        EXIT_NOT_CERTIFIED
    } else {
        EXIT_OK
    })
}

struct Summary {
    text: String,
    all_passed: bool,
}

impl Summary {
    fn new(header: String) -> Self {
        Self {
            text: header + "\n",
            all_passed: true,
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.text.push_str(text.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, ok: bool, text: impl AsRef<str>) {
        self.all_passed &= ok;
        self.line(format!(
            "[{}] {}",
            if ok { "PASS" } else { "FAIL" },
            text.as_ref()
        ));
    }

    fn finish(mut self) -> Self {
        let verdict = if self.all_passed {
            "all checks passed"
        } else {
            "acceptance failed"
        };
        self.line(format!("result: {verdict}"));
        self
    }
}

fn gain_summary(report: &GainReport, rel_tol: f64, s: &mut Summary) {
    let err = report.max_relative_error();
    s.check(
        err <= rel_tol && report.zero_rows_agree(),
        format!("data-driven gain matches the model-based gain for every L (max relative error {err:.2e} <= {rel_tol:.0e})"),
    );
    s.check(
        report.is_nondecreasing(1e-6),
        "data-driven gain nondecreasing in L",
    );
}

fn reproduce(a: &ReproduceArgs, stdout: &mut dyn Write) -> Result<i32> {
    let tol = tolerances(&AnalysisDesc::default(), &a.tol)?;
    let (csv, summary) = match a.name {
        Benchmark::Example1 => {
            let cfg = ExperimentConfig {
                seed: a.seed.unwrap_or(ExperimentConfig::example1().seed),
                tolerances: tol,
                ..ExperimentConfig::example1()
            };
            let report = run_example1(&cfg)?;
            let hinf = report.hinf.unwrap_or(f64::NAN);
            let mut s = Summary::new(experiment_header("example1", &cfg));
            s.line(format!("H-infinity norm of the closed loop: {hinf:.6}"));
            s.check(
                (hinf - EXAMPLE1_HINF).abs() <= 1e-3,
                format!("H-infinity ≈ 1.0428 reproduced (computed {hinf:.6})"),
            );
            gain_summary(&report, 1e-3, &mut s);
            let last = report.last().map_or(f64::NAN, |r| r.gamma_dd);
            s.check(
                last >= 0.95 * hinf && last <= hinf,
                format!(
                    "gain at L = {} is {last:.6}, within [0.95, 1] x H-infinity",
                    cfg.horizons.end()
                ),
            );
            (report.to_csv(), s.finish())
        }
        Benchmark::Example2 => {
            let controller = match &a.controller {
                Some(path) => load_system(path)?.to_rational()?,
                None => shipped_example2_controller()?,
            };
            let cfg = ExperimentConfig {
                seed: a.seed.unwrap_or(ExperimentConfig::example2().seed),
                tolerances: tol,
                ..ExperimentConfig::example2()
            };
            let report = run_example2(&cfg, &controller)?;
            let hinf = report.hinf.unwrap_or(f64::NAN);
            let mut s = Summary::new(experiment_header("example2", &cfg));
            s.line(format!(
                "H-infinity norm of the supplied closed loop: {hinf:.6}"
            ));
            gain_summary(&report, 1e-3, &mut s);
            let last = report.last().map_or(f64::NAN, |r| r.gamma_dd);
            s.check(
                (last - hinf).abs() <= 0.1 * hinf,
                format!(
                    "gain at L = {} is {last:.6}, within 10% of H-infinity",
                    cfg.horizons.end()
                ),
            );
            (report.to_csv(), s.finish())
        }
        Benchmark::Fig1 => {
            let base = Fig1Config {
                seed: a.seed.unwrap_or(0),
                rank_tol: tol.rank_tol,
                ..Fig1Config::default()
            };
            let main = run_fig1(&base)?;
            let mut s = Summary::new(format!(
                "reproduce fig1 (seeds {}..{}, (n_u, n_x, n_y) = ({}, {}, {}), N = {})",
                base.seed,
                base.seed + FIG1_SEEDS - 1,
                base.n_u,
                base.n_x,
                base.n_y,
                base.n_samples
            ));
            for seed in base.seed..base.seed + FIG1_SEEDS {
                let report = if seed == base.seed {
                    main.clone()
                } else {
                    run_fig1(&Fig1Config {
                        seed,
                        ..base.clone()
                    })?
                };
                s.check(
                    report.crossover_confirmed(),
                    format!("seed {seed}: lag {}, crossover confirmed", report.lag),
                );
            }
            (main.to_csv(), s.finish())
        }
    };
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", a.name.name())), &csv)?;
        std::fs::write(
            dir.join(format!("{}_summary.txt", a.name.name())),
            &summary.text,
        )?;
    }
    stdout.write_all(summary.text.as_bytes())?;
    Ok(if summary.all_passed {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    })
}

fn experiment_header(name: &str, cfg: &ExperimentConfig) -> String {
    format!(
        "reproduce {name} (seed {}, N = {}, nu = {}, L = {}..{})",
        cfg.seed,
        cfg.n_samples,
        cfg.nu,
        cfg.horizons.start(),
        cfg.horizons.end()
    )
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&a.model)?;
    let desc = bundle
        .plant
        .as_ref()
        .or(bundle.interconnection.as_ref())
        .ok_or_else(|| Error::Config("model file defines no system".into()))?;
    let sys = desc.to_state_space()?;
    let an = &bundle.analysis;
    let n = required(a.n_samples.or(an.n_samples), "sample count N")?;
    let seed = a.seed.or(an.seed).unwrap_or(0);
    // Check excitation up to the deepest analysed window when one is declared.
    let depth = an.horizon_range.map(|r| r[1]).or(an.horizon).unwrap_or(0) + sys.n_states();
    let tol = an.tolerances();
    let d = pe_data(&sys, n, depth.clamp(1, n), seed, tol.rank_tol)?;
    let mut buf = Vec::new();
    write_dictionary(&d, &mut buf)?;
    emit(
        a.out.as_deref(),
        std::str::from_utf8(&buf).expect("csv is utf-8"),
        stdout,
    )?;
    Ok(EXIT_OK)
}
