//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use nalgebra::{DMatrix, DVector};

use ddgp::cli::{run, Cli};
use ddgp::experiments::{
    example2_plant, run_example1, run_example2, run_fig1, run_property_campaign,
    shipped_example2_controller, CampaignConfig, ExperimentConfig, Fig1Config,
};
use ddgp::lti::{two_mass_plant, TwoMassParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn example1() -> Outcome {
    let report = match run_example1(&ExperimentConfig::example1()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let hinf = report.hinf.unwrap_or(f64::NAN);
    let err = report.max_relative_error();
    let last = report.last().map_or(f64::NAN, |r| r.gamma_dd);
    let ok = (hinf - 1.0428).abs() <= 1e-3
        && err <= 1e-3
        && report.zero_rows_agree()
        && report.is_nondecreasing(1e-6)
        && last >= 0.95 * hinf
        && last <= hinf;
    outcome(
        ok,
        format!("H-infinity {hinf:.6}, max relative error {err:.2e}, gain(40) {last:.6}"),
    )
}

/// Classical RK4 on `x' = Ax + Bu` with `u = 1` on the first sampling interval.
fn continuous_pulse_response(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    h: f64,
    steps: usize,
) -> Vec<f64> {
    const SUBSTEPS: usize = 2000;
    let dt = h / SUBSTEPS as f64;
    let bu = b.column(0).into_owned();
    let mut x = DVector::zeros(a.nrows());
    let mut out = vec![(c * &x)[0]];
    for k in 0..steps {
        let forcing = if k == 0 {
            bu.clone()
        } else {
            DVector::zeros(a.nrows())
        };
        for _ in 0..SUBSTEPS {
            let f = |x: &DVector<f64>| a * x + &forcing;
            let k1 = f(&x);
            let k2 = f(&(&x + &k1 * (dt / 2.0)));
            let k3 = f(&(&x + &k2 * (dt / 2.0)));
            let k4 = f(&(&x + &k3 * dt));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        out.push((c * &x)[0]);
    }
    out
}

fn zoh_matches_integration() -> Result<f64, String> {
    let cont = two_mass_plant(&TwoMassParams::default());
    let disc = example2_plant().map_err(|e| e.to_string())?;
    let steps = 60;
    let reference = continuous_pulse_response(&cont.a, &cont.b, &cont.c, 0.1, steps);
    let mut u = DMatrix::zeros(1, steps + 1);
    u[(0, 0)] = 1.0;
    let u = ddgp::signals::Trajectory::from_matrix(u).map_err(|e| e.to_string())?;
    let y = disc
        .simulate(&u, &DVector::zeros(disc.n_states()))
        .map_err(|e| e.to_string())?;
    let scale = reference.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let err = (0..=steps)
        .map(|k| (y.as_matrix()[(0, k)] - reference[k]).abs())
        .fold(0.0, f64::max);
    Ok(err / scale)
}

fn example2() -> Outcome {
    let report = match shipped_example2_controller()
        .and_then(|k| run_example2(&ExperimentConfig::example2(), &k))
    {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let hinf = report.hinf.unwrap_or(f64::NAN);
    let err = report.max_relative_error();
    let last = report.last().map_or(f64::NAN, |r| r.gamma_dd);
    let (zoh_ok, zoh) = match zoh_matches_integration() {
        Ok(e) => (e <= 1e-6, format!("{e:.2e}")),
        Err(e) => (false, e),
    };
    let ok = err <= 1e-3 && report.zero_rows_agree() && (last - hinf).abs() <= 0.1 * hinf && zoh_ok;
    outcome(
        ok,
        format!("max relative error {err:.2e}, gain(60) {last:.6} vs H-infinity {hinf:.6}, ZOH vs RK4 {zoh}"),
    )
}

fn fig1() -> Outcome {
    let mut lags = Vec::new();
    let mut failed = Vec::new();
    for seed in 0..10 {
        match run_fig1(&Fig1Config {
            seed,
            ..Fig1Config::default()
        }) {
            Ok(r) => {
                lags.push(r.lag);
                if !r.crossover_confirmed() {
                    failed.push(seed);
                }
            }
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    outcome(
        failed.is_empty(),
        format!("lags {lags:?}, failing seeds {failed:?}"),
    )
}

fn campaign() -> Outcome {
    let summary = run_property_campaign(&CampaignConfig::default());
    let detail = summary
        .outcomes
        .iter()
        .map(|o| {
            format!(
                "{} {}/{}",
                o.name,
                o.passed,
                o.passed + o.failed + o.skipped
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(summary.all_passed(), detail)
}

fn reproduce_into(name: &str, dir: &Path) -> Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
    let cli = Cli::try_parse_from([
        "ddgp",
        "reproduce",
        name,
        "--out",
        dir.to_str().ok_or("non-UTF-8 path")?,
    ])
    .map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    if code != 0 {
        return Err(format!(
            "{name} exited with {code}: {}",
            String::from_utf8_lossy(&err)
        ));
    }
    let read = |f: String| std::fs::read(dir.join(f)).map_err(|e| e.to_string());
    Ok((
        out,
        read(format!("{name}.csv"))?,
        read(format!("{name}_summary.txt"))?,
    ))
}

fn determinism() -> Outcome {
    let mut checked = Vec::new();
    for name in ["example1", "example2", "fig1"] {
        let runs: Result<Vec<_>, String> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
                reproduce_into(name, dir.path())
            })
            .collect();
        match runs {
            Ok(r) if r[0] == r[1] => checked.push(name),
            Ok(_) => return outcome(false, format!("{name}: outputs differ between runs")),
            Err(e) => return outcome(false, e),
        }
    }
    outcome(true, format!("byte-identical reports for {checked:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 5] = [
        ("1 first benchmark loop reproduced", example1),
        ("2 two-mass loop matches the oracle", example2),
        ("3 rank crossover at the lag over 10 seeds", fig1),
        ("4 property suite on random instances", campaign),
        ("5 reproduce is deterministic", determinism),
    ];
    let mut all = true;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        all &= o.passed;
        println!(
            "[{}] {name}: {} ({:.1} s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
