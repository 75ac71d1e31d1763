//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` and one `--section.key VALUE`
//! flag per configuration key. Data goes to `-o` (stdout when absent); the
//! `key: value` report goes to `--report` (stderr when absent).
//!
//! Exit codes: 0 success (including flagged non-convergence), 1 numerical or
//! i/o failure, 2 usage or malformed input, 3 infeasible input.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{ModelKind, RunConfig};
use crate::denoise::denoise;
use crate::error::{Error, Result};
use crate::extend::{extend_many, ExtensionOptions};
use crate::gram::{build_gramian, min_eigenvalue};
use crate::io::{self, fmt_f64, Report};
use crate::models::{add_noise, dimer_greens, ssh_greens};
use crate::poles::{decompose_cf_with_diagnostics, estimate_rank};
use crate::signal::SampledSignal;
use crate::spectrum::{check_positivity, damped_ft, default_grid, dominant_peaks, truncation_tail_bound};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Parse(_) => EXIT_USAGE,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Numeric(_) | Error::Io(_) => EXIT_RUNTIME,
    }
}

fn command() -> Command {
    let keys = RunConfig::keys();
    let common = |c: Command, input: bool| {
        let mut c = c
            .arg(Arg::new("output").short('o').long("output").value_name("FILE").value_parser(clap::value_parser!(PathBuf)))
            .arg(Arg::new("report").long("report").value_name("FILE").value_parser(clap::value_parser!(PathBuf)).help("Report file [default: stderr]"))
            .arg(Arg::new("config").long("config").value_name("FILE").value_parser(clap::value_parser!(PathBuf)));
        if input {
            c = c
                .arg(Arg::new("input").short('i').long("input").value_name("FILE").required(true).value_parser(clap::value_parser!(PathBuf)))
                .arg(
                    Arg::new("reference")
                        .long("reference")
                        .value_name("FILE")
                        .value_parser(clap::value_parser!(PathBuf))
                        .help("Exact signal to compare the output against"),
                );
        }
        for k in &keys {
            c = c.arg(Arg::new(k.clone()).long(k.clone()).value_name("VALUE").action(ArgAction::Set).help_heading("Configuration"));
        }
        c
    };
    Command::new("posdef")
        .about("Positive definite denoising, extension and spectra of sampled response functions")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(common(Command::new("generate").about("Sample a model Green's function, optionally with noise"), false))
        .subcommand(common(Command::new("denoise").about("Project a signal onto positive definite signals"), true))
        .subcommand(common(Command::new("extend").about("Append positive definite samples"), true))
        .subcommand(common(Command::new("poles").about("Fit a pole model to a positive definite signal"), true))
        .subcommand(common(Command::new("spectrum").about("Damped Fourier transform and positivity check"), true))
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match dispatch(name, sub) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(name: &str, m: &ArgMatches) -> Result<()> {
    let overrides: Vec<(String, String)> = RunConfig::keys()
        .into_iter()
        .filter_map(|k| m.get_one::<String>(&k).map(|v| (k.clone(), v.clone())))
        .collect();
    let cfg = RunConfig::load(m.get_one::<PathBuf>("config").map(PathBuf::as_path), &overrides)?;
    let output = m.get_one::<PathBuf>("output").map(PathBuf::as_path);
    let report_path = m.get_one::<PathBuf>("report").map(PathBuf::as_path);
    let (data, report) = match name {
        "generate" => generate(&cfg, output)?,
        _ => {
            let input = io::read_signal(m.get_one::<PathBuf>("input").expect("required"))?;
            let reference = m.get_one::<PathBuf>("reference").map(|p| io::read_signal(p)).transpose()?;
            match name {
                "denoise" => cmd_denoise(&cfg, &input, reference.as_ref())?,
                "extend" => cmd_extend(&cfg, &input, reference.as_ref())?,
                "poles" => cmd_poles(&cfg, &input)?,
                "spectrum" => cmd_spectrum(&cfg, &input)?,
                _ => unreachable!("unknown subcommand {name}"),
            }
        }
    };
    io::write_output(output, &data)?;
    match report_path {
        Some(p) => std::fs::write(p, report.to_string()).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => eprint!("{report}"),
    }
    Ok(())
}

/// Lower-case serde name of a config enum.
fn name_of<T: serde::Serialize>(x: &T) -> String {
    match toml::Value::try_from(x) {
        Ok(toml::Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => "?".to_string(),
    }
}

fn generate(cfg: &RunConfig, output: Option<&Path>) -> Result<(String, Report)> {
    let grid = cfg.model.grid()?;
    let clean = match cfg.model.kind {
        ModelKind::Dimer => dimer_greens(&cfg.dimer, &grid)?,
        ModelKind::Ssh => ssh_greens(&cfg.ssh, &grid)?,
    };
    let noise = cfg.effective_noise();
    let noisy = add_noise(&clean, &noise)?;

    let mut meta = Report::new();
    meta.push("model", name_of(&cfg.model.kind)).push("dt", fmt_f64(grid.dt)).push("n", grid.n).push("f0", fmt_f64(clean.f0()));
    let section = match cfg.model.kind {
        ModelKind::Dimer => "dimer",
        ModelKind::Ssh => "ssh",
    };
    for (k, v) in cfg.section_entries(section) {
        meta.push(&k, v);
    }
    meta.push("noise.sigma", fmt_f64(noise.sigma)).push("noise.seed", noise.seed).push("noise.target", name_of(&noise.target));
    if let Some(p) = output {
        let mut side = p.as_os_str().to_owned();
        side.push(".meta");
        let side = PathBuf::from(side);
        std::fs::write(&side, meta.to_string()).map_err(|e| Error::Io(format!("{}: {e}", side.display())))?;
    }
    Ok((io::format_signal(&noisy), meta))
}

fn push_comparison(r: &mut Report, input: &SampledSignal, output: &SampledSignal, reference: &SampledSignal) -> Result<()> {
    let n = output.len().min(reference.len());
    if n == 0 || (reference.dt() - output.dt()).abs() > io::SPACING_TOL * output.dt() {
        return Err(Error::InvalidInput("reference must share the time step of the input".into()));
    }
    let m = input.len().min(n);
    let before = input.truncated(m).rmse(&reference.truncated(m))?;
    let after = output.truncated(m).rmse(&reference.truncated(m))?;
    r.push("rmse_input", fmt_f64(before)).push("rmse_output", fmt_f64(after));
    if after > 0.0 {
        r.push("rmse_improvement", fmt_f64(before / after));
    }
    r.push("max_deviation", fmt_f64(output.truncated(n).max_abs_diff(&reference.truncated(n))?));
    Ok(())
}

fn cmd_denoise(cfg: &RunConfig, input: &SampledSignal, reference: Option<&SampledSignal>) -> Result<(String, Report)> {
    let (out, rep) = denoise(input, &cfg.denoise)?;
    let mut r = Report::new();
    r.push("strategy", name_of(&rep.strategy))
        .push("iterations", rep.iterations)
        .push("converged", rep.converged)
        .push("f0", fmt_f64(out.f0()))
        .push("f0_estimated", rep.f0_estimated)
        .push("input_min_eig", fmt_f64(min_eigenvalue(&build_gramian(input))?))
        .push("raw_min_eig", fmt_f64(rep.raw_min_eig))
        .push("raw_cost", fmt_f64(rep.raw_cost))
        .push("shrink_factor", fmt_f64(rep.shrink_factor))
        .push("final_min_eig", fmt_f64(rep.final_min_eig))
        .push("final_cost", fmt_f64(rep.final_cost));
    if let Some(reference) = reference {
        push_comparison(&mut r, input, &out, reference)?;
    }
    Ok((io::format_signal(&out), r))
}

fn cmd_extend(cfg: &RunConfig, input: &SampledSignal, reference: Option<&SampledSignal>) -> Result<(String, Report)> {
    let opts: &ExtensionOptions = &cfg.extend;
    let (out, rep) = extend_many(input, opts)?;
    let mut r = Report::new();
    r.push("strategy", name_of(&opts.strategy)).push("input_len", input.len()).push("appended", rep.records.len()).push("output_len", out.len());
    r.push("all_unique", !rep.records.is_empty() && rep.records.iter().all(|x| x.unique));
    if let Some(m) = rep.records.iter().filter_map(|x| x.min_eig).reduce(f64::min) {
        r.push("min_eig_min", fmt_f64(m));
    }
    r.push("final_min_eig", fmt_f64(min_eigenvalue(&build_gramian(&out))?));
    for (i, rec) in rep.records.iter().enumerate() {
        let j = input.len() + i;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_else(|| "none".into());
        r.push(
            &format!("point.{j}"),
            format!(
                "re={} im={} radius={} area={} min_eig={} unique={}",
                fmt_f64(rec.value.re),
                fmt_f64(rec.value.im),
                opt(rec.radius),
                opt(rec.area),
                opt(rec.min_eig),
                rec.unique
            ),
        );
    }
    if let Some(reference) = reference {
        push_comparison(&mut r, input, &out, reference)?;
    }
    Ok((io::format_signal(&out), r))
}

fn cmd_poles(cfg: &RunConfig, input: &SampledSignal) -> Result<(String, Report)> {
    let t = build_gramian(input);
    let m = t.size();
    if m < 2 {
        return Err(Error::InvalidInput("pole fitting needs at least two samples".into()));
    }
    let (rank, estimated) = match cfg.poles.rank {
        Some(r) => (r, false),
        None => (estimate_rank(&t, cfg.poles.singular_tol)?.clamp(1, m - 1), true),
    };
    let d = decompose_cf_with_diagnostics(&t, rank, input.dt())?;
    let mut r = Report::new();
    r.push("rank", rank)
        .push("rank_estimated", estimated)
        .push("method", format!("{:?}", d.method).to_lowercase())
        .push("relative_residual", fmt_f64(d.relative_residual))
        .push("f0", fmt_f64(input.f0()))
        .push("total_weight", fmt_f64(d.model.total_weight()));
    for (method, res) in &d.candidates {
        r.push(&format!("candidate.{}", format!("{method:?}").to_lowercase()), fmt_f64(*res));
    }
    Ok((io::format_poles(&d.model), r))
}

fn cmd_spectrum(cfg: &RunConfig, input: &SampledSignal) -> Result<(String, Report)> {
    let o = &cfg.spectrum;
    let dt = input.dt();
    let omegas = match (o.omega_min, o.omega_max) {
        (None, None) => default_grid(dt, o.points)?,
        (lo, hi) => {
            let half = std::f64::consts::PI / dt;
            let (lo, hi) = (lo.unwrap_or(-half), hi.unwrap_or(half));
            if !(hi > lo) || o.points < 2 {
                return Err(Error::InvalidInput(format!("need omega_min < omega_max and at least two points, got [{lo}, {hi}] x {}", o.points)));
            }
            (0..o.points).map(|i| lo + (hi - lo) * i as f64 / (o.points - 1) as f64).collect()
        }
    };
    let sp = damped_ft(input, o.tau, &omegas)?;
    let tail = truncation_tail_bound(input.f0(), dt, input.len(), o.tau);
    let tol = o.tol.unwrap_or(tail);
    let pos = check_positivity(&sp, tol);
    let mut r = Report::new();
    r.push("tau", fmt_f64(o.tau))
        .push("points", omegas.len())
        .push("tail_bound", fmt_f64(tail))
        .push("tol", fmt_f64(tol))
        .push("min_value", fmt_f64(pos.min_value))
        .push("argmin_omega", fmt_f64(pos.argmin_omega))
        .push("fraction_below", fmt_f64(pos.fraction_below))
        .push("positive", pos.pass);
    for (i, (w, a)) in dominant_peaks(&sp, o.peaks).into_iter().enumerate() {
        r.push(&format!("peak.{}", i + 1), format!("omega={} value={}", fmt_f64(w), fmt_f64(a)));
    }
    Ok((io::format_spectrum(&sp), r))
}
