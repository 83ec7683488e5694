//! Command-line front end: parameter sweeps to CSV, the verification suite,
//! and single-point probability queries.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use grover_switch::channels::NoiseParams;
use grover_switch::framework1::{p_framework1, p_framework1_sim};
use grover_switch::framework2::{p_framework2_sim, K_MAX};
use grover_switch::grover::{ideal_success_probability, noisy_success_probability, GroverConfig};
use grover_switch::qswitch::ControlSpec;
use grover_switch::verify::{formula_claims, verify_all, GridPreset, VerifyGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// CSV header; fixed byte-for-byte.
pub const CSV_HEADER: &str = "d,k,one_minus_t,theta,p_ideal,p_noisy,p_f1,p_f2";

#[derive(Parser, Debug)]
#[command(
    name = "grover-switch",
    about = "Grover search under depolarizing noise, with and without quantum-switch mitigation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep noise strength and write one CSV row per (k, noise point).
    Sweep(SweepArgs),
    /// Run the brute-force cross-check suite; exit 0 iff every case passes.
    Verify(VerifyArgs),
    /// Print a single success probability with 12 fractional digits.
    Point(PointArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Qubit count (search space d = 2^n).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated iteration counts, e.g. 1,2,3.
    #[arg(long)]
    k: Option<String>,
    /// Number of noise samples in [0, 1], endpoints included.
    #[arg(long)]
    noise_points: Option<usize>,
    /// Control amplitude θ of every switch.
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated subset of {none,f1,f2}; unselected columns stay empty.
    #[arg(long)]
    frameworks: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    /// Config file with key=value lines; flags take precedence over it.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = PresetArg::Quick)]
    preset: PresetArg,
    /// Test hook: perturb t on the closed-form side to force failures.
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject_jitter: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Quick,
    Full,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Noise strength 1 - t.
    #[arg(long)]
    noise: f64,
    #[arg(long, value_enum)]
    framework: FrameworkArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrameworkArg {
    /// Bare noisy Grover, no switch.
    None,
    /// Switch + post-selection every iteration.
    F1,
    /// Register of switches, one measurement at the end.
    F2,
}

/// Resolved sweep configuration after merging flags, config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub k_list: Vec<usize>,
    pub noise_points: usize,
    pub theta: f64,
    pub none: bool,
    pub f1: bool,
    pub f2: bool,
    pub out: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 4,
            k_list: vec![1, 2, 3],
            noise_points: 101,
            theta: 0.5,
            none: true,
            f1: true,
            f2: true,
            out: "sweep.csv".into(),
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(), String> {
        if !(1..=6).contains(&self.n) {
            return Err(format!("n = {} outside 1..=6", self.n));
        }
        if self.k_list.is_empty() {
            return Err("k list is empty".into());
        }
        if let Some(&k) = self.k_list.iter().find(|&&k| k == 0 || k > K_MAX) {
            return Err(format!("k = {k} outside 1..={K_MAX}"));
        }
        if self.noise_points < 2 {
            return Err(format!("noise-points = {} must be at least 2", self.noise_points));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(format!("theta = {} outside [0, 1]", self.theta));
        }
        Ok(())
    }
}

/// One sweep record. Unselected probabilities are None and serialize as
/// empty fields.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub d: usize,
    pub k: usize,
    pub one_minus_t: f64,
    pub theta: f64,
    pub p_ideal: f64,
    pub p_noisy: Option<f64>,
    pub p_f1: Option<f64>,
    pub p_f2: Option<f64>,
}

/// Fixed 12-fractional-digit float format used for every CSV field and for
/// `point` output.
pub fn format_prob(v: f64) -> String {
    format!("{v:.12}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_prob).unwrap_or_default()
}

/// Computes all rows, k-major then noise point, each point independently.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>, String> {
    cfg.validate()?;
    let d = 1usize << cfg.n;
    let grover_cfg = GroverConfig::new(cfg.n, 0).map_err(|e| e.to_string())?;
    let spec = ControlSpec::new(cfg.theta).map_err(|e| e.to_string())?;
    let points: Vec<(usize, usize)> = cfg
        .k_list
        .iter()
        .flat_map(|&k| (0..cfg.noise_points).map(move |i| (k, i)))
        .collect();
    points
        .into_par_iter()
        .map(|(k, i)| {
            let one_minus_t = i as f64 / (cfg.noise_points - 1) as f64;
            let t = NoiseParams::from_noise_strength(one_minus_t).map_err(|e| e.to_string())?;
            let p_noisy = cfg.none.then(|| noisy_success_probability(k, t, d));
            let p_f1 = cfg
                .f1
                .then(|| p_framework1_sim(k, t, spec, &grover_cfg).map_err(|e| e.to_string()))
                .transpose()?;
            let p_f2 = cfg
                .f2
                .then(|| p_framework2_sim(k, t, spec, &grover_cfg).map_err(|e| e.to_string()))
                .transpose()?;
            Ok(SweepRow {
                d,
                k,
                one_minus_t,
                theta: cfg.theta,
                p_ideal: ideal_success_probability(k, d),
                p_noisy,
                p_f1,
                p_f2,
            })
        })
        .collect()
}

/// Full CSV rendering: header plus one LF-terminated line per row.
pub fn render_sweep_csv(cfg: &SweepConfig) -> Result<String, String> {
    let rows = sweep_rows(cfg)?;
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.d,
            r.k,
            format_prob(r.one_minus_t),
            format_prob(r.theta),
            format_prob(r.p_ideal),
            format_opt(r.p_noisy),
            format_opt(r.p_f1),
            format_opt(r.p_f2),
        ));
    }
    Ok(out)
}

/// Probability for the `point` subcommand. The no-switch and stepwise values
/// come from the validated closed forms; the register value runs the
/// simulation (its general-k closed form is not part of the contract).
pub fn point_value(n: usize, k: usize, noise: f64, framework: FrameworkArg) -> Result<f64, String> {
    let cfg = GroverConfig::new(n, 0).map_err(|e| e.to_string())?;
    let t = NoiseParams::from_noise_strength(noise).map_err(|e| e.to_string())?;
    if k > K_MAX {
        return Err(format!("k = {k} outside 0..={K_MAX}"));
    }
    let d = cfg.d();
    match framework {
        FrameworkArg::None => Ok(noisy_success_probability(k, t, d)),
        FrameworkArg::F1 => Ok(p_framework1(k, t, d)),
        FrameworkArg::F2 => {
            let spec = ControlSpec::new(0.5).map_err(|e| e.to_string())?;
            p_framework2_sim(k, t, spec, &cfg).map_err(|e| e.to_string())
        }
    }
}

fn parse_k_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|e| format!("bad k '{tok}': {e}")))
        .collect()
}

fn parse_frameworks(s: &str) -> Result<(bool, bool, bool), String> {
    let (mut none, mut f1, mut f2) = (false, false, false);
    for tok in s.split(',') {
        match tok.trim() {
            "none" => none = true,
            "f1" => f1 = true,
            "f2" => f2 = true,
            other => return Err(format!("unknown framework '{other}' (expected none, f1, f2)")),
        }
    }
    Ok((none, f1, f2))
}

/// Key=value config file; '#' starts a comment. Recognized keys mirror the
/// sweep flags: n, k, noise_points, theta, frameworks, out.
fn apply_config_file(cfg: &mut SweepConfig, path: &str) -> Result<(), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => cfg.n = value.parse().map_err(|e| format!("bad n: {e}"))?,
            "k" => cfg.k_list = parse_k_list(value)?,
            "noise_points" => {
                cfg.noise_points = value.parse().map_err(|e| format!("bad noise_points: {e}"))?
            }
            "theta" => cfg.theta = value.parse().map_err(|e| format!("bad theta: {e}"))?,
            "frameworks" => {
                let (none, f1, f2) = parse_frameworks(value)?;
                cfg.none = none;
                cfg.f1 = f1;
                cfg.f2 = f2;
            }
            "out" => cfg.out = value.to_string(),
            other => return Err(format!("{path}:{}: unknown key '{other}'", lineno + 1)),
        }
    }
    Ok(())
}

fn resolve_sweep_config(args: &SweepArgs) -> Result<SweepConfig, String> {
    let mut cfg = SweepConfig::default();
    if let Some(path) = &args.config {
        apply_config_file(&mut cfg, path)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(k) = &args.k {
        cfg.k_list = parse_k_list(k)?;
    }
    if let Some(np) = args.noise_points {
        cfg.noise_points = np;
    }
    if let Some(theta) = args.theta {
        cfg.theta = theta;
    }
    if let Some(fw) = &args.frameworks {
        let (none, f1, f2) = parse_frameworks(fw)?;
        cfg.none = none;
        cfg.f1 = f1;
        cfg.f2 = f2;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cfg = match resolve_sweep_config(args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let csv = match render_sweep_csv(&cfg) {
        Ok(csv) => csv,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_file(Path::new(&cfg.out), csv.as_bytes()) {
        let _ = writeln!(stderr, "error: cannot write {}: {e}", cfg.out);
        return EXIT_IO;
    }
    let rows = cfg.noise_points * cfg.k_list.len();
    let _ = writeln!(stdout, "wrote {} rows to {}", rows, cfg.out);
    EXIT_OK
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

fn run_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let preset = match args.preset {
        PresetArg::Quick => GridPreset::Quick,
        PresetArg::Full => GridPreset::Full,
    };
    let grid = VerifyGrid {
        preset,
        closed_side_t_jitter: args.inject_jitter,
    };
    let reports = match verify_all(&grid) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: verification aborted: {e}");
            return EXIT_VERIFY_FAILED;
        }
    };
    let mut failures = 0usize;
    for r in &reports {
        let _ = writeln!(stdout, "{r}");
        if !r.passed {
            failures += 1;
        }
    }
    match formula_claims(&grid) {
        Ok(claims) => {
            for c in &claims {
                let _ = writeln!(
                    stdout,
                    "[CLAIM {}] {}  dev={:.3e}  ({} vs {})",
                    if c.passed { "ok" } else { "deviates" },
                    c.case_id,
                    c.max_abs_error,
                    c.lhs_source,
                    c.rhs_source,
                );
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: claim evaluation failed: {e}");
            return EXIT_VERIFY_FAILED;
        }
    }
    let _ = writeln!(
        stdout,
        "{} cases, {} failures (claims reported separately, not gating)",
        reports.len(),
        failures
    );
    if failures > 0 {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    }
}

fn run_point(args: &PointArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match point_value(args.n, args.k, args.noise, args.framework) {
        Ok(v) => {
            let _ = writeln!(stdout, "{}", format_prob(v));
            EXIT_OK
        }
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Parses and dispatches; returns the process exit code.
pub fn execute<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match &cli.command {
        Command::Sweep(args) => run_sweep(args, stdout, stderr),
        Command::Verify(args) => run_verify(args, stdout, stderr),
        Command::Point(args) => run_point(args, stdout, stderr),
    }
}
