//! Command-line front end: run the Deutsch machine, print trajectories,
//! sweep damping and Kerr strength to CSV, run the classical mode, and
//! execute `.qnl` netlists.
//!
//! Exit codes: 0 success, 1 runtime or I/O error, 2 usage error.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dualrail::circuit::State;
use dualrail::error::Error as SimError;
use dualrail::fock::OutcomeDist;
use dualrail::machine::{
    self, run_classical, run_trajectory, FunctionType, MachineConfig, OracleSelector,
};
use dualrail::netlist;
use dualrail::postselect::{self, Verdict};

#[derive(Parser)]
#[command(
    name = "dualrail",
    version,
    about = "Simulate the dual-rail optical Deutsch-Jozsa machine and related circuits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the machine and print the outcome distribution and verdicts
    Run(RunArgs),
    /// Print the labelled states psi_0 .. psi_5 of a lossless run
    Trajectory(TrajectoryArgs),
    /// Sweep the damping coupling and write error curves as CSV
    Sweep(SweepArgs),
    /// Compare classical (coherent-light) runs with and without S
    Classical(ClassicalArgs),
    /// Parse and execute a .qnl netlist file
    Netlist(NetlistArgs),
    /// Sweep the Kerr strength and write correctness curves as CSV
    ChiSweep(ChiSweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Switch bits: k1 k0 (e.g. 10) or k2 k1 k0 (e.g. 010)
    #[arg(long)]
    k: String,
    /// Keep the pi phase shift S in place (default)
    #[arg(long, conflicts_with = "no_s")]
    with_s: bool,
    /// Remove the phase shift S
    #[arg(long)]
    no_s: bool,
    /// Damping coupling on modes b and c during Bob's second pass
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Kerr strength of the Fredkin cell
    #[arg(long, default_value_t = PI, allow_negative_numbers = true)]
    chi: f64,
    /// Draw this many shots from the distribution
    #[arg(long)]
    sample: Option<u64>,
    /// Seed for --sample
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long)]
    k: String,
    #[arg(long, conflicts_with = "no_s")]
    with_s: bool,
    #[arg(long)]
    no_s: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "10")]
    k: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    gamma_max: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Space the grid geometrically (gamma-min must be positive)
    #[arg(long)]
    log: bool,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassicalArgs {
    /// Coherent amplitude fed into the logical-one rails
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Per-mode Fock cutoff for the reported count distributions
    #[arg(long, default_value_t = 16)]
    cutoff: usize,
    #[arg(long, default_value = "10")]
    k: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct NetlistArgs {
    /// Path to a .qnl file (QNL_PATH prefixes relative lookups)
    file: PathBuf,
    /// Also print the final state
    #[arg(long)]
    state: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct ChiSweepArgs {
    #[arg(long, default_value = "10")]
    k: String,
    #[arg(long, default_value_t = 65)]
    steps: usize,
    /// Remove the phase shift S
    #[arg(long)]
    no_s: bool,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

/// Errors split by exit code.
enum AppError {
    Usage(String),
    Runtime(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Runtime(m) => m,
        }
    }
}

impl From<SimError> for AppError {
    fn from(e: SimError) -> Self {
        match e {
            // bad parameter values are usage errors
            SimError::NegativeGamma(_)
            | SimError::CutoffTooSmall { .. }
            | SimError::UnsupportedConfig(_) => AppError::Usage(e.to_string()),
            other => AppError::Runtime(other.to_string()),
        }
    }
}

impl From<netlist::NetlistError> for AppError {
    fn from(e: netlist::NetlistError) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

type AppResult<T> = Result<T, AppError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Trajectory(args) => cmd_trajectory(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Classical(args) => cmd_classical(args),
        Cmd::Netlist(args) => cmd_netlist(args),
        Cmd::ChiSweep(args) => cmd_chi_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn parse_selector(k: &str) -> AppResult<OracleSelector> {
    OracleSelector::parse(k).map_err(|e| AppError::Usage(e.to_string()))
}

fn check_gamma(gamma: f64) -> AppResult<()> {
    if gamma < 0.0 {
        return Err(AppError::Usage("gamma must be nonnegative".into()));
    }
    Ok(())
}

fn tuple(counts: &[usize]) -> String {
    let parts: Vec<String> = counts.iter().map(|n| n.to_string()).collect();
    format!("({})", parts.join(","))
}

fn verdict_text(outcome: &[usize]) -> (String, Option<FunctionType>) {
    if outcome.len() == 4 {
        match postselect::classify(outcome) {
            Ok(Verdict::Accept(t)) => (format!("accept ({t})"), Some(t)),
            Ok(Verdict::Reject(r)) => (format!("reject ({r})"), None),
            Err(_) => ("-".into(), None),
        }
    } else {
        match machine::decode_outcome(outcome) {
            Some(t) => (format!("legal ({t})"), Some(t)),
            None => ("illegal".into(), None),
        }
    }
}

/// Deterministic shot sampling from the exact distribution.
fn sample_counts(dist: &OutcomeDist, shots: u64, seed: u64) -> Vec<(Vec<usize>, u64)> {
    let entries: Vec<(&Vec<usize>, f64)> = dist.iter().collect();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = vec![0u64; entries.len()];
    let total: f64 = entries.iter().map(|(_, p)| p).sum();
    for _ in 0..shots {
        let mut r: f64 = rng.gen_range(0.0..total);
        let mut picked = entries.len() - 1;
        for (i, (_, p)) in entries.iter().enumerate() {
            if r < *p {
                picked = i;
                break;
            }
            r -= p;
        }
        counts[picked] += 1;
    }
    entries
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|((k, _), c)| ((*k).clone(), c))
        .collect()
}

fn infer_answer(dist: &OutcomeDist) -> Option<FunctionType> {
    let mut p1 = 0.0;
    let mut p2 = 0.0;
    for (outcome, p) in dist.iter() {
        match verdict_text(outcome).1 {
            Some(FunctionType::Type1) => p1 += p,
            Some(FunctionType::Type2) => p2 += p,
            None => {}
        }
    }
    if p1 + p2 <= 0.0 {
        None
    } else if p1 >= p2 {
        Some(FunctionType::Type1)
    } else {
        Some(FunctionType::Type2)
    }
}

fn cmd_run(args: RunArgs) -> AppResult<()> {
    check_gamma(args.gamma)?;
    let selector = parse_selector(&args.k)?;
    let config = MachineConfig::new(selector)
        .with_s(!args.no_s)
        .gamma(args.gamma)
        .chi(args.chi);
    let started = std::time::Instant::now();
    let dist = machine::run_machine(&config)?;
    let elapsed = started.elapsed();
    let answer = infer_answer(&dist);
    let samples = args.sample.map(|n| sample_counts(&dist, n, args.seed));
    // timing goes to stderr so the data on stdout stays deterministic
    eprintln!("timing: {elapsed:?}");

    match args.format {
        Format::Table => {
            println!(
                "config: k={} S={} gamma={} chi={}",
                args.k,
                if config.with_s { "on" } else { "off" },
                config.gamma,
                config.chi
            );
            println!("{:<14} {:<22} verdict", "outcome", "probability");
            for (outcome, p) in dist.iter() {
                if p > 1e-12 {
                    let (v, _) = verdict_text(outcome);
                    println!("{:<14} {:<22} {}", tuple(outcome), format!("{p:.12}"), v);
                }
            }
            match answer {
                Some(t) => println!("inferred function type: {t}"),
                None => println!("inferred function type: none (no accepted outcomes)"),
            }
            if let Some(shots) = &samples {
                println!("samples (n={}, seed={}):", args.sample.unwrap(), args.seed);
                for (outcome, n) in shots {
                    println!("  {} x {}", tuple(outcome), n);
                }
            }
        }
        Format::Csv => {
            println!("counts,probability,verdict");
            for (outcome, p) in dist.iter() {
                let (v, _) = verdict_text(outcome);
                let joined: Vec<String> = outcome.iter().map(|n| n.to_string()).collect();
                println!("{},{:e},{}", joined.join(" "), p, v);
            }
        }
        Format::Json => {
            let outcomes: Vec<serde_json::Value> = dist
                .iter()
                .map(|(outcome, p)| {
                    let (v, _) = verdict_text(outcome);
                    serde_json::json!({
                        "counts": outcome,
                        "probability": p,
                        "verdict": v,
                    })
                })
                .collect();
            let mut doc = serde_json::json!({
                "config": {
                    "k": args.k,
                    "with_s": config.with_s,
                    "gamma": config.gamma,
                    "chi": config.chi,
                    "input": "single-photon",
                },
                "outcomes": outcomes,
                "answer": answer.map(|t| t.to_string()),
            });
            if let Some(shots) = &samples {
                doc["samples"] = serde_json::json!({
                    "n": args.sample.unwrap(),
                    "seed": args.seed,
                    "counts": shots
                        .iter()
                        .map(|(o, n)| serde_json::json!({"counts": o, "shots": n}))
                        .collect::<Vec<_>>(),
                });
            }
            println!("{doc}");
        }
    }
    Ok(())
}

/// Format a pure state as signed ket terms, e.g. `0.707107|0101> - 0.707107|1010>`.
fn ket_terms(state: &dualrail::FockVector) -> String {
    let basis = state.basis();
    let mut out = String::new();
    for (i, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm() < 1e-9 {
            continue;
        }
        let occ = basis.occupations_of(i);
        let digits: Vec<String> = occ.iter().map(|n| n.to_string()).collect();
        let ket = if basis.cutoff() <= 10 {
            format!("|{}>", digits.join(""))
        } else {
            format!("|{}>", digits.join(","))
        };
        let (sign, mag) = if amp.im.abs() < 1e-9 {
            if amp.re >= 0.0 {
                ("+", format!("{:.6}", amp.re))
            } else {
                ("-", format!("{:.6}", -amp.re))
            }
        } else {
            ("+", format!("({:.6}{:+.6}i)", amp.re, amp.im))
        };
        let coeff = if mag == "1.000000" { String::new() } else { mag };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            write!(out, " {sign} ").unwrap();
        }
        write!(out, "{coeff}{ket}").unwrap();
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn cmd_trajectory(args: TrajectoryArgs) -> AppResult<()> {
    let selector = parse_selector(&args.k)?;
    let config = MachineConfig::new(selector).with_s(!args.no_s);
    let traj = run_trajectory(&config)?;
    match args.format {
        Format::Table => {
            for (i, state) in traj.states().iter().enumerate() {
                match state {
                    State::Pure(v) => println!("psi{i} = {}", ket_terms(v)),
                    State::Mixed(_) => println!("psi{i} = <mixed>"),
                }
            }
        }
        Format::Csv => {
            println!("state,ket,re,im");
            for (i, state) in traj.states().iter().enumerate() {
                if let State::Pure(v) = state {
                    for (j, amp) in v.amplitudes().iter().enumerate() {
                        if amp.norm() > 1e-9 {
                            let occ = v.basis().occupations_of(j);
                            let digits: Vec<String> =
                                occ.iter().map(|n| n.to_string()).collect();
                            println!("psi{i},{},{:e},{:e}", digits.join(""), amp.re, amp.im);
                        }
                    }
                }
            }
        }
        Format::Json => {
            let states: Vec<serde_json::Value> = traj
                .states()
                .iter()
                .enumerate()
                .map(|(i, state)| match state {
                    State::Pure(v) => {
                        let terms: Vec<serde_json::Value> = v
                            .amplitudes()
                            .iter()
                            .enumerate()
                            .filter(|(_, a)| a.norm() > 1e-9)
                            .map(|(j, a)| {
                                serde_json::json!({
                                    "counts": v.basis().occupations_of(j),
                                    "re": a.re,
                                    "im": a.im,
                                })
                            })
                            .collect();
                        serde_json::json!({"state": format!("psi{i}"), "terms": terms})
                    }
                    State::Mixed(_) => {
                        serde_json::json!({"state": format!("psi{i}"), "terms": "mixed"})
                    }
                })
                .collect();
            println!("{}", serde_json::json!({ "trajectory": states }));
        }
    }
    Ok(())
}

fn grid(min: f64, max: f64, steps: usize, log: bool) -> AppResult<Vec<f64>> {
    if steps == 0 {
        return Err(AppError::Usage("steps must be positive".into()));
    }
    if max < min {
        return Err(AppError::Usage("max must be at least min".into()));
    }
    if log && min <= 0.0 {
        return Err(AppError::Usage(
            "logarithmic spacing needs a positive minimum".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            if log {
                min * (max / min).powf(t)
            } else {
                min + t * (max - min)
            }
        })
        .collect())
}

fn cmd_sweep(args: SweepArgs) -> AppResult<()> {
    check_gamma(args.gamma_min)?;
    let selector = parse_selector(&args.k)?;
    let gammas = grid(args.gamma_min, args.gamma_max, args.steps, args.log)?;
    let curve = postselect::sweep_gamma(&selector, &gammas)?;
    let mut csv = String::from("gamma,p_raw_sim,p_raw_analytic,p_ec_sim,p_ec_analytic,accept_prob\n");
    for row in curve.rows() {
        writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            row.gamma,
            row.p_raw_sim,
            row.p_raw_analytic,
            row.p_ec_sim,
            row.p_ec_analytic,
            row.accept_prob
        )
        .unwrap();
    }
    fs::write(&args.out, csv)?;
    println!("wrote {} rows to {}", curve.rows().len(), args.out.display());
    Ok(())
}

fn cmd_classical(args: ClassicalArgs) -> AppResult<()> {
    let selector = parse_selector(&args.k)?;
    let config =
        MachineConfig::new(selector).coherent(C64::new(args.alpha, 0.0), args.cutoff);
    let cmp = run_classical(&config)?;
    let d_with = &cmp.with_s.marginals[machine::MODE_D];
    let d_without = &cmp.without_s.marginals[machine::MODE_D];
    match args.format {
        Format::Table => {
            println!(
                "classical run: k={} alpha={} cutoff={}",
                args.k, args.alpha, args.cutoff
            );
            println!("{:<6} {:<22} {:<22}", "n_d", "P(n_d) with S", "P(n_d) without S");
            for n in 0..d_with.len().max(d_without.len()) {
                let a = d_with.get(n).copied().unwrap_or(0.0);
                let b = d_without.get(n).copied().unwrap_or(0.0);
                if a > 1e-14 || b > 1e-14 {
                    println!("{:<6} {:<22} {:<22}", n, format!("{a:.12}"), format!("{b:.12}"));
                }
            }
            println!("total-variation distance (mode d): {:e}", cmp.tv_mode_d);
        }
        Format::Csv => {
            println!("n,p_with_s,p_without_s");
            for n in 0..d_with.len().max(d_without.len()) {
                let a = d_with.get(n).copied().unwrap_or(0.0);
                let b = d_without.get(n).copied().unwrap_or(0.0);
                println!("{n},{a:e},{b:e}");
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "config": {"k": args.k, "alpha": args.alpha, "cutoff": args.cutoff},
                    "mode_d_with_s": d_with,
                    "mode_d_without_s": d_without,
                    "tv_distance": cmp.tv_mode_d,
                    "fields_with_s": cmp.with_s.fields.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
                    "fields_without_s": cmp.without_s.fields.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
                })
            );
        }
    }
    Ok(())
}

fn resolve_netlist_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("QNL_PATH") {
        Some(prefix) => {
            let candidate = PathBuf::from(prefix).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn cmd_netlist(args: NetlistArgs) -> AppResult<()> {
    let path = resolve_netlist_path(&args.file);
    let text = fs::read_to_string(&path)
        .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
    let program = netlist::parse(&text)
        .map_err(|e| AppError::Runtime(format!("{}:{e}", path.display())))?;
    let outcome = program.execute()?;

    match args.format {
        Format::Table => {
            if let Some(dist) = &outcome.distribution {
                println!("{:<18} probability", "outcome");
                for (counts, p) in dist.iter() {
                    if p > 1e-12 {
                        println!("{:<18} {:.12}", tuple(counts), p);
                    }
                }
            } else {
                println!("(no measure directive; use --state to inspect the final state)");
            }
            if args.state {
                match &outcome.final_state {
                    State::Pure(v) => println!("final state: {}", ket_terms(v)),
                    State::Mixed(rho) => {
                        println!("final state (mixed), diagonal:");
                        let dist = rho.measure_counts().map_err(AppError::from)?;
                        for (counts, p) in dist.iter() {
                            if p > 1e-12 {
                                println!("  {:<18} {:.12}", tuple(counts), p);
                            }
                        }
                    }
                }
            }
        }
        Format::Csv => {
            println!("counts,probability");
            if let Some(dist) = &outcome.distribution {
                for (counts, p) in dist.iter() {
                    let joined: Vec<String> = counts.iter().map(|n| n.to_string()).collect();
                    println!("{},{:e}", joined.join(" "), p);
                }
            }
        }
        Format::Json => {
            let dist_json = outcome.distribution.as_ref().map(|dist| {
                dist.iter()
                    .map(|(counts, p)| serde_json::json!({"counts": counts, "probability": p}))
                    .collect::<Vec<_>>()
            });
            println!(
                "{}",
                serde_json::json!({
                    "file": path.display().to_string(),
                    "outcomes": dist_json,
                })
            );
        }
    }
    Ok(())
}

fn cmd_chi_sweep(args: ChiSweepArgs) -> AppResult<()> {
    let selector = parse_selector(&args.k)?;
    let chis = grid(0.0, PI, args.steps, false)?;
    let rows = machine::chi_sweep(&selector, &chis, !args.no_s)?;
    let mut csv = String::from("chi,p_correct_raw,p_correct_postselected\n");
    for row in &rows {
        writeln!(
            csv,
            "{:e},{:e},{:e}",
            row.chi, row.p_correct_raw, row.p_correct_postselected
        )
        .unwrap();
    }
    fs::write(&args.out, csv)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
