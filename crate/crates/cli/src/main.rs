//! `wcbound`: worst-case state bounds for stable LTI systems under bounded disturbances.
//!
//! Exit codes: 0 ok, 1 internal or I/O failure, 2 bad input, 3 unstable system,
//! 4 unsupported eigenvalue multiplicity, 5 verification failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use wcbound::export::{fig1_svg, fig2_svg, write_sweep_csv, write_trace_csv};
use wcbound::input::{parse_problem, Problem};
use wcbound::oracle::{simulate, verify, worst_case_disturbance, VerifyOptions, DEFAULT_REFINE_TOL};
use wcbound::tfc::{overshoot_constant_disturbance, sweep, DEFAULT_KD_RANGE, DEFAULT_KTHETA_RANGE, DEFAULT_RESOLUTION};
use wcbound::{
    eigendecompose_and_classify, total_bound, total_loose_bound, BoundOptions, DisturbanceProfile, Error,
    PairingStrategy,
};

const EXIT_INTERNAL: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_MULTIPLICITY: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "wcbound",
    version,
    about = "Worst-case state bounds for stable LTI systems under bounded disturbances"
)]
#[command(after_help = "Exit codes: 0 ok, 1 internal or I/O failure, 2 bad input, 3 unstable system, \
4 unsupported eigenvalue multiplicity, 5 verification failure.\n\
Environment: WCBOUND_THREADS caps the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the closed-loop spectrum.
    Classify(CommonArgs),
    /// Pairwise and loose bounds on the selected state; writes bound.json.
    Bound(CommonArgs),
    /// Worst-case and constant-disturbance trajectories; writes trace_worst.csv, trace_fixed.csv and fig1.svg.
    Simulate(CommonArgs),
    /// Gain sweep of a trajectory-following controller; writes sweep.csv and fig2.svg.
    Sweep(SweepArgs),
    /// Cross-check analytic bounds against quadrature and simulation; writes verify.json.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Problem description (JSON).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Finite horizon in seconds.
    #[arg(long, value_name = "S")]
    horizon: Option<f64>,
    /// Simulation step in seconds.
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    /// Comma-separated evaluation times in seconds.
    #[arg(long, value_name = "a,b,c", value_delimiter = ',')]
    times: Vec<f64>,
    /// Relative tolerance for analytic versus oracle comparisons.
    #[arg(long, value_name = "X", default_value_t = 1e-8)]
    tol: f64,
    /// Grouping of distinct real modes.
    #[arg(long, value_enum, default_value_t = Pairing::Default)]
    pairing: Pairing,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// K_d range as lo,hi.
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    kd_range: Option<(f64, f64)>,
    /// K_theta range as lo,hi.
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    ktheta_range: Option<(f64, f64)>,
    /// Grid points along each axis.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Scale the first modal coefficient by this factor before comparing.
    #[arg(long, value_name = "F")]
    perturb_coefficients: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Pairing {
    Default,
    Optimal,
}

impl From<Pairing> for PairingStrategy {
    fn from(p: Pairing) -> Self {
        match p {
            Pairing::Default => PairingStrategy::Default,
            Pairing::Optimal => PairingStrategy::Optimal,
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotHurwitz { .. } => EXIT_UNSTABLE,
            Error::UnsupportedMultiplicity { .. } => EXIT_MULTIPLICITY,
            Error::DimensionMismatch(_) | Error::InvalidParameter(_) | Error::IndexOutOfRange(_) => EXIT_BAD_INPUT,
            Error::EigenFailure | Error::QuadratureNotConverged { .. } => EXIT_INTERNAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_BAD_INPUT, message: message.into() }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_INTERNAL, message: format!("{}: {e}", path.display()) }
}

type Outcome = Result<(), Failure>;

fn load(args: &CommonArgs) -> Result<Problem, Failure> {
    let text =
        fs::read_to_string(&args.input).map_err(|e| bad_input(format!("cannot read {}: {e}", args.input.display())))?;
    Ok(parse_problem(&text)?)
}

fn validate_common(args: &CommonArgs) -> Outcome {
    if let Some(h) = args.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(bad_input(format!("--horizon must be positive and finite, got {h}")));
        }
    }
    if let Some(dt) = args.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(bad_input(format!("--dt must be positive and finite, got {dt}")));
        }
    }
    if let Some(t) = args.times.iter().find(|t| !(**t >= 0.0)) {
        return Err(bad_input(format!("--times entries must be nonnegative, got {t}")));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(bad_input(format!("--tol must be positive, got {}", args.tol)));
    }
    Ok(())
}

fn out_dir(args: &CommonArgs) -> Result<&Path, Failure> {
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    Ok(&args.out)
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Outcome {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(&path, e))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome {
    write_file(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

/// `--times` followed by `--horizon`, without duplicates.
fn evaluation_times(args: &CommonArgs) -> Vec<f64> {
    let mut times: Vec<f64> = args.times.iter().copied().filter(|t| t.is_finite()).collect();
    if let Some(h) = args.horizon {
        if !times.contains(&h) {
            times.push(h);
        }
    }
    times
}

fn cmd_classify(args: &CommonArgs) -> Outcome {
    validate_common(args)?;
    let p = load(args)?;
    let eig = eigendecompose_and_classify(&p.system, BoundOptions::default().eps_multiplicity)?;
    println!("{:>4}  {:>24}  {:>24}  class", "#", "re", "im");
    for (i, e) in eig.entries.iter().enumerate() {
        println!("{:>4}  {:>24}  {:>24}  {:?}", i + 1, e.value.re, e.value.im, e.class);
    }
    let regime = p.tfc.map(|t| t.regime().as_str());
    if let Some(r) = regime {
        println!("regime: {r}");
    }
    let dir = out_dir(args)?;
    write_json(
        dir,
        "classify.json",
        &json!({
            "n_x": p.system.n_x(),
            "n_z": p.system.n_z(),
            "eigenvalues": eig,
            "regime": regime,
        }),
    )
}

fn cmd_bound(args: &CommonArgs) -> Outcome {
    validate_common(args)?;
    let p = load(args)?;
    let opts = BoundOptions { strategy: args.pairing.into(), ..BoundOptions::default() };
    let ti = total_bound(&p.system, p.output, &p.z, None, opts.strategy)?;
    let ti_loose = total_loose_bound(&p.system, p.output, &p.z, None, &opts)?;
    let mut per_time = Vec::new();
    println!("state x{}  pairing {:?}", p.output + 1, args.pairing);
    println!("{:>12}  {:>24}  {:>24}", "t", "pairwise", "loose");
    for t in evaluation_times(args) {
        let b = total_bound(&p.system, p.output, &p.z, Some(t), opts.strategy)?;
        let l = total_loose_bound(&p.system, p.output, &p.z, Some(t), &opts)?;
        println!("{t:>12}  {:>24}  {l:>24}", b.value);
        per_time.push(json!({ "t": t, "bound": b.value, "loose_bound": l }));
    }
    println!("{:>12}  {:>24}  {ti_loose:>24}", "inf", ti.value);
    let per_group: Vec<_> = ti
        .channels
        .iter()
        .flat_map(|c| {
            c.per_group.iter().map(move |g| {
                json!({
                    "disturbance": c.disturbance + 1,
                    "group": g.group,
                    "kind": g.kind,
                    "mu": g.mu,
                    "contribution": c.z_max * g.mu,
                })
            })
        })
        .collect();
    let dir = out_dir(args)?;
    write_json(
        dir,
        "bound.json",
        &json!({
            "output_index": p.output + 1,
            "pairing": match args.pairing { Pairing::Default => "default", Pairing::Optimal => "optimal" },
            "time_independent": ti.value,
            "loose_bound": ti_loose,
            "per_time": per_time,
            "per_group": per_group,
        }),
    )
}

fn spectral_radius(p: &Problem) -> Result<f64, Failure> {
    Ok(p.system.eigenvalues()?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

fn cmd_simulate(args: &CommonArgs) -> Outcome {
    validate_common(args)?;
    let p = load(args)?;
    let eig = eigendecompose_and_classify(&p.system, BoundOptions::default().eps_multiplicity)?;
    // long enough for the slowest mode to decay by 1e-6
    let horizon = args.horizon.unwrap_or_else(|| (13.8 / -eig.max_real_part()).max(6.0));
    let rho = spectral_radius(&p)?;
    let dt = args.dt.unwrap_or_else(|| (2.0 * std::f64::consts::PI / (50.0 * rho)).min(1e-3));
    let worst =
        p.z.as_slice()
            .iter()
            .enumerate()
            .map(|(j, &zj)| worst_case_disturbance(&p.system, p.output, j, zj, horizon, DEFAULT_REFINE_TOL))
            .collect::<Result<Vec<_>, _>>()?;
    let fixed: Vec<DisturbanceProfile> =
        p.z.as_slice().iter().enumerate().map(|(j, &zj)| DisturbanceProfile::constant(j, zj, horizon)).collect();
    let worst_trace = simulate(&p.system, &worst, horizon, dt)?;
    let fixed_trace = simulate(&p.system, &fixed, horizon, dt)?;
    let bound = total_bound(&p.system, p.output, &p.z, None, args.pairing.into())?.value;
    let overshoot = match p.tfc {
        Some(t) if p.output == 0 => overshoot_constant_disturbance(&t),
        _ => fixed_trace.peak(p.output).1.abs(),
    };
    let k = p.output;
    let worst_peak = worst_trace.peak(k);
    let fixed_peak = fixed_trace.peak(k);
    println!("state x{}  horizon {horizon}  dt {dt}", k + 1);
    println!("analytic bound        {bound}");
    println!("worst-case x(T)       {}", worst_trace.final_state()[k]);
    println!("worst-case peak       {} at t = {}", worst_peak.1, worst_peak.0);
    println!("constant peak         {} at t = {}", fixed_peak.1, fixed_peak.0);
    println!("constant overshoot    {overshoot}");
    let dir = out_dir(args)?;
    write_file(dir, "trace_worst.csv", |w| write_trace_csv(&worst_trace, w))?;
    write_file(dir, "trace_fixed.csv", |w| write_trace_csv(&fixed_trace, w))?;
    let svg = fig1_svg(&worst_trace, &fixed_trace, k, bound, overshoot);
    write_file(dir, "fig1.svg", |w| w.write_all(svg.as_bytes()))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

fn cmd_sweep(args: &SweepArgs) -> Outcome {
    validate_common(&args.common)?;
    let p = load(&args.common)?;
    let base = p.tfc.ok_or_else(|| bad_input("sweep requires a {\"tfc\": {...}} input"))?;
    let kd = args.kd_range.unwrap_or(DEFAULT_KD_RANGE);
    let kt = args.ktheta_range.unwrap_or(DEFAULT_KTHETA_RANGE);
    let map = sweep(&base, kd, kt, (args.resolution, args.resolution))?;
    let safe = map.cells().filter(|c| c.3).count();
    println!(
        "{}x{} grid  k_d {kd:?}  k_theta {kt:?}  d_max {}  safe cells {safe}",
        map.kd_grid.len(),
        map.ktheta_grid.len(),
        map.d_max
    );
    let dir = out_dir(&args.common)?;
    write_file(dir, "sweep.csv", |w| write_sweep_csv(&map, w))?;
    let svg = fig2_svg(&map);
    write_file(dir, "fig2.svg", |w| w.write_all(svg.as_bytes()))
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let c = &args.common;
    validate_common(c)?;
    if let Some(f) = args.perturb_coefficients {
        if !f.is_finite() {
            return Err(bad_input(format!("--perturb-coefficients must be finite, got {f}")));
        }
    }
    let p = load(c)?;
    let opts = VerifyOptions {
        tol: c.tol,
        sim_dt: c.dt,
        strategy: c.pairing.into(),
        perturb_coefficients: args.perturb_coefficients,
        ..VerifyOptions::default()
    };
    let times = if c.times.is_empty() && c.horizon.is_none() { vec![1.0, 5.0] } else { evaluation_times(c) };
    let report = verify(&p.system, p.output, &p.z, &times, &opts)?;
    println!(
        "{:>8}  {:>22}  {:>22}  {:>22}  {:>22}  {:>10}  verdict",
        "t", "analytic", "loose", "quadrature", "simulated", "gap"
    );
    for e in &report.entries {
        let t = e.horizon.map_or("inf".to_string(), |t| t.to_string());
        let sim = e.simulated.map_or("-".to_string(), |s| s.to_string());
        println!(
            "{t:>8}  {:>22}  {:>22}  {:>22}  {sim:>22}  {:>10.6}  {}",
            e.analytic,
            e.loose,
            e.quadrature,
            e.gap_ratio,
            if e.pass { "PASS" } else { "FAIL" }
        );
    }
    write_json(out_dir(c)?, "verify.json", &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: "verification failed".into() })
    }
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var("WCBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| bad_input(format!("WCBOUND_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() })
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
