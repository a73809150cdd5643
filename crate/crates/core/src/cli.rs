//! Batch front end: JSON instance in, CSV report out.
//!
//! Block bounds computed on an input grid are labelled "grid lower bound" (a valid
//! lower bound on the capacity) and "grid upper bound of the discretized problem"
//! (the upper bound of the grid-restricted channel, which can under-estimate the
//! true `C_r`).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{capacity_ordering_check, monotonicity_sweep, SweepAxis, Verdict};
use crate::bounds::{
    a_poisson_closed_form, sym_kl_max, theorem1_bounds, theorem2_bounds, GRID_LOWER_LABEL,
    GRID_UPPER_LABEL,
};
use crate::capacity_solver::{ba_capacity, SolverConfig};
use crate::channel_model::{
    build_block_channel, BlockChannelSpec, ChannelSpec, ImpulseResponse, InputGrid, ProblemFile,
};
use crate::error::{invalid, Error, Result};
use crate::report::{BoundReport, BoundRow, Provenance};
use crate::simulator::{simulate_p2p, write_trace_csv, SimConfig};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "LTIPC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ltipc", version, about = "Capacity bounds for the LTI-Poisson channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity of the instance (C_1 of the grid channel when it has memory).
    Capacity(Common),
    /// Block sandwich bounds for each --r, optionally with the stationary bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        stationary: bool,
    },
    /// Symmetrized-KL upper bound, numeric and (for memoryless instances) closed form.
    Symkl(Common),
    /// Block bounds along one instance parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha, amax or lambda0.
        #[arg(long)]
        axis: String,
        /// Comma-separated list, or an integer range `a..b` (inclusive).
        #[arg(long)]
        values: String,
    },
    /// Monte Carlo traces of the instance.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Input intensities, comma-separated; zero-padded to --slots.
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 100)]
        slots: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Degradedness of a second impulse response and the capacity ordering it implies.
    DegradeCheck {
        #[command(flatten)]
        common: Common,
        /// Taps of the candidate degraded response, comma-separated.
        #[arg(long)]
        prime: String,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of grid points on [0, amax]; overrides the instance file.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Block lengths; repeat the flag for several.
    #[arg(long = "r")]
    pub r: Vec<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record wall-clock times (otherwise 0 so reruns are byte-identical).
    #[arg(long)]
    pub timing: bool,
}

struct Loaded {
    problem: ProblemFile,
    spec: ChannelSpec,
    grid: InputGrid,
    config: SolverConfig,
    id: String,
    bytes: Vec<u8>,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let bytes = std::fs::read(&self.instance).map_err(|e| {
            Error::InvalidArgument(format!("cannot read {}: {e}", self.instance.display()))
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::InvalidArgument("instance file is not UTF-8".into()))?;
        let mut problem = ProblemFile::from_json(&text)?;
        if let Some(m) = self.grid {
            problem.grid_points = m;
        }
        let spec = problem.spec()?;
        let grid = problem.grid()?;
        let mut config = SolverConfig::default();
        if let Some(t) = self.tol {
            config = config.with_tol(t);
        }
        config.validate()?;
        let id = self
            .instance
            .file_stem()
            .map_or_else(|| "instance".to_string(), |s| s.to_string_lossy().into_owned());
        Ok(Loaded {
            problem,
            spec,
            grid,
            config,
            id,
            bytes,
        })
    }

    fn rs(&self) -> Result<Vec<usize>> {
        if self.r.contains(&0) {
            return invalid("--r must be at least 1");
        }
        Ok(if self.r.is_empty() { vec![1] } else { self.r.clone() })
    }

    fn provenance(&self, l: &Loaded, command: &str) -> Provenance {
        Provenance::new(&l.bytes)
            .with("command", command)
            .with("grid", l.problem.grid_points)
            .with("tail_eps", l.problem.tail_eps)
            .with("tol", l.config.tol)
            .with("seed", self.seed)
    }

    fn ms(&self, t: Instant) -> u128 {
        if self.timing {
            t.elapsed().as_millis()
        } else {
            0
        }
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("'{t}' is not a number")))
        })
        .collect()
}

/// `a..b` (inclusive integer range) or a comma-separated list.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad range start in '{s}'")))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad range end in '{s}'")))?;
        if b < a {
            return invalid(format!("empty range '{s}'"));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    let v = parse_list(s)?;
    if v.is_empty() {
        return invalid("--values is empty");
    }
    Ok(v)
}

fn row(id: &str, name: &str, r: Option<usize>, value: f64, gap: f64, iterations: usize, ms: u128) -> BoundRow {
    BoundRow {
        instance_id: id.to_string(),
        bound_name: name.to_string(),
        r,
        value_nats: value,
        gap,
        iterations,
        wallclock_ms: ms,
    }
}

fn capacity(c: &Common) -> Result<()> {
    let l = c.load()?;
    let t = Instant::now();
    let bspec = BlockChannelSpec::new(l.spec.clone(), l.grid.clone(), 1, l.problem.tail_eps)?;
    let channel = build_block_channel(&bspec)?;
    let cap = ba_capacity(&channel, Some(l.spec.alpha), &l.config)?;
    let name = if l.spec.memory() == 0 { "capacity" } else { GRID_UPPER_LABEL };
    let mut rep = BoundReport::new(c.provenance(&l, "capacity"));
    rep.push(row(&l.id, name, Some(1), cap.value, cap.gap, cap.iterations, c.ms(t)));
    rep.write(&c.out)
}

fn bounds(c: &Common, stationary: bool) -> Result<()> {
    let l = c.load()?;
    let mut rep = BoundReport::new(c.provenance(&l, "bounds").with("stationary", stationary));
    for r in c.rs()? {
        let t = Instant::now();
        let b = theorem1_bounds(
            &BlockChannelSpec::new(l.spec.clone(), l.grid.clone(), r, l.problem.tail_eps)?,
            &l.config,
        )?;
        let ms = c.ms(t);
        rep.push(row(&l.id, GRID_UPPER_LABEL, Some(r), b.upper, b.gap / r as f64, b.iterations, ms));
        rep.push(row(&l.id, GRID_LOWER_LABEL, Some(r), b.lower, b.gap / r as f64, b.iterations, ms));
    }
    if stationary {
        let t = Instant::now();
        let s = theorem2_bounds(&l.spec, &l.grid, &l.config)?;
        let ms = c.ms(t);
        rep.push(row(&l.id, "stationary upper", None, s.upper.value, s.upper.fw_gap, s.upper.iterations, ms));
        rep.push(row(&l.id, "stationary lower", None, s.lower.value, s.lower.fw_gap, s.lower.iterations, ms));
    }
    rep.write(&c.out)
}

fn symkl(c: &Common) -> Result<()> {
    let l = c.load()?;
    let t = Instant::now();
    let bspec = BlockChannelSpec::new(l.spec.clone(), l.grid.clone(), 1, l.problem.tail_eps)?;
    let channel = build_block_channel(&bspec)?;
    let s = sym_kl_max(&channel, Some(l.spec.alpha), &l.config)?;
    let mut rep = BoundReport::new(c.provenance(&l, "symkl"));
    rep.push(row(&l.id, "sym-kl max", Some(1), s.value, 0.0, s.starts, c.ms(t)));
    if l.spec.memory() == 0 && l.spec.lambda0 > 0.0 {
        let gain = l.spec.impulse.taps()[0];
        let v = a_poisson_closed_form(gain * l.spec.amax, gain * l.spec.alpha, l.spec.lambda0)?;
        rep.push(row(&l.id, "sym-kl closed form", None, v, 0.0, 0, 0));
    }
    rep.write(&c.out)
}

fn sweep(c: &Common, axis: &str, values: &str) -> Result<()> {
    let l = c.load()?;
    let axis = SweepAxis::parse(axis)?;
    let values = parse_values(values)?;
    let mut rep = BoundReport::new(
        c.provenance(&l, "sweep")
            .with("axis", axis.name())
            .with("values", values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")),
    );
    let mut plot = String::new();
    plot.push_str(&rep.provenance.line());
    plot.push('\n');
    plot.push_str(&format!("{},r,upper_nats,lower_nats,upper_bits,lower_bits\n", axis.name()));
    let mut all_monotone = true;
    for r in c.rs()? {
        let t = Instant::now();
        let s = monotonicity_sweep(
            &l.spec,
            axis,
            &values,
            l.problem.grid_points,
            r,
            l.problem.tail_eps,
            &l.config,
        )?;
        let ms = c.ms(t);
        for p in &s.points {
            let id = format!("{}@{}={}", l.id, axis.name(), p.value);
            let gap = p.bound.gap / r as f64;
            rep.push(row(&id, GRID_UPPER_LABEL, Some(r), p.bound.upper, gap, p.bound.iterations, ms));
            rep.push(row(&id, GRID_LOWER_LABEL, Some(r), p.bound.lower, gap, p.bound.iterations, ms));
            plot.push_str(&format!(
                "{},{r},{},{},{},{}\n",
                p.value,
                p.bound.upper,
                p.bound.lower,
                p.bound.upper / std::f64::consts::LN_2,
                p.bound.lower / std::f64::consts::LN_2
            ));
        }
        all_monotone &= s.monotone;
        rep.push(row(&l.id, axis.verdict_label(), Some(r), if s.monotone { 1.0 } else { 0.0 }, 0.0, 0, ms));
    }
    rep.write(&c.out)?;
    std::fs::write(sibling(&c.out, "plot"), plot)?;
    println!("monotone={all_monotone}");
    Ok(())
}

fn simulate(c: &Common, input: &str, slots: usize, trials: usize) -> Result<()> {
    let l = c.load()?;
    let x = parse_list(input)?;
    let sim = SimConfig::new(c.seed, slots, trials)?;
    let traces = simulate_p2p(&l.spec, &x, &sim)?;
    let prov = c
        .provenance(&l, "simulate")
        .with("slots", slots)
        .with("trials", trials)
        .with("input", x.iter().map(f64::to_string).collect::<Vec<_>>().join(" "));
    write_trace_csv(
        &traces,
        &sibling(&c.out, "tx"),
        &sibling(&c.out, "rx"),
        Some(&prov.line()),
    )
}

fn degrade_check(c: &Common, prime: &str) -> Result<()> {
    let l = c.load()?;
    let pp = ImpulseResponse::new(parse_list(prime)?)?;
    let mut rep = BoundReport::new(
        c.provenance(&l, "degrade-check")
            .with("prime", pp.taps().iter().map(f64::to_string).collect::<Vec<_>>().join(" ")),
    );
    for r in c.rs()? {
        let t = Instant::now();
        let o = capacity_ordering_check(
            &l.spec.impulse,
            &pp,
            &l.spec,
            &l.grid,
            r,
            l.problem.tail_eps,
            &l.config,
        )?;
        let ms = c.ms(t);
        let resid = o.degradedness.residual;
        match (&o.original, &o.degraded) {
            (Some(a), Some(b)) => {
                rep.push(row(&l.id, "C_r(p)", Some(r), a.upper, a.gap / r as f64, a.iterations, ms));
                rep.push(row(&l.id, "C_r(p')", Some(r), b.upper, b.gap / r as f64, b.iterations, ms));
                rep.push(row(&l.id, "ordering", Some(r), a.upper - b.upper, resid, 0, ms));
            }
            _ => rep.push(row(&l.id, "ordering", Some(r), f64::NAN, resid, 0, ms)),
        }
        let q: Vec<String> = o.degradedness.q.iter().map(f64::to_string).collect();
        println!("r={r} verdict={} q={}", o.verdict.as_str(), q.join(" "));
        if o.verdict == Verdict::NotApplicable {
            break;
        }
    }
    rep.write(&c.out)
}

/// `dir/stem_suffix.csv` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Executes one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Capacity(c) => capacity(&c),
        Command::Bounds { common, stationary } => bounds(&common, stationary),
        Command::Symkl(c) => symkl(&c),
        Command::Sweep {
            common,
            axis,
            values,
        } => sweep(&common, &axis, &values),
        Command::Simulate {
            common,
            input,
            slots,
            trials,
        } => simulate(&common, &input, slots, trials),
        Command::DegradeCheck { common, prime } => degrade_check(&common, &prime),
    }
}

/// Machine-readable error kind used in the one-line diagnostic.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::BudgetExceeded { .. } => "budget-exceeded",
        Error::NonConvergence { .. } => "non-convergence",
        Error::Unsupported(_) => "unsupported",
        Error::LinearProgram(_) => "linear-program",
        Error::Io(_) => "io",
        Error::Json(_) => "invalid-argument",
    }
}

/// Process exit code for an error: 2 for solver non-convergence, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => 2,
        _ => 1,
    }
}

/// Parses `args`, runs, and returns the exit code; diagnostics go to stderr on one line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("error[invalid-argument]: {first}");
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", error_kind(&e));
            exit_code(&e)
        }
    }
}
