use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluctlab::harness::{run, suite, Bundle, ExperimentConfig, GreenMode, Op, Status, SCHEMA};
use fluctlab::{DistSpec, Error, Result};

#[derive(Parser)]
#[command(name = "fluctlab", version, about = "Exact fluctuation quantities for lattice random walks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// RNG seed for Monte Carlo
    #[arg(long, global = true, default_value_t = 20_240_601)]
    seed: u64,
    /// worker threads (default: FLUCTLAB_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// cache directory (default: FLUCTLAB_CACHE)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Interval,
    Halfline,
    Potential,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ladder renewal arrays u_a, v_d, U_a, V_d
    Ladder {
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 1000)]
        window: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Killed Green functions and the potential kernel
    Green {
        #[arg(long)]
        dist: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xs: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exit probabilities, exit position and overshoot laws
    Exit {
        #[arg(long)]
        dist: String,
        #[arg(long = "R")]
        r: usize,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare an asymptotic formula with exact values on a grid
    Verify {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value = "1e2:1e4:geometric")]
        grid: String,
        #[arg(long)]
        x_frac: Option<f64>,
        #[arg(long)]
        y_mult: Option<f64>,
        #[arg(long)]
        ladder_window: Option<usize>,
        /// CSV with columns x, exact, predicted, ratio, bound
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo exit estimates checked against exact values
    Mc {
        #[arg(long)]
        dist: String,
        #[arg(long = "R")]
        r: usize,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
        quantiles: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-validation suite, or the given config files
    Suite {
        #[arg(long)]
        config: Vec<PathBuf>,
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value = "fluctlab-out")]
        out: PathBuf,
    },
}

fn dist_spec(s: &str) -> Result<DistSpec> {
    let p = Path::new(s);
    if p.is_file() {
        DistSpec::parse(&std::fs::read_to_string(p)?)
    } else {
        DistSpec::parse(s)
    }
}

fn single(common: &Common, name: &str, dist: &str, op: Op) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig {
        schema: SCHEMA,
        name: name.into(),
        dist: dist_spec(dist)?,
        ops: vec![op],
        seed: common.seed,
        threads: common.threads,
        cache_dir: common.cache.clone(),
        out_dir: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit(bundle: &Bundle, ext: &str, out: Option<&Path>) -> Result<()> {
    if let Some(out) = out {
        let (_, bytes) = bundle
            .files
            .iter()
            .find(|(k, _)| k.ends_with(ext))
            .ok_or_else(|| Error::Numerical("operation produced no output".into()))?;
        std::fs::write(out, bytes)?;
    }
    Ok(())
}

fn print_checks(b: &Bundle) {
    for c in &b.summary.checks {
        let s = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        eprintln!("{s} [{}] {}: {}", b.summary.name, c.name, c.detail);
    }
}

fn main_inner(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let (bundle, ext, out) = match cli.cmd {
        Cmd::Ladder { dist, window, out } => (run(&single(c, "ladder", &dist, Op::Ladder { window })?)?, ".csv", out),
        Cmd::Green { dist, mode, r, window, tol, xs, out } => {
            let mode = match mode {
                Mode::Interval => GreenMode::Interval,
                Mode::Halfline => GreenMode::Halfline,
                Mode::Potential => GreenMode::Potential,
            };
            (run(&single(c, "green", &dist, Op::Green { mode, r, window, tol, xs })?)?, ".json", out)
        }
        Cmd::Exit { dist, r, x, out } => (run(&single(c, "exit", &dist, Op::Exit { r, x })?)?, ".json", out),
        Cmd::Verify { dist, formula, grid, x_frac, y_mult, ladder_window, out } => {
            let op = Op::Verify { formula, grid, x_frac, y_mult, ladder_window };
            (run(&single(c, "verify", &dist, op)?)?, ".csv", out)
        }
        Cmd::Mc { dist, r, x, paths, quantiles, out } => {
            (run(&single(c, "mc", &dist, Op::Mc { r, x, paths, quantiles })?)?, ".csv", out)
        }
        Cmd::Suite { config, quick, out } => {
            let cfgs = if config.is_empty() {
                suite(quick)
            } else {
                config.iter().map(|p| ExperimentConfig::load(p)).collect::<Result<_>>()?
            };
            let mut ok = true;
            let mut summaries = Vec::new();
            for mut cfg in cfgs {
                cfg.seed = if config.is_empty() { c.seed } else { cfg.seed };
                cfg.threads = c.threads.or(cfg.threads);
                cfg.cache_dir = c.cache.clone().or(cfg.cache_dir);
                cfg.out_dir = Some(out.clone());
                let b = run(&cfg)?;
                print_checks(&b);
                ok &= !b.summary.hard_failure();
                summaries.push(b.summary);
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("suite.json"), serde_json::to_vec_pretty(&summaries)?)?;
            return Ok(ok);
        }
    };
    print_checks(&bundle);
    emit(&bundle, ext, out.as_deref())?;
    println!("{}", serde_json::to_string_pretty(&bundle.summary)?);
    Ok(!bundle.summary.hard_failure())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
