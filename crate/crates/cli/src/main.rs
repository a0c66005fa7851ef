//! Command-line front end: negativity and PPT-distance evaluation, batch
//! conjecture scans, the Jaynes-Cummings non-decomposability witness, and
//! trajectory non-Markovianity checks. Every output file starts with a
//! `# manifest` line recording the command, flags, seed, version, and
//! timestamp. Exit codes: 0 success, 2 input error, 3 solver
//! non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ptdist::conic::{DEFAULT_MAX_ITER, DEFAULT_SDP_TOL, solve_qppt};
use ptdist::dynamics::{
    BuiltinModel, FockSpec, builtin_trajectory, jc_witness, markov_witness, time_grid,
};
use ptdist::error::Error;
use ptdist::io::{read_density, read_trajectory};
use ptdist::linops::hermitian_eig;
use ptdist::measures::{
    ClassicalState, CorrSet, Method, QuantifierResult, negativity, q_cc_pure, q_prod_classical,
    q_prod_pure, q_upper_bound_sampling,
};
use ptdist::scan::{ScanConfig, alt_scan_to_csv, scan_to_csv};
use ptdist::{CVec, DensityMatrix, PureState, Result};

const STATE_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "ptdist",
    version,
    about = "Partial-transpose distances, correlation quantifiers, and PPT cone programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negativity of a state across a subsystem cut
    Negativity {
        /// State file (matrix JSON)
        file: PathBuf,
        /// Subsystems to transpose, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1")]
        cut: Vec<usize>,
    },
    /// Distance to the PPT cone by semidefinite programming
    Qppt {
        /// State file (matrix JSON)
        file: PathBuf,
        /// Solver tolerance
        #[arg(long, default_value_t = DEFAULT_SDP_TOL)]
        tol: f64,
        /// Iteration budget
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Batch verification that the PPT distance equals the negativity on
    /// random induced-measure states
    Scan {
        /// Dimension pairs, e.g. 2x2,3x3
        #[arg(long, value_delimiter = ',', value_parser = parse_dim_pair)]
        dims: Vec<(usize, usize)>,
        /// Samples per dimension pair
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV path (defaults into $PTDIST_OUT_DIR)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the witness-existence scan instead of the distance scan
        #[arg(long)]
        alt: bool,
        #[arg(long, default_value_t = DEFAULT_SDP_TOL)]
        sdp_tol: f64,
        /// Converged gaps above this count as violations
        #[arg(long, default_value_t = 1e-5)]
        gap_threshold: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Ancilla dimension for the induced measure (default d_a*d_b)
        #[arg(long)]
        ancilla: Option<usize>,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Two-mode Jaynes-Cummings run: mode-mode negativity against the
    /// decomposability bound
    Jc {
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Output CSV path (defaults into $PTDIST_OUT_DIR)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Negativity-revival witness of non-Markovianity on a trajectory
    Witness {
        /// Trajectory file, or a built-in model: exchange, damping, divisible
        source: String,
        /// Subsystems to transpose, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1")]
        cut: Vec<usize>,
        /// Smallest negativity increase reported
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Time horizon for built-in models
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        /// Time step for built-in models
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Channel seed for the divisible model
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output JSON path (defaults to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation quantifier: closed form when available, otherwise a
    /// sampling upper bound
    Quantify {
        /// State file (matrix JSON)
        file: PathBuf,
        /// Target state set
        #[arg(long, value_enum)]
        set: SetArg,
        /// Candidates for the sampling upper bound
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    /// Classically correlated states
    Cc,
    /// Product states
    Prod,
}

fn parse_dim_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected AxB, got '{s}'"))?;
    let da: usize = a.parse().map_err(|_| format!("bad dimension '{a}'"))?;
    let db: usize = b.parse().map_err(|_| format!("bad dimension '{b}'"))?;
    if da == 0 || db == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((da, db))
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: Vec<String>,
    seed: Option<u64>,
    version: String,
    timestamp_unix: u64,
}

impl RunManifest {
    fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            args: std::env::args().skip(1).collect(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn line(&self) -> String {
        format!("manifest {}", serde_json::to_string(self).expect("manifest serializes"))
    }
}

/// 12 significant digits, locale-independent.
fn sig(v: f64) -> String {
    format!("{v:.11e}")
}

fn resolve_out(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var("PTDIST_OUT_DIR").unwrap_or_else(|_| ".".into());
        Path::new(&dir).join(default_name)
    })
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        let code = match e {
            Error::SolverFailure { .. } => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Negativity { file, cut } => {
            let rho = read_density(file, STATE_TOL)?;
            println!("{}", sig(negativity(&rho, &cut)?));
            Ok(())
        }
        Command::Qppt { file, tol, max_iter } => cmd_qppt(&file, tol, max_iter),
        Command::Scan {
            dims,
            samples,
            seed,
            out,
            alt,
            sdp_tol,
            gap_threshold,
            max_iter,
            ancilla,
            threads,
        } => {
            let mut config = ScanConfig::new(dims, samples, seed);
            config.sdp_tol = sdp_tol;
            config.gap_threshold = gap_threshold;
            config.max_iter = max_iter;
            config.ancilla = ancilla;
            config.threads = threads;
            cmd_scan(&config, out, alt)
        }
        Command::Jc { nmax, g, tmax, dt, out } => cmd_jc(nmax, g, tmax, dt, out),
        Command::Witness { source, cut, tol, tmax, dt, seed, out } => {
            cmd_witness(&source, &cut, tol, tmax, dt, seed, out)
        }
        Command::Quantify { file, set, samples, seed } => cmd_quantify(&file, set, samples, seed),
    }
}

fn cmd_qppt(file: &Path, tol: f64, max_iter: usize) -> Result<()> {
    let rho = read_density(file, STATE_TOL)?;
    let neg = negativity(&rho, &[1])?;
    let outcome = solve_qppt(&rho, tol, max_iter)?;
    println!("value {}", sig(outcome.value));
    println!("negativity {}", sig(neg));
    println!("gap {}", sig(outcome.value - neg));
    println!("status {}", outcome.solution.status);
    println!("iterations {}", outcome.solution.iterations);
    Ok(())
}

fn cmd_scan(config: &ScanConfig, out: Option<PathBuf>, alt: bool) -> Result<()> {
    let manifest = RunManifest::new("scan", Some(config.seed));
    let header = vec![manifest.line()];
    let path = resolve_out(out, if alt { "alt_scan.csv" } else { "scan.csv" });
    let summary_json = if alt {
        let report = alt_scan_to_csv(config, &path, &header)?;
        serde_json::to_string(&report.summary)?
    } else {
        let report = scan_to_csv(config, &path, &header)?;
        serde_json::to_string(&report.summary)?
    };
    println!("wrote {}", path.display());
    println!("summary {summary_json}");
    Ok(())
}

fn cmd_jc(nmax: usize, g: f64, tmax: f64, dt: f64, out: Option<PathBuf>) -> Result<()> {
    let spec = FockSpec { n_max: nmax, g };
    let times = time_grid(tmax, dt)?;
    let witness = jc_witness(&spec, &times)?;
    let manifest = RunManifest::new("jc", None);
    let path = resolve_out(out, "jc.csv");
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "# {}", manifest.line())?;
    writeln!(f, "t,negativity_ab,bound")?;
    for (t, n) in witness.times.iter().zip(&witness.negativity_ab) {
        writeln!(f, "{},{},{}", t, n, witness.bound)?;
    }
    println!("wrote {}", path.display());
    println!("bound {}", sig(witness.bound));
    println!("max_negativity {}", sig(witness.max_negativity));
    println!("violated {}", witness.violated);
    match witness.first_violation {
        Some(t) => println!("first_violation {t}"),
        None => println!("first_violation none"),
    }
    println!("max_sector_leakage {}", sig(witness.max_sector_leakage));
    Ok(())
}

fn cmd_witness(
    source: &str,
    cut: &[usize],
    tol: f64,
    tmax: f64,
    dt: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let traj = if Path::new(source).exists() {
        read_trajectory(source, STATE_TOL)?
    } else {
        let model: BuiltinModel = source.parse()?;
        builtin_trajectory(model, &time_grid(tmax, dt)?, seed)?
    };
    let violations = markov_witness(&traj, cut, tol)?;
    let doc = serde_json::json!({
        "manifest": RunManifest::new("witness", Some(seed)),
        "source": source,
        "cut": cut,
        "tol": tol,
        "violation_count": violations.len(),
        "violations": violations,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(&path, text + "\n")?;
            println!("wrote {}", path.display());
            println!("violation_count {}", violations.len());
        }
        None => println!("{text}"),
    }
    Ok(())
}

/// Diagonal of a state supported on the `|ii⟩` line, if it has that form.
fn classical_diagonal(rho: &DensityMatrix) -> Option<Vec<f64>> {
    let (da, db) = rho.bipartite_dims().ok()?;
    if da != db {
        return None;
    }
    let m = rho.matrix();
    let d = da * db;
    for r in 0..d {
        for c in 0..d {
            let on_line = r == c && r % (db + 1) == 0;
            if !on_line && m[(r, c)].norm() > 1e-10 {
                return None;
            }
        }
    }
    let probs: Vec<f64> = (0..da).map(|i| m[(i * (db + 1), i * (db + 1))].re).collect();
    let total: f64 = probs.iter().sum();
    Some(probs.iter().map(|p| p / total).collect())
}

fn is_diagonal(rho: &DensityMatrix) -> bool {
    let m = rho.matrix();
    (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| r == c || m[(r, c)].norm() <= 1e-10))
}

/// Top eigenvector as a pure state when the state has unit purity.
fn as_pure(rho: &DensityMatrix) -> Result<Option<PureState>> {
    let (vals, vecs) = hermitian_eig(rho.matrix())?;
    let d = vals.len();
    if vals[d - 1] < 1.0 - 1e-9 {
        return Ok(None);
    }
    let psi = CVec::from_fn(d, |i, _| vecs[(i, d - 1)]);
    Ok(Some(PureState::new(psi, rho.dims().clone())?))
}

fn cmd_quantify(file: &Path, set: SetArg, samples: usize, seed: u64) -> Result<()> {
    let rho = read_density(file, STATE_TOL)?;
    let result: QuantifierResult = match set {
        SetArg::Cc => {
            if let Some(psi) = as_pure(&rho)? {
                q_cc_pure(&psi)?
            } else if is_diagonal(&rho) {
                // computational-diagonal states are already classically
                // correlated
                QuantifierResult {
                    value: 0.0,
                    closest_state: Some(rho.clone()),
                    method: Method::ClosedForm,
                }
            } else {
                q_upper_bound_sampling(&rho, CorrSet::ClassicalClassical, samples, seed)?
            }
        }
        SetArg::Prod => {
            if let Some(psi) = as_pure(&rho)? {
                q_prod_pure(&psi)?
            } else if let Some(probs) = classical_diagonal(&rho) {
                q_prod_classical(&ClassicalState::new(&probs)?)?
            } else {
                q_upper_bound_sampling(&rho, CorrSet::Product, samples, seed)?
            }
        }
    };
    println!(
        "set {}",
        match set {
            SetArg::Cc => "cc",
            SetArg::Prod => "prod",
        }
    );
    let method = match result.method {
        Method::ClosedForm => "closed_form",
        Method::Sdp => "sdp",
        Method::SamplingUpperBound => "sampling_upper_bound",
    };
    println!("method {method}");
    println!("value {}", sig(result.value));
    if result.method == Method::SamplingUpperBound {
        println!("samples {samples}");
        println!("seed {seed}");
    }
    Ok(())
}
