//! Batch verification runs over sampled random states.
//!
//! A scan draws induced-measure states for each requested dimension pair,
//! compares the PPT-distance program against the negativity, and records the
//! binegativity floor. The alternative scan replays the *same* states (same
//! seed-addressed substreams) through the positive-part witness search.
//! Records are computed in parallel but emitted in sample order; all sampled
//! data depends only on `(seed, dims, samples)`, never on thread scheduling.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{SdpStatus, build_qppt, check_conjecture_alt, solve};
use crate::error::{Error, Result};
use crate::linops::{Side, trace_norm};
use crate::measures::{binegativity_min_eig, negativity};
use crate::randstates::{RNG_ALGORITHM, SeededStream, induced_mixed};

const CHUNK: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Dimension pairs to sample, e.g. `[(2,2), (3,3)]`.
    pub dims: Vec<(usize, usize)>,
    /// Samples per dimension pair.
    pub samples: usize,
    pub seed: u64,
    /// Solver tolerance for the cone programs.
    pub sdp_tol: f64,
    /// A converged record whose `|sdp_value − negativity|` exceeds this is
    /// counted as a violation.
    pub gap_threshold: f64,
    pub max_iter: usize,
    /// Ancilla dimension for the induced measure; `None` means `d_a·d_b`.
    pub ancilla: Option<usize>,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl ScanConfig {
    pub fn new(dims: Vec<(usize, usize)>, samples: usize, seed: u64) -> Self {
        ScanConfig {
            dims,
            samples,
            seed,
            sdp_tol: crate::conic::DEFAULT_SDP_TOL,
            gap_threshold: 1e-5,
            max_iter: crate::conic::DEFAULT_MAX_ITER,
            ancilla: None,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidArgument("no dimension pairs requested".into()));
        }
        if self.dims.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if !(self.sdp_tol > 0.0 && self.sdp_tol.is_finite()) {
            return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
        }
        if self.gap_threshold < self.sdp_tol {
            return Err(Error::InvalidArgument(format!(
                "gap threshold {} below solver tolerance {}",
                self.gap_threshold, self.sdp_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("iteration budget must be positive".into()));
        }
        if self.ancilla == Some(0) {
            return Err(Error::InvalidArgument("ancilla dimension must be positive".into()));
        }
        Ok(())
    }

    /// Substream index for sample `k` of dimension pair `j`; shared by both
    /// scan variants so they see identical states.
    fn stream_index(j: usize, k: usize) -> u64 {
        ((j as u64) << 32) + k as u64
    }
}

/// One sampled state compared against the PPT-distance program.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub d_a: usize,
    pub d_b: usize,
    pub sample: usize,
    pub negativity: f64,
    pub sdp_value: f64,
    /// `sdp_value − negativity` (signed).
    pub gap: f64,
    pub binegativity_min_eig: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub total: usize,
    pub optimal: usize,
    pub non_optimal: usize,
    /// Largest `|gap|` among converged records.
    pub max_abs_gap: f64,
    pub mean_abs_gap: f64,
    pub gap_violations: usize,
    pub min_binegativity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
}

/// One sampled state through the positive-part witness search.
#[derive(Debug, Clone, Serialize)]
pub struct AltScanRecord {
    pub d_a: usize,
    pub d_b: usize,
    pub sample: usize,
    pub negativity: f64,
    pub feasible: bool,
    /// `d_T(ρ, X^{T_B}) − N(ρ)` for the witness `X`; `NaN` when none.
    pub witness_gap: f64,
    pub max_violation: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AltScanSummary {
    pub total: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub max_witness_gap: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AltScanReport {
    pub config: ScanConfig,
    pub records: Vec<AltScanRecord>,
    pub summary: AltScanSummary,
}

fn in_pool<T: Send>(threads: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        Ok(work())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(pool.install(work))
    }
}

fn scan_one(config: &ScanConfig, j: usize, da: usize, db: usize, k: usize) -> Result<ScanRecord> {
    let root = SeededStream::new(config.seed);
    let mut s = root.substream(ScanConfig::stream_index(j, k));
    let rho = induced_mixed(da, db, config.ancilla, &mut s)?;
    let start = Instant::now();
    let neg = negativity(&rho, &[1])?;
    let bineg = binegativity_min_eig(&rho)?;
    let inst = build_qppt(&rho)?;
    let sol = solve(&inst, config.sdp_tol, config.max_iter);
    Ok(ScanRecord {
        d_a: da,
        d_b: db,
        sample: k,
        negativity: neg,
        sdp_value: sol.value,
        gap: sol.value - neg,
        binegativity_min_eig: bineg,
        status: sol.status,
        iterations: sol.iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn alt_one(config: &ScanConfig, j: usize, da: usize, db: usize, k: usize) -> Result<AltScanRecord> {
    let root = SeededStream::new(config.seed);
    let mut s = root.substream(ScanConfig::stream_index(j, k));
    let rho = induced_mixed(da, db, config.ancilla, &mut s)?;
    let start = Instant::now();
    let neg = negativity(&rho, &[1])?;
    let rho_pt = rho.partial_transpose(Side::B)?;
    let (feasible, witness_gap, max_violation, status, iterations) =
        match check_conjecture_alt(&rho, config.sdp_tol) {
            Ok(chk) => {
                let wg = match &chk.witness {
                    Some(x) => 0.5 * trace_norm(&(&rho_pt - x))? - neg,
                    None => f64::NAN,
                };
                (chk.feasible, wg, chk.max_violation, chk.status, chk.iterations)
            }
            // solver failures are recorded, not fatal to the batch
            Err(Error::SolverFailure { status, .. }) => {
                (false, f64::NAN, f64::INFINITY, status, config.max_iter)
            }
            Err(e) => return Err(e),
        };
    Ok(AltScanRecord {
        d_a: da,
        d_b: db,
        sample: k,
        negativity: neg,
        feasible,
        witness_gap,
        max_violation,
        status,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn collect_records<R: Send>(
    config: &ScanConfig,
    one: impl Fn(&ScanConfig, usize, usize, usize, usize) -> Result<R> + Sync,
    mut emit: impl FnMut(&R) -> Result<()>,
) -> Result<Vec<R>> {
    let mut records = Vec::with_capacity(config.dims.len() * config.samples);
    for (j, &(da, db)) in config.dims.iter().enumerate() {
        let mut k0 = 0;
        while k0 < config.samples {
            let k1 = (k0 + CHUNK).min(config.samples);
            let chunk: Vec<Result<R>> = in_pool(config.threads, || {
                (k0..k1)
                    .into_par_iter()
                    .map(|k| one(config, j, da, db, k))
                    .collect()
            })?;
            for r in chunk {
                let r = r?;
                emit(&r)?;
                records.push(r);
            }
            k0 = k1;
        }
    }
    Ok(records)
}

fn summarize(config: &ScanConfig, records: &[ScanRecord]) -> ScanSummary {
    let optimal: Vec<&ScanRecord> =
        records.iter().filter(|r| r.status == SdpStatus::Optimal).collect();
    let max_abs_gap = optimal.iter().map(|r| r.gap.abs()).fold(0.0, f64::max);
    let mean_abs_gap = if optimal.is_empty() {
        0.0
    } else {
        optimal.iter().map(|r| r.gap.abs()).sum::<f64>() / optimal.len() as f64
    };
    ScanSummary {
        total: records.len(),
        optimal: optimal.len(),
        non_optimal: records.len() - optimal.len(),
        max_abs_gap,
        mean_abs_gap,
        gap_violations: optimal.iter().filter(|r| r.gap.abs() > config.gap_threshold).count(),
        min_binegativity: records
            .iter()
            .map(|r| r.binegativity_min_eig)
            .fold(f64::INFINITY, f64::min),
    }
}

fn summarize_alt(records: &[AltScanRecord]) -> AltScanSummary {
    let feasible = records.iter().filter(|r| r.feasible).count();
    AltScanSummary {
        total: records.len(),
        feasible,
        infeasible: records.len() - feasible,
        max_witness_gap: records
            .iter()
            .filter(|r| r.feasible)
            .map(|r| r.witness_gap)
            .fold(f64::NEG_INFINITY, f64::max),
        max_violation: records
            .iter()
            .filter(|r| r.feasible)
            .map(|r| r.max_violation)
            .fold(0.0, f64::max),
    }
}

/// Run the PPT-distance scan in memory.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport> {
    config.validate()?;
    let records = collect_records(config, scan_one, |_| Ok(()))?;
    let summary = summarize(config, &records);
    Ok(ScanReport { config: config.clone(), records, summary })
}

/// Run the witness-search scan in memory, on the same states as
/// [`run_scan`] for the same config.
pub fn run_alt_scan(config: &ScanConfig) -> Result<AltScanReport> {
    config.validate()?;
    let records = collect_records(config, alt_one, |_| Ok(()))?;
    let summary = summarize_alt(&records);
    Ok(AltScanReport { config: config.clone(), records, summary })
}

const SCAN_COLUMNS: &str =
    "d_a,d_b,sample,negativity,sdp_value,gap,binegativity_min_eig,status,iterations,wall_time_s";
const ALT_COLUMNS: &str =
    "d_a,d_b,sample,negativity,feasible,witness_gap,max_violation,status,iterations,wall_time_s";

fn scan_row(r: &ScanRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.d_a,
        r.d_b,
        r.sample,
        r.negativity,
        r.sdp_value,
        r.gap,
        r.binegativity_min_eig,
        r.status,
        r.iterations,
        r.wall_time_s
    )
}

fn alt_row(r: &AltScanRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.d_a,
        r.d_b,
        r.sample,
        r.negativity,
        r.feasible,
        r.witness_gap,
        r.max_violation,
        r.status,
        r.iterations,
        r.wall_time_s
    )
}

fn open_csv(
    path: &Path,
    header_lines: &[String],
    config: &ScanConfig,
    columns: &str,
) -> Result<std::fs::File> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    for line in header_lines {
        writeln!(f, "# {line}")?;
    }
    writeln!(f, "# config {}", serde_json::to_string(config)?)?;
    writeln!(f, "# rng {RNG_ALGORITHM}")?;
    writeln!(f, "{columns}")?;
    Ok(f)
}

fn write_sidecar<S: Serialize>(
    path: &Path,
    header_lines: &[String],
    config: &ScanConfig,
    summary: &S,
) -> Result<()> {
    let doc = serde_json::json!({
        "header": header_lines,
        "config": config,
        "rng": RNG_ALGORITHM,
        "summary": summary,
    });
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".meta.json");
    std::fs::write(std::path::PathBuf::from(sidecar), serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Run the scan, appending records to a CSV file as they complete (rows are
/// in sample order; a crash leaves a valid prefix). The file is sealed with
/// a `# summary` footer, and a `<path>.meta.json` sidecar carries the
/// config, seed, and summary. `header_lines` are embedded verbatim as
/// leading comments in both files.
pub fn scan_to_csv(
    config: &ScanConfig,
    path: impl AsRef<Path>,
    header_lines: &[String],
) -> Result<ScanReport> {
    config.validate()?;
    let path = path.as_ref();
    let mut f = open_csv(path, header_lines, config, SCAN_COLUMNS)?;
    let records = collect_records(config, scan_one, |r| {
        writeln!(f, "{}", scan_row(r))?;
        f.flush()?;
        Ok(())
    })?;
    let summary = summarize(config, &records);
    writeln!(f, "# summary {}", serde_json::to_string(&summary)?)?;
    write_sidecar(path, header_lines, config, &summary)?;
    Ok(ScanReport { config: config.clone(), records, summary })
}

/// [`scan_to_csv`] for the witness-search scan.
pub fn alt_scan_to_csv(
    config: &ScanConfig,
    path: impl AsRef<Path>,
    header_lines: &[String],
) -> Result<AltScanReport> {
    config.validate()?;
    let path = path.as_ref();
    let mut f = open_csv(path, header_lines, config, ALT_COLUMNS)?;
    let records = collect_records(config, alt_one, |r| {
        writeln!(f, "{}", alt_row(r))?;
        f.flush()?;
        Ok(())
    })?;
    let summary = summarize_alt(&records);
    writeln!(f, "# summary {}", serde_json::to_string(&summary)?)?;
    write_sidecar(path, header_lines, config, &summary)?;
    Ok(AltScanReport { config: config.clone(), records, summary })
}
