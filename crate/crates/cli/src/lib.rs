//! Command implementations behind the `l1path` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use l1path::homotopy::{check_alternatives, Termination};
use l1path::instances::{certificate, make_ground_truth, random_bp_pair, random_instance, CertificateRegime};
use l1path::io::{read_instance_json, read_instance_split, InstanceFile};
use l1path::linalg::norm1;
use l1path::{check_optimal_pair, oracle, solve_path_with, HomotopyOptions, ProblemInstance, SolutionPath};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Verify(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<l1path::Error> for CliError {
    fn from(e: l1path::Error) -> Self {
        use l1path::Error as E;
        match e {
            E::Parse(_) | E::Json(_) | E::Dimension(_) | E::NonFinite(_) => CliError::Parse(e.to_string()),
            E::InvalidArgument(_) | E::OutOfRange { .. } => CliError::Usage(e.to_string()),
            E::Io(io) => CliError::Io(io),
            other => CliError::Solver(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cardinalities {
    pub j_p: usize,
    pub i_p: usize,
    pub j_d: usize,
    pub i_d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakpointRecord {
    pub k: usize,
    pub delta: f64,
    pub t: f64,
    /// Dense primal iterate.
    pub x: Vec<f64>,
    /// Nonzero dual entries as `(row, value)`.
    pub y: Vec<(usize, f64)>,
    pub sets: Cardinalities,
    pub objective: f64,
}

/// Wall-clock milliseconds per phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub dual_ms: f64,
    pub primal_ms: f64,
    pub refresh_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathExport {
    pub schema_version: u32,
    /// SHA-256 of the instance data, hex encoded.
    pub instance_digest: String,
    pub rows: usize,
    pub cols: usize,
    pub target: f64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub dual_iterations: usize,
    pub primal_iterations: usize,
    pub retries: usize,
    pub breakpoints: Vec<BreakpointRecord>,
    pub timing: Timing,
}

impl PathExport {
    pub fn new(inst: &ProblemInstance, path: &SolutionPath, total_ms: f64) -> Self {
        let (status, message) = match &path.terminated {
            Termination::TargetReached => ("target_reached".to_string(), None),
            Termination::Failure(msg) => ("failure".to_string(), Some(msg.clone())),
        };
        let breakpoints = path
            .breakpoints
            .iter()
            .map(|bp| BreakpointRecord {
                k: bp.k,
                delta: bp.delta_k,
                t: bp.t_step,
                x: bp.x.clone(),
                y: bp
                    .y
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i, *v))
                    .collect(),
                sets: Cardinalities {
                    j_p: bp.sets.j_p.len(),
                    i_p: bp.sets.i_p.len(),
                    j_d: bp.sets.j_d.len(),
                    i_d: bp.sets.i_d.len(),
                },
                objective: norm1(&bp.x),
            })
            .collect();
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        Self {
            schema_version: SCHEMA_VERSION,
            instance_digest: instance_digest(inst),
            rows: inst.rows(),
            cols: inst.cols(),
            target: path.target,
            status,
            message,
            dual_iterations: path.stats.dual_iterations,
            primal_iterations: path.stats.primal_iterations,
            retries: path.stats.retries,
            breakpoints,
            timing: Timing {
                dual_ms: ms(path.stats.dual_time),
                primal_ms: ms(path.stats.primal_time),
                refresh_ms: ms(path.stats.refresh_time),
                total_ms,
            },
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let export: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if export.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!("unsupported schema version {}", export.schema_version)));
        }
        Ok(export)
    }

    /// One row per breakpoint: `k,delta,t,nnz(x),nnz(y),objective`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,delta,t,nnz(x),nnz(y),objective\n");
        for bp in &self.breakpoints {
            let nnz_x = bp.x.iter().filter(|v| **v != 0.0).count();
            let _ = writeln!(out, "{},{},{},{},{},{}", bp.k, bp.delta, bp.t, nnz_x, bp.y.len(), bp.objective);
        }
        out
    }
}

/// SHA-256 over dimensions, `A` (row-major), `b` and `δ` as little-endian bytes.
pub fn instance_digest(inst: &ProblemInstance) -> String {
    let mut h = Sha256::new();
    h.update((inst.rows() as u64).to_le_bytes());
    h.update((inst.cols() as u64).to_le_bytes());
    for v in inst.a.data().iter().chain(&inst.b).chain(std::iter::once(&inst.delta)) {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().fold(String::with_capacity(64), |mut s, byte| {
        let _ = write!(s, "{byte:02x}");
        s
    })
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Coordinate paths `xⱼ(δ)`, with `δ` decreasing from left to right and a
/// tick label at every breakpoint.
pub fn render_svg(export: &PathExport) -> String {
    let (w, h) = (800.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 70.0);
    let bps = &export.breakpoints;
    let d_hi = bps.first().map_or(1.0, |b| b.delta);
    let d_lo = bps.last().map_or(0.0, |b| b.delta);
    let d_span = if d_hi > d_lo { d_hi - d_lo } else { 1.0 };
    let all = bps.iter().flat_map(|b| b.x.iter().copied());
    let (mut v_lo, mut v_hi) = all.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if v_hi - v_lo <= 0.0 {
        v_lo -= 1.0;
        v_hi += 1.0;
    }
    let px = |d: f64| left + (d_hi - d) / d_span * (w - left - right);
    let py = |v: f64| top + (v_hi - v) / (v_hi - v_lo) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (left, w - right, top, h - bottom);
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{x0}" y1="{:.3}" x2="{x1}" y2="{:.3}" stroke="#999999" stroke-dasharray="4 3"/>"##,
        py(0.0),
        py(0.0)
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="10" text-anchor="end">"#);
    for bp in bps {
        let x = px(bp.delta);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.3}" y1="{y1}" x2="{x:.3}" y2="{:.3}" stroke="#cccccc"/><text transform="translate({x:.3},{:.3}) rotate(-60)">{:.4}</text>"##,
            y1 + 5.0,
            y1 + 10.0,
            bp.delta
        );
    }
    for v in [v_lo, 0.0, v_hi] {
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{v:.3}</text>"#, x0 - 6.0, py(v) + 3.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle">delta</text>"#,
        (x0 + x1) / 2.0,
        h - 8.0
    );
    let n = bps.first().map_or(0, |b| b.x.len());
    for j in 0..n {
        let points: Vec<String> = bps
            .iter()
            .map(|bp| format!("{:.3},{:.3}", px(bp.delta), py(bp.x[j])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-coordinate="{j}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[j % PALETTE.len()],
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub struct SolveArgs {
    pub input: PathBuf,
    pub rhs: Option<PathBuf>,
    pub delta: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub cold: bool,
    pub trace: bool,
}

/// Reads a JSON instance, or a MatrixMarket `A` with a separate `b`.
pub fn load_instance(input: &Path, rhs: Option<&Path>, delta: Option<f64>) -> CliResult<ProblemInstance> {
    match rhs {
        Some(b_path) => {
            let delta = delta.ok_or_else(|| CliError::Usage("--delta is required with a MatrixMarket matrix".into()))?;
            Ok(read_instance_split(input, b_path, delta)?)
        }
        None => {
            let mut file = read_instance_json(input)?;
            if let Some(d) = delta {
                file.delta = d;
            }
            Ok(file.to_instance()?)
        }
    }
}

/// Solves and returns the export; a failed path is still exported.
pub fn cmd_solve(args: &SolveArgs) -> CliResult<(PathExport, Option<CliError>)> {
    let inst = load_instance(&args.input, args.rhs.as_deref(), args.delta)?;
    let clock = std::time::Instant::now();
    let path = solve_path_with(
        &inst,
        HomotopyOptions {
            warm_start: !args.cold,
            max_iters: args.max_iters,
            trace: args.trace,
            verify_tol: args.tol,
            snapshot: None,
        },
    );
    let export = PathExport::new(&inst, &path, clock.elapsed().as_secs_f64() * 1e3);
    let failure = match &path.terminated {
        Termination::TargetReached => None,
        Termination::Failure(msg) => Some(CliError::Solver(msg.clone())),
    };
    Ok((export, failure))
}

pub fn cmd_plot(path_json: &Path, svg_out: &Path) -> CliResult<()> {
    let export = PathExport::from_json(&std::fs::read_to_string(path_json)?)?;
    if export.breakpoints.is_empty() {
        return Err(CliError::Parse("path has no breakpoints".into()));
    }
    std::fs::write(svg_out, render_svg(&export))?;
    Ok(())
}

pub struct VerifyArgs {
    pub input: Option<PathBuf>,
    pub count: u64,
    pub seed: u64,
    pub tol: f64,
    pub perturb_y: bool,
    pub replay_dir: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyRow {
    pub property: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    /// Replay files written for failing instances.
    pub replays: Vec<PathBuf>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.failed == 0)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<28} {:>8} {:>8}\n", "property", "passed", "failed");
        for r in &self.rows {
            let _ = writeln!(out, "{:<28} {:>8} {:>8}", r.property, r.passed, r.failed);
        }
        out
    }
}

const PROPERTIES: [&str; 4] = ["path completes", "optimal pairs", "oracle equivalence", "alternatives exclusivity"];

struct Case {
    seed: Option<u64>,
    inst: ProblemInstance,
}

fn check_case(case: &Case, tol: f64, perturb_y: bool) -> [bool; 4] {
    let inst = &case.inst;
    let path = solve_path_with(inst, HomotopyOptions::default());
    let complete = path.is_complete();
    let pairs = path.breakpoints.iter().all(|bp| {
        let mut y = bp.y.clone();
        if perturb_y {
            y.iter_mut().for_each(|v| *v += 1e-3);
        }
        check_optimal_pair(inst, &bp.x, &y, bp.delta_k, tol)
    });
    let oracle_ok = match oracle::solve_instance(inst) {
        Ok(r) => complete && (path.final_objective() - r.objective).abs() <= 1e-7 * r.objective.abs().max(1.0),
        Err(_) => false,
    };
    let bps = &path.breakpoints;
    let exclusive = bps.len() < 3 || {
        let (x, d) = (&bps[1].x, bps[1].delta_k);
        matches!(check_alternatives(inst, x, &bps[1].y, d), Ok((true, false)))
            && matches!(check_alternatives(inst, x, &bps[2].y, d), Ok((false, true)))
    };
    [complete, pairs, oracle_ok, exclusive]
}

/// Runs the property checks on `count` seeded instances (or one input file).
pub fn cmd_verify(args: &VerifyArgs) -> CliResult<VerifyReport> {
    let cases: Vec<Case> = match &args.input {
        Some(p) => vec![Case {
            seed: None,
            inst: load_instance(p, None, None)?,
        }],
        None => (0..args.count)
            .map(|i| {
                let seed = args.seed.wrapping_add(i);
                let m = 5 + (seed % 16) as usize;
                random_instance(m, 2 * m, seed).map(|inst| Case { seed: Some(seed), inst })
            })
            .collect::<l1path::Result<_>>()?,
    };
    let results: Vec<[bool; 4]> = cases.par_iter().map(|c| check_case(c, args.tol, args.perturb_y)).collect();

    let mut rows: Vec<VerifyRow> = PROPERTIES
        .iter()
        .map(|&property| VerifyRow { property, ..Default::default() })
        .collect();
    let mut replays = Vec::new();
    for (case, res) in cases.iter().zip(&results) {
        for (row, ok) in rows.iter_mut().zip(res) {
            if *ok {
                row.passed += 1;
            } else {
                row.failed += 1;
            }
        }
        if res.iter().any(|ok| !ok) {
            let mut file = InstanceFile::from_instance(&case.inst);
            file.seed = case.seed;
            let name = match case.seed {
                Some(s) => format!("verify-failure-seed-{s}.json"),
                None => format!("verify-failure-{}.json", &instance_digest(&case.inst)[..12]),
            };
            std::fs::create_dir_all(&args.replay_dir)?;
            let path = args.replay_dir.join(name);
            std::fs::write(&path, file.to_json()?)?;
            replays.push(path);
        }
    }
    Ok(VerifyReport { rows, replays })
}

pub struct GenArgs {
    pub m: usize,
    pub n: usize,
    pub sparsity: usize,
    pub delta: f64,
    pub seed: u64,
    pub dynamic_range: f64,
    pub dense_certificate: bool,
}

/// Instance with known optimum `x̄` and certificate `ȳ`.
pub fn cmd_gen(args: &GenArgs) -> CliResult<InstanceFile> {
    if args.sparsity > args.m {
        return Err(CliError::Usage(format!("sparsity {} exceeds m = {}", args.sparsity, args.m)));
    }
    if !(args.delta >= 0.0 && args.delta.is_finite()) {
        return Err(CliError::Usage(format!("delta must be finite and nonnegative, got {}", args.delta)));
    }
    let regime = if args.dense_certificate {
        CertificateRegime::Dense
    } else {
        CertificateRegime::Sparse
    };
    let (a, x_bar) = random_bp_pair(args.m, args.n, args.sparsity, args.dynamic_range, args.seed)?;
    let y_bar = certificate(&a, &x_bar, regime)?;
    let gt = make_ground_truth(&a, &x_bar, &y_bar, args.delta)?;
    Ok(InstanceFile::from_ground_truth(&gt, Some(args.seed)))
}
