//! Subcommand bodies. Each returns a table or a classified failure.

use realrod::{
    chsh_value, conditional_probability, detector_size_study, origin_sweep, spacelike_check,
    suppression_factor, Engine, Error, EstimateMethod, ExperimentConfig, FourPairConfig, Spin,
    SweepFailure,
};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig};
use crate::record::{fmt_f64, Cell, Table};

/// Exit status of the tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Io = 1,
    Config = 2,
    Numerical = 3,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn exit(&self) -> Exit {
        match self {
            RunError::Config(_) => Exit::Config,
            RunError::Numerical(_) => Exit::Numerical,
            RunError::Io(_) => Exit::Io,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalInconsistency(_) | Error::MissingMonteCarloParams => {
                RunError::Numerical(e.to_string())
            }
            _ => RunError::Config(e.to_string()),
        }
    }
}

/// A finished table plus failures that did not stop the run.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn clean(table: Table) -> Self {
        Outcome {
            table,
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn spacelike_warnings(cfg: &ExperimentConfig) -> Vec<String> {
    let r = spacelike_check(cfg);
    if r.separated {
        return Vec::new();
    }
    vec![format!(
        "warning: detectors are not spacelike separated: diameters {} and {} are not both below half the particle separation {}",
        r.diameter_x, r.diameter_y, r.half_separation
    )]
}

fn est(e: &realrod::Estimate) -> [Cell; 2] {
    [Cell::Float(e.value), Cell::Float(e.stderr)]
}

pub fn chsh(cfg: &RunConfig, engine: &Engine) -> Result<Outcome, RunError> {
    let exp = cfg.experiment()?;
    let r = chsh_value(&exp, engine)?;
    let mut row = Vec::new();
    row.extend(est(&r.chsh));
    row.extend(est(&r.chsh_direct));
    row.extend(est(&r.corr_zz));
    row.extend(est(&r.corr_xx));
    row.push(Cell::Float(realrod::corr_zx(&exp).value));
    for q in [r.qs, r.rs, r.rt, r.qt] {
        row.push(Cell::Float(q.value));
    }
    row.push(Cell::Float(r.deficit));
    row.push(Cell::Text(r.chsh.method.as_str().into()));
    row.push(Cell::Int(engine.seed));
    row.push(Cell::Bool(spacelike_check(&exp).separated));
    Ok(Outcome {
        table: Table {
            header: vec![
                "chsh",
                "chsh_stderr",
                "chsh_direct",
                "chsh_direct_stderr",
                "corr_zz",
                "corr_zz_stderr",
                "corr_xx",
                "corr_xx_stderr",
                "corr_zx",
                "qs",
                "rs",
                "rt",
                "qt",
                "deficit",
                "method",
                "seed",
                "spacelike",
            ],
            rows: vec![row],
        },
        failures: Vec::new(),
        warnings: spacelike_warnings(&exp),
    })
}

fn failure_row(parameter: f64, f: &SweepFailure) -> Vec<Cell> {
    vec![
        Cell::Float(parameter),
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Text("failed".into()),
        Cell::Int(f.seed),
    ]
}

fn describe(label: &str, f: &SweepFailure) -> String {
    format!(
        "record {} ({label} {}): {}",
        f.index,
        fmt_f64(f.parameter),
        f.error
    )
}

pub fn sweep(cfg: &RunConfig, engine: &Engine) -> Result<Outcome, RunError> {
    let exp = cfg.experiment()?;
    let (distances, direction) = cfg.sweep()?;
    let records = origin_sweep(&exp, &distances, direction, engine)?;
    let mut out = Outcome::clean(Table {
        header: vec![
            "origin_distance",
            "chsh",
            "chsh_stderr",
            "deficit",
            "method",
            "seed",
        ],
        rows: Vec::new(),
    });
    out.warnings = spacelike_warnings(&exp);
    for r in records {
        match r {
            Ok(r) => out.table.rows.push(vec![
                Cell::Float(r.origin_distance),
                Cell::Float(r.chsh.value),
                Cell::Float(r.chsh.stderr),
                Cell::Float(r.deficit),
                Cell::Text(r.chsh.method.as_str().into()),
                Cell::Int(r.seed),
            ]),
            Err(f) => {
                out.table.rows.push(failure_row(f.parameter, &f));
                out.failures.push(describe("origin_distance", &f));
            }
        }
    }
    Ok(out)
}

pub fn size_study(cfg: &RunConfig, engine: &Engine) -> Result<Outcome, RunError> {
    let exp = cfg.experiment()?;
    let scales = cfg.scales()?;
    let records = detector_size_study(&exp, &scales, engine)?;
    let mut out = Outcome::clean(Table {
        header: vec!["scale", "chsh", "chsh_stderr", "deficit", "method", "seed"],
        rows: Vec::new(),
    });
    for r in records {
        match r {
            Ok(r) => out.table.rows.push(vec![
                Cell::Float(r.scale),
                Cell::Float(r.chsh.value),
                Cell::Float(r.chsh.stderr),
                Cell::Float(r.deficit),
                Cell::Text(r.chsh.method.as_str().into()),
                Cell::Int(r.seed),
            ]),
            Err(f) => {
                out.table.rows.push(failure_row(f.parameter, &f));
                out.failures.push(describe("scale", &f));
            }
        }
    }
    Ok(out)
}

pub fn probability(cfg: &RunConfig, engine: &Engine) -> Result<Outcome, RunError> {
    let (state, det) = cfg.probability()?;
    let kernel = cfg.kernel()?;
    let up = conditional_probability(&state, Spin::Up, &det, &kernel, engine)?;
    let down = conditional_probability(&state, Spin::Down, &det, &kernel, engine)?;
    let method: EstimateMethod = up.method.max(down.method);
    let mut row = Vec::new();
    row.extend(est(&up));
    row.extend(est(&down));
    row.push(Cell::Text(method.as_str().into()));
    row.push(Cell::Int(engine.seed));
    Ok(Outcome::clean(Table {
        header: vec![
            "p_up",
            "p_up_stderr",
            "p_down",
            "p_down_stderr",
            "method",
            "seed",
        ],
        rows: vec![row],
    }))
}

/// Inputs of the suppression table.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionGrid {
    pub delta: f64,
    pub d: f64,
    pub planck_length: f64,
    pub delta_max: Option<f64>,
    pub d_max: Option<f64>,
    pub points: usize,
}

fn axis(lo: f64, hi: Option<f64>, points: usize) -> Result<Vec<f64>, RunError> {
    match hi {
        None => Ok(vec![lo]),
        Some(hi) if hi >= lo && points >= 2 => {
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..points)
                .map(|i| match i {
                    0 => lo,
                    _ if i + 1 == points => hi,
                    _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
                })
                .collect())
        }
        Some(_) => Err(RunError::Config(
            "grid upper bound must not be below the lower bound and --points must be at least 2"
                .into(),
        )),
    }
}

pub fn suppression(g: &SuppressionGrid) -> Result<Outcome, RunError> {
    let mut rows = Vec::new();
    for delta in axis(g.delta, g.delta_max, g.points)? {
        for d in axis(g.d, g.d_max, g.points)? {
            let fp = FourPairConfig::new(delta, d, g.planck_length)?;
            rows.push(vec![
                Cell::Float(delta),
                Cell::Float(d),
                Cell::Float(g.planck_length),
                Cell::Float(fp.exponent()),
                Cell::Float(suppression_factor(&fp)),
                Cell::Float(fp.deviation()),
            ]);
        }
    }
    Ok(Outcome::clean(Table {
        header: vec![
            "delta",
            "d",
            "planck_length",
            "exponent",
            "factor",
            "one_minus_factor",
        ],
        rows,
    }))
}

/// Hash of the suppression inputs, in the same role as a config hash.
pub fn suppression_hash(g: &SuppressionGrid) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
    let canonical = format!(
        "suppression delta={} d={} planck_length={} delta_max={} d_max={} points={}",
        fmt_f64(g.delta),
        fmt_f64(g.d),
        fmt_f64(g.planck_length),
        opt(g.delta_max),
        opt(g.d_max),
        g.points
    );
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
