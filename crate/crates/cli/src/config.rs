//! Run configuration files.
//!
//! The format is TOML. Unknown keys are rejected everywhere. See the README
//! for the full grammar.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use realrod::{
    Component, DetectorSpec, DispersionLaw, Engine, ExperimentConfig, Method, PairState, Region,
    SingleParticleState, SmearingKernel, Spin, Vec3, PLANCK_LENGTH_SI,
};

/// Why a configuration could not be turned into a run.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    /// TOML syntax or schema error; the message carries line, column and key.
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<realrod::Error> for ConfigError {
    fn from(e: realrod::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Desk,
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Delta,
    FixedWidth,
    NgVanDam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub law: Law,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planck_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Box {
        #[serde(default)]
        center: [f64; 3],
        half_extents: [f64; 3],
    },
    Sphere {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
}

impl RegionSpec {
    pub fn build(&self) -> realrod::Result<Region> {
        match *self {
            RegionSpec::Box {
                center,
                half_extents,
            } => Region::cuboid(center.into(), half_extents.into()),
            RegionSpec::Sphere { center, radius } => Region::sphere(center.into(), radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub template: RegionSpec,
    pub reading: [f64; 3],
}

impl DetectorSection {
    fn build(&self, what: &str) -> Result<DetectorSpec> {
        let template = self
            .template
            .build()
            .map_err(|e| ConfigError::Invalid(format!("{what}.template: {e}")))?;
        Ok(DetectorSpec::new(template, self.reading.into())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub origin_offset: [f64; 3],
    pub v1: RegionSpec,
    pub v2: RegionSpec,
    pub detector_x: DetectorSection,
    pub detector_y: DetectorSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Auto,
    Closed,
    Quadrature,
    #[serde(rename = "mc")]
    #[value(name = "mc")]
    MonteCarlo,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Method {
        match m {
            MethodName::Auto => Method::Auto,
            MethodName::Closed => Method::Closed,
            MethodName::Quadrature => Method::Quadrature,
            MethodName::MonteCarlo => Method::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_n_sigma")]
    pub n_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> MethodName {
    MethodName::Auto
}

fn default_samples() -> u64 {
    Engine::default().samples
}

fn default_nodes() -> usize {
    Engine::default().nodes
}

fn default_n_sigma() -> f64 {
    Engine::default().n_sigma
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            method: default_method(),
            samples: default_samples(),
            nodes: default_nodes(),
            n_sigma: default_n_sigma(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_range: Option<LogRange>,
    pub direction: [f64; 3],
}

impl SweepSection {
    pub fn distances(&self) -> Result<Vec<f64>> {
        match (&self.distances, &self.log_range) {
            (Some(d), None) => Ok(d.clone()),
            (None, Some(r)) => {
                if !(r.start > 0.0 && r.stop >= r.start && r.stop.is_finite()) {
                    return Err(ConfigError::Invalid(
                        "sweep.log_range needs 0 < start <= stop".into(),
                    ));
                }
                if r.count == 0 {
                    return Err(ConfigError::Invalid(
                        "sweep.log_range.count must be positive".into(),
                    ));
                }
                let (a, b) = (r.start.log10(), r.stop.log10());
                Ok((0..r.count)
                    .map(|i| match i {
                        0 => r.start,
                        _ if i + 1 == r.count => r.stop,
                        _ => 10f64.powf(a + (b - a) * i as f64 / (r.count - 1) as f64),
                    })
                    .collect())
            }
            _ => Err(ConfigError::Invalid(
                "sweep needs exactly one of `distances` or `log_range`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeStudySection {
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub region: RegionSpec,
    /// `1` or `-1`.
    pub spin: i64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilitySection {
    pub detector: DetectorSection,
    pub components: Vec<ComponentSection>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: Units,
    pub kernel: KernelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_study: Option<SizeStudySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<ProbabilitySection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub method: Option<MethodName>,
    pub n_sigma: Option<f64>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse(m) => ConfigError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.engine.seed = v;
        }
        if let Some(v) = o.samples {
            self.engine.samples = v;
        }
        if let Some(v) = o.method {
            self.engine.method = v;
        }
        if let Some(v) = o.n_sigma {
            self.engine.n_sigma = v;
        }
        if let Some(v) = &o.out {
            self.output.path = Some(v.clone());
        }
        if let Some(v) = o.format {
            self.output.format = v;
        }
    }

    /// Canonical TOML of everything that affects results. The output section
    /// only says where results go, so it is left out.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        toml::to_string(&c).expect("run config always serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn kernel(&self) -> Result<SmearingKernel> {
        let k = &self.kernel;
        let law = match k.law {
            Law::Delta => DispersionLaw::Delta,
            Law::FixedWidth => DispersionLaw::FixedWidth {
                variance: k.variance.ok_or_else(|| {
                    ConfigError::Invalid(
                        "kernel.variance is required for law = \"fixed-width\"".into(),
                    )
                })?,
            },
            Law::NgVanDam => DispersionLaw::NgVanDam {
                planck_length: match (k.planck_length, self.units) {
                    (Some(l), _) => l,
                    (None, Units::Si) => PLANCK_LENGTH_SI,
                    (None, Units::Desk) => return Err(ConfigError::Invalid(
                        "kernel.planck_length is required for law = \"ng-van-dam\" in desk units"
                            .into(),
                    )),
                },
            },
        };
        Ok(SmearingKernel::with_floor(
            law,
            k.dispersion_floor.unwrap_or(0.0),
        )?)
    }

    pub fn engine(&self) -> Engine {
        let e = &self.engine;
        Engine {
            method: e.method.into(),
            samples: e.samples,
            nodes: e.nodes,
            n_sigma: e.n_sigma,
            seed: e.seed,
            parallel: true,
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let x = self
            .experiment
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [experiment] section".into()))?;
        let region = |spec: &RegionSpec, what: &str| {
            spec.build()
                .map_err(|e| ConfigError::Invalid(format!("experiment.{what}: {e}")))
        };
        let state = PairState::new(region(&x.v1, "v1")?, region(&x.v2, "v2")?)
            .map_err(|e| ConfigError::Invalid(format!("experiment: {e}")))?;
        Ok(ExperimentConfig::new(
            state,
            x.detector_x.build("experiment.detector_x")?,
            x.detector_y.build("experiment.detector_y")?,
            self.kernel()?,
            x.origin_offset.into(),
        )?)
    }

    pub fn sweep(&self) -> Result<(Vec<f64>, Vec3)> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [sweep] section".into()))?;
        Ok((s.distances()?, s.direction.into()))
    }

    pub fn scales(&self) -> Result<Vec<f64>> {
        Ok(self
            .size_study
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [size_study] section".into()))?
            .scales
            .clone())
    }

    pub fn probability(&self) -> Result<(SingleParticleState, DetectorSpec)> {
        let p = self
            .probability
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [probability] section".into()))?;
        let components = p
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let spin = Spin::from_value(c.spin).ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "probability.components[{i}].spin must be 1 or -1"
                    ))
                })?;
                let region = c.region.build().map_err(|e| {
                    ConfigError::Invalid(format!("probability.components[{i}].region: {e}"))
                })?;
                Ok(Component {
                    region,
                    spin,
                    weight: c.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let state = SingleParticleState::new(components)
            .map_err(|e| ConfigError::Invalid(format!("probability: {e}")))?;
        Ok((state, p.detector.build("probability.detector")?))
    }
}
