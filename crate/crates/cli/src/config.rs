//! Plain-text (TOML) experiment configuration: sections mirror the solver's
//! building blocks. Parsing, validation, and conversion into core types.

use serde::{Deserialize, Serialize};
use tdls_core::{
    ContrastField, CqScheme, IncidentField, MultistepMethod, SolveMethod, SolverConfig, TrigGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Mode {
    SingleFreq,
    CqRun,
    SweepTime,
    SweepSpace,
    KernelSelftest,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::SingleFreq => "single-freq",
            Mode::CqRun => "cq-run",
            Mode::SweepTime => "sweep-time",
            Mode::SweepSpace => "sweep-space",
            Mode::KernelSelftest => "kernel-selftest",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must agree with the mode given on the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// 0 picks the available parallelism.
    #[serde(default)]
    pub workers: usize,
    pub geometry: GeometryConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeConfig>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incident: Option<IncidentSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_freq: Option<SingleFreqSection>,
    #[serde(default)]
    pub cq_run: CqRunSection,
    #[serde(default)]
    pub kernel_selftest: KernelSelftestSection,
}

fn default_c0() -> f64 {
    1.0
}

fn default_output_dir() -> String {
    "tdls-out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// sweep-space resolutions, strictly increasing; the last is the reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    pub rho: f64,
    pub scatterer: Scatterer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scatterer {
    Disk { radius: f64, q: f64 },
    MollifiedDisk { radius: f64, q: f64, ramp_width: f64 },
}

impl Scatterer {
    pub fn contrast(&self, grid: TrigGrid) -> tdls_core::Result<ContrastField> {
        match *self {
            Scatterer::Disk { radius, q } => ContrastField::disk(grid, radius, q),
            Scatterer::MollifiedDisk {
                radius,
                q,
                ramp_width,
            } => ContrastField::mollified_disk(grid, radius, q, ramp_width),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub method: SchemeMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// sweep-time step counts, strictly increasing; the last is the reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    pub t_final: f64,
    #[serde(default)]
    pub lambda: LambdaChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeMethod {
    Bdf1,
    Bdf2,
}

impl From<SchemeMethod> for MultistepMethod {
    fn from(m: SchemeMethod) -> Self {
        match m {
            SchemeMethod::Bdf1 => MultistepMethod::Bdf1,
            SchemeMethod::Bdf2 => MultistepMethod::Bdf2,
        }
    }
}

/// Either the literal string "auto" or a number in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Value(f64),
    Auto(String),
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Auto("auto".into())
    }
}

impl LambdaChoice {
    pub fn resolve(&self) -> Result<Option<f64>, String> {
        match self {
            LambdaChoice::Value(v) => Ok(Some(*v)),
            LambdaChoice::Auto(s) if s == "auto" => Ok(None),
            LambdaChoice::Auto(s) => Err(format!(
                "lambda must be a number or the string \"auto\", got \"{s}\""
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_solver_method")]
    pub method: SolverMethodName,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethodName {
    Gmres,
    TwoGrid,
    Dense,
}

fn default_solver_method() -> SolverMethodName {
    SolverMethodName::Gmres
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    400
}
fn default_restart() -> usize {
    50
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            method: default_solver_method(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            restart: default_restart(),
            coarse_n: None,
        }
    }
}

impl SolverSection {
    pub fn to_core(&self) -> SolverConfig {
        SolverConfig {
            method: match self.method {
                SolverMethodName::Gmres => SolveMethod::Gmres,
                SolverMethodName::TwoGrid => SolveMethod::TwoGrid,
                SolverMethodName::Dense => SolveMethod::Dense,
            },
            tol: self.tol,
            max_iter: self.max_iter,
            restart: self.restart,
            coarse_n: self.coarse_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSection {
    pub a: f64,
    pub b: f64,
    /// Pulse-center delay; the quadrature assumes causal data, so keep the
    /// pulse essentially outside the scatterer at t = 0.
    #[serde(default = "default_delay")]
    pub t0: f64,
}

fn default_delay() -> f64 {
    IncidentField::EXPERIMENT_DELAY
}

impl IncidentSection {
    pub fn to_core(&self, c0: f64) -> IncidentField {
        IncidentField {
            a: self.a,
            b: self.b,
            c0,
            t0: self.t0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleFreqSection {
    /// Transform parameter as [re, im], Re > 0.
    pub s: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqRunSection {
    /// Write every k-th frame as CSV; 0 disables frame output.
    #[serde(default = "default_stride")]
    pub frame_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for CqRunSection {
    fn default() -> Self {
        CqRunSection {
            frame_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSelftestSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_oracle_tol")]
    pub tol: f64,
}

fn default_samples() -> usize {
    50
}
fn default_oracle_tol() -> f64 {
    1e-10
}

impl Default for KernelSelftestSection {
    fn default() -> Self {
        KernelSelftestSection {
            samples: default_samples(),
            tol: default_oracle_tol(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Structural validation for the requested mode. Returns the scheme
    /// pieces the runner needs; anything wrong is a config error (exit 1).
    pub fn validate(&self, mode: Mode) -> Result<(), String> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(format!(
                    "config declares mode {m} but the command line requested {mode}"
                ));
            }
        }
        if self.geometry.d != 2 && self.geometry.d != 3 {
            return Err(format!("geometry.d must be 2 or 3, got {}", self.geometry.d));
        }
        if !(self.geometry.rho.is_finite() && self.geometry.rho > 0.0) {
            return Err("geometry.rho must be positive".into());
        }
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return Err("c0 must be positive".into());
        }
        let needs_single_n = matches!(mode, Mode::SingleFreq | Mode::CqRun | Mode::SweepTime);
        if needs_single_n && self.geometry.n.is_none() {
            return Err(format!("mode {mode} requires geometry.n"));
        }
        if matches!(mode, Mode::SweepSpace) {
            match &self.geometry.n_list {
                None => return Err("sweep-space requires geometry.n_list".into()),
                Some(list) => {
                    if list.len() < 2 {
                        return Err("geometry.n_list needs at least two entries".into());
                    }
                    if !list.windows(2).all(|w| w[0] < w[1]) {
                        return Err("geometry.n_list must be strictly increasing".into());
                    }
                }
            }
        }
        let needs_scheme = matches!(mode, Mode::CqRun | Mode::SweepTime | Mode::SweepSpace);
        if needs_scheme {
            let scheme = self
                .scheme
                .as_ref()
                .ok_or_else(|| format!("mode {mode} requires a [scheme] section"))?;
            scheme.lambda.resolve()?;
            if matches!(mode, Mode::CqRun | Mode::SweepSpace) && scheme.m.is_none() {
                return Err(format!("mode {mode} requires scheme.m"));
            }
            if matches!(mode, Mode::SweepTime) {
                match &scheme.m_list {
                    None => return Err("sweep-time requires scheme.m_list".into()),
                    Some(list) => {
                        if list.len() < 2 {
                            return Err("scheme.m_list needs at least two entries".into());
                        }
                        if !list.windows(2).all(|w| w[0] < w[1]) {
                            return Err("scheme.m_list must be strictly increasing".into());
                        }
                        let last = *list.last().unwrap();
                        if !list[..list.len() - 1].iter().all(|m| last % m == 0) {
                            return Err(
                                "every scheme.m_list entry must divide the final (reference) entry"
                                    .into(),
                            );
                        }
                    }
                }
            }
            if self.incident.is_none() {
                return Err(format!("mode {mode} requires an [incident] section"));
            }
        }
        if matches!(mode, Mode::SingleFreq) {
            let sf = self
                .single_freq
                .as_ref()
                .ok_or("single-freq requires a [single_freq] section")?;
            if !(sf.s[0].is_finite() && sf.s[0] > 0.0) {
                return Err("single_freq.s must have positive real part".into());
            }
            if !matches!(self.geometry.scatterer, Scatterer::Disk { .. }) {
                return Err(
                    "single-freq compares against the analytic disk series and needs a plain disk"
                        .into(),
                );
            }
            if self.geometry.d != 2 {
                return Err("single-freq needs geometry.d = 2".into());
            }
        }
        if matches!(mode, Mode::SweepSpace | Mode::SweepTime) && self.geometry.d != 2 {
            return Err("sweeps are 2-d experiments".into());
        }
        if matches!(mode, Mode::KernelSelftest) {
            let ks = &self.kernel_selftest;
            if ks.samples == 0 {
                return Err("kernel_selftest.samples must be positive".into());
            }
            if !(1e-12..=1e-4).contains(&ks.tol) {
                return Err("kernel_selftest.tol must lie in [1e-12, 1e-4]".into());
            }
        }
        Ok(())
    }

    pub fn build_scheme(&self, m: usize) -> Result<CqScheme, String> {
        let sc = self.scheme.as_ref().expect("validated");
        let lambda = sc.lambda.resolve()?;
        let scheme = CqScheme::new(sc.method.into(), m, sc.t_final, lambda)
            .map_err(|e| e.to_string())?;
        Ok(match sc.sigma0_floor {
            Some(f) => scheme.with_sigma_floor(f),
            None => scheme,
        })
    }

    pub fn grid(&self, n: usize) -> Result<TrigGrid, String> {
        TrigGrid::new(self.geometry.d, n, self.geometry.rho).map_err(|e| e.to_string())
    }
}
