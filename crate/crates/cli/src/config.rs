use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use starframe::frames::{Frame, KernelRoute, PartSource};
use starframe::identities::SuiteConfig;
use starframe::rabi::{Figure1Options, RabiParams};

/// Flat run configuration; every key is optional and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub omega0: f64,
    pub beta: f64,
    pub omega: f64,
    pub t_total: f64,
    pub n_grid: usize,
    pub orders: Vec<usize>,
    pub frames: Vec<String>,
    /// `closed` or `computed`
    pub parts: String,
    /// `quadrature` or `star`
    pub route: String,
    pub substeps: usize,
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub rhos: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub emit_svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = RabiParams::default();
        let s = SuiteConfig::default();
        Self {
            omega0: p.omega0,
            beta: p.beta,
            omega: p.omega,
            t_total: p.t_total,
            n_grid: p.n_grid,
            orders: p.orders,
            frames: vec!["lab".into(), "std1".into(), "biframe".into()],
            parts: "closed".into(),
            route: "quadrature".into(),
            substeps: 20,
            seed: s.seed,
            trials: s.trials,
            dims: s.dims,
            rhos: s.rhos,
            output_path: None,
            emit_svg: false,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.rabi()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        self.figure1_options()?;
        if self.substeps == 0 {
            return Err(ConfigError("substeps must be at least 1".into()));
        }
        if self.dims.contains(&0) {
            return Err(ConfigError("dims entries must be positive".into()));
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(ConfigError(format!(
                "rhos entries must lie in (0, 1) (got {r})"
            )));
        }
        if self.n_grid < 2 {
            return Err(ConfigError(format!(
                "n_grid must be at least 2 (got {})",
                self.n_grid
            )));
        }
        Ok(())
    }

    pub fn rabi(&self) -> RabiParams {
        RabiParams {
            omega0: self.omega0,
            beta: self.beta,
            omega: self.omega,
            t_total: self.t_total,
            n_grid: self.n_grid,
            orders: self.orders.clone(),
        }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            trials: self.trials,
            dims: self.dims.clone(),
            rhos: self.rhos.clone(),
        }
    }

    pub fn figure1_options(&self) -> Result<Figure1Options, ConfigError> {
        let frames = self
            .frames
            .iter()
            .map(|t| {
                Frame::from_tag(t)
                    .ok_or_else(|| ConfigError(format!("frames: unknown frame tag `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if frames.is_empty() {
            return Err(ConfigError("frames must not be empty".into()));
        }
        let parts = match self.parts.as_str() {
            "closed" => PartSource::ClosedForm,
            "computed" => PartSource::Computed,
            other => {
                return Err(ConfigError(format!(
                    "parts: expected `closed` or `computed` (got `{other}`)"
                )))
            }
        };
        let route = match self.route.as_str() {
            "quadrature" => KernelRoute::Quadrature,
            "star" => KernelRoute::Star,
            other => {
                return Err(ConfigError(format!(
                    "route: expected `quadrature` or `star` (got `{other}`)"
                )))
            }
        };
        Ok(Figure1Options {
            frames,
            parts,
            route,
            substeps: self.substeps,
        })
    }
}

/// Parse a comma-separated list of orders such as `0,1,2` or a range `0..=12`.
pub fn parse_orders(text: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = |_| ConfigError(format!("--orders: cannot parse `{text}`"));
    if let Some((a, b)) = text.split_once("..=") {
        let (a, b): (usize, usize) = (
            a.trim().parse().map_err(bad)?,
            b.trim().parse().map_err(bad)?,
        );
        return Ok((a..=b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(bad))
        .collect()
}

/// Create (or truncate) the output file up front so IO problems surface before computing.
pub fn check_writable(path: &Path) -> Result<(), ConfigError> {
    OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .open(path)
        .map(|_| ())
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
}
