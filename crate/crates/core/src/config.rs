//! Run configuration, read from TOML.
//!
//! ```toml
//! epsilon = 2.0
//! warp = "3"
//! mode = "verify"
//!
//! [factor_m]
//! kind = "circle"
//!
//! [factor_n]
//! kind = "sphere"
//! dim = 3
//!
//! [grid]
//! m = 16
//! n = 12
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Chart, DerivMode, WarpedConfig};
use crate::residue::{Mode, WresOptions, DEFAULT_NODES};

/// Smallest accepted node count per axis.
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// nodes per coordinate axis of M
    #[serde(default = "default_nodes")]
    pub m: usize,
    /// nodes per coordinate axis of N
    #[serde(default = "default_nodes")]
    pub n: usize,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { m: DEFAULT_NODES, n: DEFAULT_NODES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivKind {
    Analytic,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivConfig {
    pub mode: DerivKind,
    /// first-derivative step; second derivatives use ten times this
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Default for DerivConfig {
    fn default() -> Self {
        DerivConfig { mode: DerivKind::Analytic, step: None }
    }
}

impl DerivConfig {
    pub fn to_mode(&self) -> Result<DerivMode> {
        match (self.mode, self.step) {
            (DerivKind::Analytic, _) => Ok(DerivMode::Analytic),
            (DerivKind::Fd, None) => Ok(DerivMode::DEFAULT_FD),
            (DerivKind::Fd, Some(h)) => DerivMode::finite_difference(h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// per-node relative gap in verify mode; defaults by derivative mode
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// relative shift of the total under node doubling
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub per_node: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub factor_m: Chart,
    pub factor_n: Chart,
    #[serde(default = "unit")]
    pub epsilon: f64,
    /// expression in the M coordinates `x1..xm`
    #[serde(default = "unit_warp")]
    pub warp: String,
    #[serde(default = "verify")]
    pub mode: Mode,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivatives: DerivConfig,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// directory that relative output paths resolve against
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn unit() -> f64 {
    1.0
}

fn unit_warp() -> String {
    "1".into()
}

fn verify() -> Mode {
    Mode::Verify
}

/// Command-line overrides of config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub json: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub grid: Option<(usize, usize)>,
    pub fd_step: Option<f64>,
}

impl RunConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; relative output paths resolve
    /// against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&src)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.factor_m.dim(), self.factor_n.dim());
        if m == 0 || n == 0 {
            return Err(Error::Config("factor dimensions must be positive".into()));
        }
        if (m + n) % 2 == 1 {
            return Err(Error::Config(format!("m + n = {} must be even", m + n)));
        }
        if self.epsilon == 0.0 || !self.epsilon.is_finite() {
            return Err(Error::Config("epsilon must be finite and nonzero".into()));
        }
        if self.grid.m < MIN_NODES || self.grid.n < MIN_NODES {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_NODES} nodes per axis, got m = {}, n = {}",
                self.grid.m, self.grid.n
            )));
        }
        for (name, v) in [("tolerance.gap", self.tolerance.gap), ("tolerance.quadrature", self.tolerance.quadrature)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        self.derivatives.to_mode()?;
        self.warped()?;
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(p) = &o.json {
            self.output.json = Some(p.clone());
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some((m, n)) = o.grid {
            self.grid = GridConfig { m, n };
        }
        if let Some(h) = o.fd_step {
            self.derivatives = DerivConfig { mode: DerivKind::Fd, step: Some(h) };
        }
        self.validate()
    }

    pub fn deriv_mode(&self) -> Result<DerivMode> {
        self.derivatives.to_mode()
    }

    pub fn warped(&self) -> Result<WarpedConfig> {
        WarpedConfig::parse(self.epsilon, &self.warp, self.factor_m.dim(), self.factor_n.dim())
    }

    pub fn options(&self) -> Result<WresOptions> {
        let mut o = WresOptions::for_deriv_mode(self.deriv_mode()?);
        if let Some(g) = self.tolerance.gap {
            o.gap_tolerance = g;
        }
        if let Some(q) = self.tolerance.quadrature {
            o.quadrature_tolerance = q;
        }
        o.per_node = self.output.per_node || self.output.csv.is_some();
        Ok(o)
    }

    /// `path` against the config directory when relative.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Unit circle times unit 3-sphere, where the quoted prefactor applies.
    pub fn is_unit_s1_s3(&self) -> bool {
        matches!(self.factor_m, Chart::Circle { radius } if radius == 1.0)
            && matches!(self.factor_n, Chart::Sphere { dim: 3, radius } if radius == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RW: &str = r#"
epsilon = 2.0
warp = "3"
mode = "verify"

[factor_m]
kind = "circle"

[factor_n]
kind = "sphere"
dim = 3

[grid]
m = 8
n = 10
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml_str(RW).unwrap();
        assert_eq!(cfg.factor_m, Chart::Circle { radius: 1.0 });
        assert_eq!(cfg.factor_n, Chart::Sphere { dim: 3, radius: 1.0 });
        assert_eq!(cfg.grid, GridConfig { m: 8, n: 10 });
        assert_eq!(cfg.derivatives.to_mode().unwrap(), DerivMode::Analytic);
        assert!(cfg.is_unit_s1_s3());
        let again = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn validation_errors() {
        let odd = RW.replace("dim = 3", "dim = 2");
        assert!(matches!(RunConfig::from_toml_str(&odd), Err(Error::Config(_))));
        let zero = RW.replace("epsilon = 2.0", "epsilon = 0.0");
        assert!(RunConfig::from_toml_str(&zero).is_err());
        let coarse = RW.replace("m = 8", "m = 4");
        assert!(RunConfig::from_toml_str(&coarse).is_err());
        let unknown = format!("{RW}\n[extra]\nx = 1\n");
        assert!(RunConfig::from_toml_str(&unknown).is_err());
        let bad_warp = RW.replace("warp = \"3\"", "warp = \"3 +\"");
        assert!(matches!(RunConfig::from_toml_str(&bad_warp), Err(Error::Expr(_))));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::from_toml_str(RW).unwrap();
        cfg.apply(&Overrides { mode: Some(Mode::Closed), grid: Some((12, 14)), fd_step: Some(1e-5), ..Default::default() })
            .unwrap();
        assert_eq!(cfg.mode, Mode::Closed);
        assert_eq!(cfg.grid, GridConfig { m: 12, n: 14 });
        assert_eq!(cfg.deriv_mode().unwrap(), DerivMode::FiniteDifference { first: 1e-5, second: 1e-4 });
        assert_eq!(cfg.options().unwrap().gap_tolerance, WresOptions::FD_GAP);
        assert!(cfg.apply(&Overrides { grid: Some((2, 8)), ..Default::default() }).is_err());
    }
}
