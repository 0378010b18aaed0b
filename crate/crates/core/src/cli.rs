//! Config-driven entry points behind the `wres` binary.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    build_warped_product, christoffel, product_metric, riemann_orthonormal, warped_christoffel_closed_form, Chart,
    MetricField, Point,
};
use crate::moments::{integrate_polynomial_over_sphere, monomial_moment, sphere_area, MultiIndex, Rational, XiPolynomial};
use crate::residue::{quoted_prefactor_check, wres, FactorGrid, QuadratureGrid, ResidueReport};
use crate::symbols::{compose, FullSymbol, LaplaceSymbolField, ParametrixField};

/// Factor metrics with the configured derivative mode.
pub fn factors(cfg: &RunConfig) -> Result<(MetricField, MetricField)> {
    let mode = cfg.deriv_mode()?;
    let build = |chart: &Chart| -> Result<MetricField> {
        Ok(chart.build()?.with_deriv_mode(mode).with_label(chart.to_string()))
    };
    Ok((build(&cfg.factor_m)?, build(&cfg.factor_n)?))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Integrates the configured density and writes the JSON/CSV outputs named
/// in the config.
pub fn run(cfg: &RunConfig) -> Result<ResidueReport> {
    cfg.validate()?;
    let (gm, gn) = factors(cfg)?;
    let warped = cfg.warped()?;
    let grid = QuadratureGrid::new(&gm, &gn, cfg.grid.m, cfg.grid.n)?;
    let mut report = wres(&gm, &gn, &warped, &grid, cfg.mode, &cfg.options()?)?;
    if cfg.is_unit_s1_s3() {
        let total = report.totals.wres_assembled.or(report.totals.wres_closed).expect("some total is computed");
        report.quoted_prefactor = Some(quoted_prefactor_check(&grid, &warped, total)?);
    }
    if let Some(path) = &cfg.output.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(&cfg.resolve(path), &buf)?;
    }
    if !cfg.output.per_node {
        report.nodes = None;
    }
    if let Some(path) = &cfg.output.json {
        write_file(&cfg.resolve(path), report.to_json()?.as_bytes())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    /// worst deviation found
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<44} {:.3e} (tol {:.1e})",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            );
        }
        s
    }

    fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(CheckLine { name: name.into(), value, tolerance, passed: value <= tolerance });
    }
}

/// Sample points: a 3-per-axis rule on each factor.
fn samples(g: &MetricField) -> Result<Vec<Point>> {
    Ok(FactorGrid::new(g, 3)?.points)
}

/// Runs the oracle suite on the configured geometry without integrating.
pub fn check(cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let (gm, gn) = factors(cfg)?;
    let warped = cfg.warped()?;
    let analytic = cfg.deriv_mode()?.is_analytic();
    let (tol_first, tol_second): (f64, f64) = if analytic { (1e-9, 1e-8) } else { (1e-6, 1e-4) };
    let mut out = CheckReport { checks: Vec::new() };
    let (sm, sn) = (samples(&gm)?, samples(&gn)?);

    for (tag, chart, g, pts) in [("M", &cfg.factor_m, &gm, &sm), ("N", &cfg.factor_n, &gn, &sn)] {
        let mut sym = 0.0f64;
        let mut scalar_err = 0.0f64;
        for x in pts {
            let r = riemann_orthonormal(g, x)?;
            sym = sym.max(r.symmetry_violation());
            if let Some(s) = chart.known_scalar_curvature() {
                scalar_err = scalar_err.max((r.scalar() - s).abs());
            }
        }
        out.push(format!("curvature symmetries on {tag} = {chart}"), sym, tol_second);
        if let Some(s) = chart.known_scalar_curvature() {
            out.push(format!("scalar curvature of {tag} equals {s}"), scalar_err, tol_second);
        }
    }

    // warp positivity at the configured quadrature nodes of M
    let grid_m = FactorGrid::new(&gm, cfg.grid.m)?;
    let nonpositive = grid_m.points.iter().filter(|x| warped.warp_value(x.coords()).is_err()).count();
    out.push("nodes of M where the warp is not positive", nonpositive as f64, 0.0);

    let pairs: Vec<Point> = sm.iter().zip(sn.iter().cycle()).map(|(a, b)| a.join(b)).collect();
    let g = build_warped_product(&gm, &gn, &warped)?;
    let mut chr = 0.0f64;
    for x in &pairs {
        chr = chr.max(christoffel(&g, x)?.max_abs_diff(&warped_christoffel_closed_form(&gm, &gn, &warped, x)?));
    }
    out.push("warped Christoffels: closed form vs generic", chr, tol_first.max(1e-8));

    let d = gm.dim() + gn.dim();
    let area = sphere_area(d);
    let mut mom = 0.0f64;
    for k in 1..=2 {
        let v = integrate_polynomial_over_sphere(&XiPolynomial::norm_power(d, k), d)?;
        mom = mom.max((v.re - area).abs() / area);
    }
    let second = monomial_moment(&MultiIndex::unit(d, 0).with_incremented(0, 1), d)?;
    if second != Rational::new(1, d as i64) {
        mom = mom.max(1.0);
    }
    out.push(format!("moment identities on S^{}", d - 1), mom, 1e-14);

    let prod = product_metric(&gm, &gn)?;
    let lap = LaplaceSymbolField::new(prod.clone());
    let par = ParametrixField { base: LaplaceSymbolField::new(prod.clone()) };
    let mut ident = 0.0f64;
    for x in pairs.iter().take(3) {
        let c = compose(&lap, &par, x, -2)?;
        let l = prod.eval(x)?.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
        let canon = c.to_frame(&l)?.canonical()?;
        let one = FullSymbol::constant(Arc::new(DMatrix::identity(d, d)), 1.0);
        ident = ident.max(canon.snap_euclidean()?.max_coeff_diff(&one));
    }
    out.push("Laplacian composed with parametrix is 1", ident, if analytic { 1e-8 } else { 1e-3 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OutputConfig, RunConfig};
    use crate::residue::Mode;

    fn cfg(src: &str) -> RunConfig {
        RunConfig::from_toml_str(src).unwrap()
    }

    const FLAT: &str = r#"
epsilon = 1.0
warp = "1"
[factor_m]
kind = "torus"
dim = 1
[factor_n]
kind = "torus"
dim = 3
[grid]
m = 8
n = 8
"#;

    #[test]
    fn flat_check_passes_with_zero_curvature() {
        let report = check(&cfg(FLAT)).unwrap();
        assert!(report.passed(), "{}", report.summary());
        let scalar: Vec<_> = report.checks.iter().filter(|c| c.name.starts_with("scalar")).collect();
        assert_eq!(scalar.len(), 2);
        assert!(scalar.iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn warped_check_on_curved_factors() {
        let src = r#"
epsilon = 1.0
warp = "2 + sin(x1)"
[factor_m]
kind = "circle"
[factor_n]
kind = "sphere"
dim = 3
[grid]
m = 8
n = 8
"#;
        let report = check(&cfg(src)).unwrap();
        assert!(report.passed(), "{}", report.summary());
    }

    #[test]
    fn run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(FLAT);
        c.mode = Mode::Verify;
        c.output = OutputConfig { json: Some("out/r.json".into()), csv: Some("out/r.csv".into()), per_node: false };
        c.base_dir = Some(dir.path().to_path_buf());
        let report = run(&c).unwrap();
        assert_eq!(report.totals.wres_assembled, Some(0.0));
        assert!(report.nodes.is_none());
        let json = std::fs::read_to_string(dir.path().join("out/r.json")).unwrap();
        assert!(json.contains("\"wres_closed\": 0.0"));
        let csv = std::fs::read_to_string(dir.path().join("out/r.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 8 * 8 * 8 * 8);
    }
}
