use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::terms::TermValues;
use super::wres::Mode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub m: usize,
    pub n: usize,
    pub mbar: usize,
    pub epsilon: f64,
    pub warp: String,
    pub factor_m: String,
    pub factor_n: String,
    /// nodes per coordinate axis
    pub grid_m: usize,
    pub grid_n: usize,
    /// product nodes
    pub nodes: usize,
    pub deriv_mode: String,
    pub mode: Mode,
    pub normalization: String,
    pub trace: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTotals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wres_assembled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wres_closed: Option<f64>,
    pub volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_node_abs_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_node_rel_gap: Option<f64>,
    pub gap_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_tolerance: Option<bool>,
    /// `max |t1|, |t2|, |t5|` over all nodes
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_vanishing_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_imag: Option<f64>,
    /// change of the closed-form total when nodes are doubled
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_shift: Option<f64>,
    pub quadrature_tolerance: f64,
}

/// A total on unit `S¹ × S³` set against the quoted `4π⁴` prefactor. The
/// engine's own closed form gives `2π⁴`; both are reported, neither is
/// adjusted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefactorCheck {
    pub quoted_prefactor: f64,
    /// `engine_total / base_integral`; absent when the base integral vanishes
    pub engine_prefactor: Option<f64>,
    /// `∫_{S¹} (1/ε + 1/f²) dVol`
    pub base_integral: f64,
    pub quoted_total: f64,
    pub engine_total: f64,
    /// `quoted_total / engine_total`
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub x: Vec<f64>,
    pub weight: f64,
    pub s_m: f64,
    pub s_n: f64,
    pub warp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<TermValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assembled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueReport {
    pub metadata: ReportMetadata,
    pub totals: ReportTotals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quoted_prefactor: Option<PrefactorCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeRecord>>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

impl ResidueReport {
    /// Pretty JSON with a trailing newline. Field order is fixed, so equal
    /// reports serialize to equal bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Verify mode with every node inside the gap tolerance; vacuously true
    /// in the other modes.
    pub fn passed(&self) -> bool {
        self.totals.within_tolerance.unwrap_or(true)
    }

    /// Per-node densities as CSV (coordinates as `x1..xd`). Needs a report
    /// built with per-node output.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let nodes = self
            .nodes
            .as_ref()
            .ok_or_else(|| Error::Config("report has no per-node data; enable per-node output".into()))?;
        let d = self.metadata.m + self.metadata.n;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        for h in ["weight", "s_m", "s_n", "warp", "t1", "t2", "t3", "t4", "t5", "t6", "assembled", "closed", "abs_gap", "rel_gap"] {
            header.push(h.into());
        }
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&header).map_err(csv_err)?;
        for r in nodes {
            let mut row: Vec<String> = r.x.iter().map(|v| format!("{v:.17e}")).collect();
            for v in [r.weight, r.s_m, r.s_n, r.warp] {
                row.push(format!("{v:.17e}"));
            }
            let t = r.terms.map(|t| [t.t1, t.t2, t.t3, t.t4, t.t5, t.t6]);
            for k in 0..6 {
                row.push(opt(t.map(|a| a[k])));
            }
            for v in [r.assembled, r.closed, r.abs_gap, r.rel_gap] {
                row.push(opt(v));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable digest.
    pub fn summary(&self) -> String {
        let (md, t) = (&self.metadata, &self.totals);
        let mut s = String::new();
        let _ = writeln!(s, "{} x {}  (m = {}, n = {}, mbar = {})", md.factor_m, md.factor_n, md.m, md.n, md.mbar);
        let _ = writeln!(s, "epsilon = {}, f = {}", md.epsilon, md.warp);
        let _ = writeln!(
            s,
            "mode {}, derivatives {}, {} x {} nodes per axis ({} product nodes)",
            md.mode, md.deriv_mode, md.grid_m, md.grid_n, md.nodes
        );
        let _ = writeln!(s, "volume            {:.12}", t.volume);
        if let Some(v) = t.wres_assembled {
            let _ = writeln!(s, "Wres (assembled)  {v:.12}");
        }
        if let Some(v) = t.wres_closed {
            let _ = writeln!(s, "Wres (closed)     {v:.12}");
        }
        if let (Some(a), Some(r)) = (t.max_node_abs_gap, t.max_node_rel_gap) {
            let _ = writeln!(s, "max node gap      {a:.3e} abs, {r:.3e} rel (tolerance {:.1e})", t.gap_tolerance);
        }
        if let Some(v) = t.max_vanishing_term {
            let _ = writeln!(s, "max |t1|,|t2|,|t5| {v:.3e}");
        }
        if let Some(v) = t.quadrature_shift {
            let _ = writeln!(s, "doubling shift    {v:.3e}");
        }
        if let Some(p) = &self.quoted_prefactor {
            let _ = writeln!(
                s,
                "prefactor         engine {} vs quoted {:.6} (4 pi^4); ratio quoted/engine {}",
                p.engine_prefactor.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into()),
                p.quoted_prefactor,
                p.ratio.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into()),
            );
        }
        if let Some(ok) = t.within_tolerance {
            let _ = writeln!(s, "verify            {}", if ok { "PASS" } else { "FAIL" });
        }
        s
    }
}
