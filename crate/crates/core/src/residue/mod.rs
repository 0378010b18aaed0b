//! Residue density of the warped Laplacian against powers of the product
//! Laplacian, its closed form in the factor scalar curvatures, and the
//! integrated residue.
//!
//! Normalization: `Wres(P) = ∫_M ∫_{|ξ|=1} σ_{−dim}(P)`, with no
//! `(2π)^{−dim}` factor and the identity as fiber trace.

mod quadrature;
mod report;
mod terms;
mod wres;

pub use quadrature::{axis_rule, FactorGrid, QuadratureGrid, DEFAULT_NODES};
pub use report::{NodeRecord, PrefactorCheck, ReportMetadata, ReportTotals, ResidueReport};
pub use terms::{
    assembled_density, closed_form_density, density_terms, point_density, PointDensity, SixTerms, TermValues, IMAG_TOL,
    QUOTED_S1_S3_PREFACTOR,
};
pub use wres::{bimetric_eh, closed_total, quoted_prefactor_check, wres, Mode, WresOptions};
