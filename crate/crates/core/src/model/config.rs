//! Problem definitions from a structured text file (TOML).
//!
//! ```toml
//! name = "custom"
//!
//! [flux]
//! kind = "quadratic"   # or "cosine", "piecewise"
//! k = 1.0
//! shift = -1.0
//!
//! [diffusion]
//! breakpoints = [[0.0, 0.0], [10.0, 0.0]]
//! final_slope = 0.1
//!
//! [[initial.pieces]]
//! left = 0.1
//! right = 0.2
//! value = 5.0
//! ```
//!
//! A piecewise flux lists its pieces and MUST declare the critical points:
//!
//! ```toml
//! [flux]
//! kind = "piecewise"
//! critical_points = [{ v = 1.0, kind = "max" }]
//! pieces = [
//!     { from = 0.0, expr = { form = "power", coeff = -1.0, center = 1.0, exponent = 8, offset = 0.0 } },
//!     { from = 1.0, expr = { form = "power", coeff = -1.0, center = 1.0, exponent = 2, offset = 0.0 } },
//! ]
//! ```

use std::path::Path;

use serde::Deserialize;

use super::diffusion::DiffusionModel;
use super::flux::FluxForm;
use super::initial::{InitialDatum, Piece};
use super::ProblemSpec;
use crate::error::{Result, SolverError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: Option<String>,
    flux: FluxForm,
    diffusion: DiffusionFile,
    initial: InitialFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffusionFile {
    breakpoints: Vec<(f64, f64)>,
    #[serde(default)]
    final_slope: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialFile {
    pieces: Vec<Piece>,
}

impl ProblemSpec {
    /// Parses a problem definition from TOML text.
    pub fn from_toml_str(text: &str) -> Result<ProblemSpec> {
        let file: ProblemFile = toml::from_str(text)
            .map_err(|e| SolverError::Config(format!("problem file: {e}")))?;
        let diffusion = DiffusionModel::new(file.diffusion.breakpoints, file.diffusion.final_slope)?;
        let initial = InitialDatum::new(file.initial.pieces)?;
        let spec = ProblemSpec::new(
            file.name.as_deref().unwrap_or("custom"),
            file.flux,
            diffusion,
            initial,
        )?;
        spec.require_unbounded_diffusion()?;
        Ok(spec)
    }

    /// Loads a problem definition from a TOML file.
    pub fn from_toml_path(path: &Path) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(path)?;
        ProblemSpec::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_round_trip() {
        let text = r#"
            name = "like-ex1"
            [flux]
            kind = "quadratic"
            k = 1.0
            shift = -1.0
            [diffusion]
            breakpoints = [[0.0, 0.0], [10.0, 0.0]]
            final_slope = 0.1
            [[initial.pieces]]
            left = 0.1
            right = 0.2
            value = 5.0
            [[initial.pieces]]
            left = 0.6
            right = 0.7
            value = 8.0
            [[initial.pieces]]
            left = 0.8
            right = 0.9
            value = 7.0
        "#;
        let p = ProblemSpec::from_toml_str(text).unwrap();
        assert_eq!(p.name, "like-ex1");
        assert!((p.initial.total_mass() - 2.0).abs() < 1e-15);
        assert!((p.flux.phi(1.0) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_flux_with_declared_critical_points() {
        let text = r#"
            [flux]
            kind = "piecewise"
            critical_points = [{ v = 1.0, kind = "max" }]
            pieces = [
                { from = 0.0, expr = { form = "power", coeff = -1.0, center = 1.0, exponent = 8, offset = 0.0 } },
                { from = 1.0, expr = { form = "power", coeff = -1.0, center = 1.0, exponent = 2, offset = 0.0 } },
            ]
            [diffusion]
            breakpoints = [[0.0, 0.0], [10.0, 0.0]]
            final_slope = 0.1
            [[initial.pieces]]
            left = 0.0
            right = 1.0
            value = 2.0
        "#;
        let p = ProblemSpec::from_toml_str(text).unwrap();
        assert!(p.flux.has_single_maximum());
    }

    #[test]
    fn bounded_diffusion_rejected() {
        let text = r#"
            [flux]
            kind = "quadratic"
            k = 1.0
            shift = 0.0
            [diffusion]
            breakpoints = [[0.0, 0.0], [10.0, 1.0]]
            final_slope = 0.0
            [[initial.pieces]]
            left = 0.0
            right = 1.0
            value = 1.0
        "#;
        let err = ProblemSpec::from_toml_str(text).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));
    }

    #[test]
    fn malformed_toml_is_config_error() {
        assert!(matches!(
            ProblemSpec::from_toml_str("flux = 3"),
            Err(SolverError::Config(_))
        ));
    }
}
