//! Continuous problem data: flux potential Φ with its splitting Φ±,
//! integrated diffusion A with density a, and the initial density u₀.
//!
//! All model objects are immutable after construction and safe to share
//! across threads.

mod config;
mod diffusion;
mod flux;
mod initial;
mod presets;

pub use diffusion::DiffusionModel;
pub use flux::{guarded_recip, CriticalPoint, Extremum, FluxExpr, FluxForm, FluxModel, FluxPiece};
pub use initial::{InitialDatum, Piece};
pub use presets::{preset, Preset};

use crate::error::{Result, SolverError};

/// A complete problem: (Φ, A, u₀) plus a label.
///
/// The flux is evaluated on [0, C₀] where C₀ is the total initial mass, so
/// the model can only be assembled once the datum is known.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub flux: FluxModel,
    pub diffusion: DiffusionModel,
    pub initial: InitialDatum,
}

impl ProblemSpec {
    /// Assembles a problem. Bounded integrated diffusion is accepted here
    /// so purely hyperbolic states can be built in-process; definitions
    /// loaded from files additionally require A(u) → ∞ (see
    /// [`ProblemSpec::require_unbounded_diffusion`]).
    pub fn new(
        name: &str,
        flux_form: FluxForm,
        diffusion: DiffusionModel,
        initial: InitialDatum,
    ) -> Result<ProblemSpec> {
        let flux = FluxModel::new(flux_form, initial.total_mass())?;
        Ok(ProblemSpec {
            name: name.to_string(),
            flux,
            diffusion,
            initial,
        })
    }

    /// Total initial mass C₀.
    pub fn total_mass(&self) -> f64 {
        self.initial.total_mass()
    }

    /// Saturating (bounded) diffusion is out of scope for full problem
    /// definitions; gradients of the primitive may blow up under it.
    pub fn require_unbounded_diffusion(&self) -> Result<()> {
        if self.diffusion.is_unbounded() {
            Ok(())
        } else {
            Err(SolverError::Config(
                "integrated diffusion must grow without bound (positive trailing slope)".into(),
            ))
        }
    }
}
