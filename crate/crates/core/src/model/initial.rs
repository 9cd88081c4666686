//! Piecewise-constant, compactly supported initial densities.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// One constant block of the initial density: `value` on [left, right).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Piece {
    pub left: f64,
    pub right: f64,
    pub value: f64,
}

/// The initial density u₀ as a list of disjoint constant pieces.
#[derive(Debug, Clone)]
pub struct InitialDatum {
    pieces: Vec<Piece>,
    support: (f64, f64),
    total_mass: f64,
}

impl InitialDatum {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(SolverError::Config("initial datum has no pieces".into()));
        }
        for p in &pieces {
            if !(p.left < p.right) || !p.left.is_finite() || !p.right.is_finite() {
                return Err(SolverError::Config(format!(
                    "initial piece [{}, {}) is not a proper bounded interval",
                    p.left, p.right
                )));
            }
            if !(p.value >= 0.0) {
                return Err(SolverError::Config(format!(
                    "initial density must be nonnegative, got {}",
                    p.value
                )));
            }
        }
        pieces.sort_by(|a, b| a.left.total_cmp(&b.left));
        for w in pieces.windows(2) {
            if w[0].right > w[1].left {
                return Err(SolverError::Config(format!(
                    "initial pieces [{}, {}) and [{}, {}) overlap",
                    w[0].left, w[0].right, w[1].left, w[1].right
                )));
            }
        }
        let support = (pieces[0].left, pieces[pieces.len() - 1].right);
        let total_mass: f64 = pieces.iter().map(|p| p.value * (p.right - p.left)).sum();
        if !(total_mass > 0.0) {
            return Err(SolverError::Config(
                "initial datum must carry positive total mass".into(),
            ));
        }
        Ok(InitialDatum {
            pieces,
            support,
            total_mass,
        })
    }

    /// u₀(x).
    pub fn eval(&self, x: f64) -> f64 {
        for p in &self.pieces {
            if x >= p.left && x < p.right {
                return p.value;
            }
        }
        0.0
    }

    /// Exact mean of u₀ over [a, b] by interval-overlap arithmetic.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b > a);
        let mut integral = 0.0;
        for p in &self.pieces {
            let lo = p.left.max(a);
            let hi = p.right.min(b);
            if hi > lo {
                integral += p.value * (hi - lo);
            }
        }
        integral / (b - a)
    }

    /// Hull of the support.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// C₀ = ∫ u₀.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn piece(left: f64, right: f64, value: f64) -> Piece {
        Piece { left, right, value }
    }

    #[test]
    fn mass_and_support() {
        let d = InitialDatum::new(vec![
            piece(0.6, 0.7, 8.0),
            piece(0.1, 0.2, 5.0),
            piece(0.8, 0.9, 7.0),
        ])
        .unwrap();
        assert!((d.total_mass() - 2.0).abs() < 1e-15);
        assert_eq!(d.support(), (0.1, 0.9));
        assert_eq!(d.eval(0.15), 5.0);
        assert_eq!(d.eval(0.5), 0.0);
    }

    #[test]
    fn cell_average_partial_overlap() {
        let d = InitialDatum::new(vec![piece(0.1, 0.2, 5.0)]).unwrap();
        // Cell [0.15, 0.3): overlap 0.05 of value 5 over width 0.15.
        let avg = d.cell_average(0.15, 0.3);
        assert!((avg - 5.0 / 3.0).abs() < 1e-13);
        assert_eq!(d.cell_average(0.4, 0.5), 0.0);
    }

    #[test]
    fn overlap_and_sign_rejected() {
        assert!(InitialDatum::new(vec![piece(0.0, 0.5, 1.0), piece(0.4, 0.6, 1.0)]).is_err());
        assert!(InitialDatum::new(vec![piece(0.0, 0.5, -1.0)]).is_err());
        assert!(InitialDatum::new(vec![piece(0.5, 0.5, 1.0)]).is_err());
        assert!(InitialDatum::new(vec![piece(0.0, 1.0, 0.0)]).is_err());
    }
}
