//! Integrated diffusion A(u) = ∫₀ᵘ a(s) ds with a ≥ 0.
//!
//! A is piecewise linear, given by breakpoints (uᵢ, Aᵢ) and a trailing
//! slope beyond the last breakpoint. The density a is the segment slope,
//! taken right-continuous at breakpoints. Intervals where a vanishes make
//! the equation hyperbolic there and admit discontinuous solutions.

use crate::error::{Result, SolverError};

#[derive(Debug, Clone)]
pub struct DiffusionModel {
    /// (u, A(u)) pairs; first is (0, 0), u strictly increasing.
    breakpoints: Vec<(f64, f64)>,
    /// Slope of segment [uᵢ, uᵢ₊₁); one fewer than breakpoints.
    slopes: Vec<f64>,
    /// Slope beyond the last breakpoint.
    final_slope: f64,
    a_max: f64,
    /// Maximal u-intervals with a ≡ 0; a trailing flat tail is recorded
    /// with an infinite right end.
    flat: Vec<(f64, f64)>,
}

impl DiffusionModel {
    pub fn new(breakpoints: Vec<(f64, f64)>, final_slope: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(SolverError::Config(
                "diffusion needs at least the breakpoint (0, 0)".into(),
            ));
        }
        if breakpoints[0] != (0.0, 0.0) {
            return Err(SolverError::Config(format!(
                "first diffusion breakpoint must be (0, 0), got {:?}",
                breakpoints[0]
            )));
        }
        if !(final_slope >= 0.0) {
            return Err(SolverError::Config(format!(
                "diffusion density must be nonnegative; trailing slope is {final_slope}"
            )));
        }
        let mut slopes = Vec::with_capacity(breakpoints.len().saturating_sub(1));
        for w in breakpoints.windows(2) {
            let (u0, a0) = w[0];
            let (u1, a1) = w[1];
            if !(u1 > u0) {
                return Err(SolverError::Config(
                    "diffusion breakpoints must have strictly increasing u".into(),
                ));
            }
            let s = (a1 - a0) / (u1 - u0);
            if !(s >= 0.0) {
                return Err(SolverError::Config(format!(
                    "integrated diffusion must be nondecreasing; slope {s} on [{u0}, {u1}]"
                )));
            }
            slopes.push(s);
        }

        let a_max = slopes.iter().copied().fold(final_slope, f64::max);

        let mut flat: Vec<(f64, f64)> = Vec::new();
        let mut push = |lo: f64, hi: f64| match flat.last_mut() {
            Some(last) if last.1 == lo => last.1 = hi,
            _ => flat.push((lo, hi)),
        };
        for (i, &s) in slopes.iter().enumerate() {
            if s == 0.0 {
                push(breakpoints[i].0, breakpoints[i + 1].0);
            }
        }
        if final_slope == 0.0 {
            push(breakpoints[breakpoints.len() - 1].0, f64::INFINITY);
        }

        Ok(DiffusionModel {
            breakpoints,
            slopes,
            final_slope,
            a_max,
            flat,
        })
    }

    /// A ≡ 0: purely hyperbolic transport. Valid as scheme input, but not
    /// as a full problem definition (A must grow without bound there).
    pub fn zero() -> Self {
        DiffusionModel::new(vec![(0.0, 0.0)], 0.0).unwrap()
    }

    /// A(u). Negative arguments (round-off) clamp to A(0) = 0.
    pub fn integrated(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let last = self.breakpoints.len() - 1;
        let (u_last, a_last) = self.breakpoints[last];
        if u >= u_last {
            return a_last + self.final_slope * (u - u_last);
        }
        let mut i = 0;
        while i + 1 < last && u >= self.breakpoints[i + 1].0 {
            i += 1;
        }
        let (ui, ai) = self.breakpoints[i];
        ai + self.slopes[i] * (u - ui)
    }

    /// a(u) = A'(u), right-continuous at breakpoints.
    pub fn density(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        let last = self.breakpoints.len() - 1;
        if u >= self.breakpoints[last].0 {
            return self.final_slope;
        }
        let mut i = 0;
        while i + 1 < last && u >= self.breakpoints[i + 1].0 {
            i += 1;
        }
        self.slopes[i]
    }

    /// Supremum of a over the admissible u-range; enters the step-size bound.
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// Maximal u-intervals where a ≡ 0.
    pub fn flat_intervals(&self) -> &[(f64, f64)] {
        &self.flat
    }

    /// True when A(u) → ∞ as u → ∞.
    pub fn is_unbounded(&self) -> bool {
        self.final_slope > 0.0
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn final_slope(&self) -> f64 {
        self.final_slope
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_diffusion() -> DiffusionModel {
        // A = 0 up to u = 10, then slope 0.1.
        DiffusionModel::new(vec![(0.0, 0.0), (10.0, 0.0)], 0.1).unwrap()
    }

    #[test]
    fn threshold_values() {
        let d = threshold_diffusion();
        assert_eq!(d.integrated(5.0), 0.0);
        assert_eq!(d.integrated(10.0), 0.0);
        assert!((d.integrated(12.0) - 0.2).abs() < 1e-15);
        assert_eq!(d.density(5.0), 0.0);
        assert_eq!(d.density(10.0), 0.1); // right slope at the breakpoint
        assert_eq!(d.a_max(), 0.1);
        assert_eq!(d.flat_intervals(), &[(0.0, 10.0)]);
        assert!(d.is_unbounded());
    }

    #[test]
    fn interior_plateau() {
        // A rises to 0.25 at u = 5, flat to u = 10, then slope 0.05.
        let d = DiffusionModel::new(vec![(0.0, 0.0), (5.0, 0.25), (10.0, 0.25)], 0.05).unwrap();
        assert!((d.integrated(2.0) - 0.1).abs() < 1e-15);
        assert_eq!(d.integrated(7.0), 0.25);
        assert!((d.integrated(11.0) - 0.3).abs() < 1e-15);
        assert_eq!(d.flat_intervals(), &[(5.0, 10.0)]);
        assert_eq!(d.density(5.0), 0.0);
        assert_eq!(d.density(10.0), 0.05);
    }

    #[test]
    fn negative_round_off_clamps() {
        let d = threshold_diffusion();
        assert_eq!(d.integrated(-1e-17), 0.0);
        assert_eq!(d.density(-1e-17), 0.0);
    }

    #[test]
    fn decreasing_breakpoints_rejected() {
        assert!(DiffusionModel::new(vec![(0.0, 0.0), (5.0, 0.3), (10.0, 0.2)], 0.1).is_err());
        assert!(DiffusionModel::new(vec![(0.0, 0.0), (0.0, 0.1)], 0.1).is_err());
        assert!(DiffusionModel::new(vec![(0.0, 0.1)], 0.1).is_err());
    }

    #[test]
    fn zero_diffusion_is_flat_everywhere() {
        let d = DiffusionModel::zero();
        assert_eq!(d.integrated(100.0), 0.0);
        assert_eq!(d.a_max(), 0.0);
        assert!(!d.is_unbounded());
        assert_eq!(d.flat_intervals(), &[(0.0, f64::INFINITY)]);
    }
}
