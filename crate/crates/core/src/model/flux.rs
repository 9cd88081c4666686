//! Convective flux potential Φ and its monotone splitting.
//!
//! The convective part of the equation enters through a smooth potential
//! Φ(v) evaluated on v ∈ [0, C₀]. The upwind flux needs the increasing and
//! decreasing parts
//!
//!   Φ₊(v) = ∫₀ᵛ max{0, Φ'(s)} ds,   Φ₋(v) = ∫₀ᵛ min{0, Φ'(s)} ds,
//!
//! which satisfy Φ₊(v) + Φ₋(v) = Φ(v) − Φ(0). Both are evaluated exactly,
//! piece by piece, from the declared critical points of Φ: on a segment
//! where Φ' keeps one sign the integral telescopes to a difference of Φ
//! values. Numeric quadrature is used only as an independent oracle in the
//! test suite.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Kind of a stationary point of Φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

/// A zero of Φ' inside the evaluation range, tagged max/min.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub v: f64,
    pub kind: Extremum,
}

/// Closed-form building block for piecewise flux potentials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum FluxExpr {
    /// coeff · (v − center)^exponent + offset
    Power {
        coeff: f64,
        center: f64,
        exponent: i32,
        offset: f64,
    },
    /// coeff · cos(frequency · π · v) + offset
    Cos {
        coeff: f64,
        frequency: f64,
        offset: f64,
    },
}

impl FluxExpr {
    fn eval(&self, v: f64) -> f64 {
        match *self {
            FluxExpr::Power {
                coeff,
                center,
                exponent,
                offset,
            } => coeff * (v - center).powi(exponent) + offset,
            FluxExpr::Cos {
                coeff,
                frequency,
                offset,
            } => coeff * (frequency * std::f64::consts::PI * v).cos() + offset,
        }
    }

    fn derivative(&self, v: f64) -> f64 {
        match *self {
            FluxExpr::Power {
                coeff, center, exponent, ..
            } => {
                if exponent == 0 {
                    0.0
                } else {
                    coeff * f64::from(exponent) * (v - center).powi(exponent - 1)
                }
            }
            FluxExpr::Cos {
                coeff, frequency, ..
            } => {
                let w = frequency * std::f64::consts::PI;
                -coeff * w * (w * v).sin()
            }
        }
    }
}

/// One piece of a piecewise potential, valid from `from` up to the next
/// piece's `from` (the last piece extends to +∞).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxPiece {
    pub from: f64,
    pub expr: FluxExpr,
}

/// Declarative description of the flux potential; the numeric value of the
/// total mass C₀ is supplied separately when the model is built.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FluxForm {
    /// Φ(v) = −k · v · (v − C₀) + shift, the mass-seeking drift with a
    /// single maximum at C₀/2.
    Quadratic { k: f64, shift: f64 },
    /// Φ(v) = −amplitude · (cos(frequency · π · v) + 1), several extrema.
    Cosine { amplitude: f64, frequency: f64 },
    /// Explicit pieces; critical points MUST be declared, the model never
    /// root-finds Φ'.
    Piecewise {
        pieces: Vec<FluxPiece>,
        critical_points: Vec<CriticalPoint>,
    },
}

/// A maximal subinterval of [0, C₀] on which Φ' keeps one sign.
#[derive(Debug, Clone, Copy)]
struct Segment {
    hi: f64,
    /// +1 where Φ' ≥ 0, −1 where Φ' ≤ 0, 0 where Φ' ≡ 0.
    sign: i8,
    phi_lo: f64,
    /// Φ₊(lo) accumulated over the segments to the left.
    cum_plus: f64,
    /// Φ₋(lo) accumulated over the segments to the left.
    cum_minus: f64,
}

/// Validated flux potential on v ∈ [0, C₀] with exact splitting data.
#[derive(Debug, Clone)]
pub struct FluxModel {
    form: FluxForm,
    v_max: f64,
    critical_points: Vec<CriticalPoint>,
    segments: Vec<Segment>,
    phi_zero: f64,
}

/// Guarded reciprocal: 1/s for s ≠ 0, zero otherwise.
pub fn guarded_recip(s: f64) -> f64 {
    if s != 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

const SIGN_SAMPLES_PER_SEGMENT: usize = 33;
const CONSISTENCY_SAMPLES: usize = 1009;
const MAX_SLOPE_SAMPLES: usize = 10_000;

impl FluxModel {
    /// Builds and validates a flux model for the range [0, `v_max`].
    ///
    /// Validation checks that the declared critical points account for every
    /// sign change of Φ' (sampled between consecutive points) and that Φ and
    /// Φ' are mutually consistent under finite differences.
    pub fn new(form: FluxForm, v_max: f64) -> Result<Self> {
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(SolverError::Config(format!(
                "flux range upper end must be positive and finite, got {v_max}"
            )));
        }
        match &form {
            FluxForm::Quadratic { k, .. } => {
                if !(*k > 0.0) {
                    return Err(SolverError::Config(format!(
                        "quadratic flux needs k > 0, got {k}"
                    )));
                }
            }
            FluxForm::Cosine {
                amplitude,
                frequency,
            } => {
                if !(*amplitude > 0.0) || !(*frequency > 0.0) {
                    return Err(SolverError::Config(format!(
                        "cosine flux needs positive amplitude and frequency, got {amplitude}, {frequency}"
                    )));
                }
            }
            FluxForm::Piecewise { pieces, .. } => {
                if pieces.is_empty() {
                    return Err(SolverError::Config("piecewise flux has no pieces".into()));
                }
                if pieces[0].from > 0.0 {
                    return Err(SolverError::Config(
                        "first flux piece must start at or below v = 0".into(),
                    ));
                }
                if pieces.windows(2).any(|w| w[0].from >= w[1].from) {
                    return Err(SolverError::Config(
                        "flux pieces must have strictly increasing `from` values".into(),
                    ));
                }
            }
        }

        let critical_points = Self::derive_critical_points(&form, v_max);
        let mut model = FluxModel {
            phi_zero: 0.0,
            segments: Vec::new(),
            critical_points,
            v_max,
            form,
        };
        model.phi_zero = model.phi(0.0);
        model.segments = model.build_segments()?;
        model.check_consistency()?;
        Ok(model)
    }

    fn derive_critical_points(form: &FluxForm, v_max: f64) -> Vec<CriticalPoint> {
        match form {
            FluxForm::Quadratic { .. } => vec![CriticalPoint {
                v: 0.5 * v_max,
                kind: Extremum::Max,
            }],
            FluxForm::Cosine { frequency, .. } => {
                // Φ' ∝ sin(fπv): zeros at v = n/f, maxima at odd n.
                let mut pts = Vec::new();
                let mut n = 0u32;
                loop {
                    let v = f64::from(n) / frequency;
                    if v > v_max * (1.0 + 1e-12) {
                        break;
                    }
                    pts.push(CriticalPoint {
                        v: v.min(v_max),
                        kind: if n % 2 == 1 {
                            Extremum::Max
                        } else {
                            Extremum::Min
                        },
                    });
                    n += 1;
                }
                pts
            }
            FluxForm::Piecewise {
                critical_points, ..
            } => {
                let mut pts: Vec<CriticalPoint> = critical_points
                    .iter()
                    .copied()
                    .filter(|p| p.v >= 0.0 && p.v <= v_max)
                    .collect();
                pts.sort_by(|a, b| a.v.total_cmp(&b.v));
                pts
            }
        }
    }

    fn build_segments(&self) -> Result<Vec<Segment>> {
        let mut bounds = vec![0.0];
        for p in &self.critical_points {
            if p.v > 0.0 && p.v < self.v_max {
                bounds.push(p.v);
            }
        }
        bounds.push(self.v_max);
        bounds.dedup();

        let mut segments = Vec::with_capacity(bounds.len() - 1);
        let mut cum_plus = 0.0;
        let mut cum_minus = 0.0;
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let sign = self.segment_sign(lo, hi)?;
            let phi_lo = self.phi(lo);
            segments.push(Segment {
                hi,
                sign,
                phi_lo,
                cum_plus,
                cum_minus,
            });
            let increment = self.phi(hi) - phi_lo;
            match sign {
                1 => cum_plus += increment,
                -1 => cum_minus += increment,
                _ => {}
            }
        }
        Ok(segments)
    }

    /// Samples Φ' strictly inside (lo, hi) and insists on one sign.
    fn segment_sign(&self, lo: f64, hi: f64) -> Result<i8> {
        let mut seen_pos = false;
        let mut seen_neg = false;
        for i in 0..SIGN_SAMPLES_PER_SEGMENT {
            let frac = (i as f64 + 1.0) / (SIGN_SAMPLES_PER_SEGMENT as f64 + 1.0);
            let d = self.phi_prime(lo + frac * (hi - lo));
            if d > 0.0 {
                seen_pos = true;
            } else if d < 0.0 {
                seen_neg = true;
            }
        }
        if seen_pos && seen_neg {
            return Err(SolverError::Config(format!(
                "flux derivative changes sign inside ({lo}, {hi}); declare the missing critical point"
            )));
        }
        Ok(if seen_pos {
            1
        } else if seen_neg {
            -1
        } else {
            0
        })
    }

    /// Central-difference consistency of Φ against Φ' at sampled points.
    fn check_consistency(&self) -> Result<()> {
        for i in 0..CONSISTENCY_SAMPLES {
            let v = (i as f64 + 0.5) / CONSISTENCY_SAMPLES as f64 * self.v_max;
            let h = 1e-7 * v.abs().max(1.0);
            let fd = (self.phi(v + h) - self.phi(v - h)) / (2.0 * h);
            let exact = self.phi_prime(v);
            if (fd - exact).abs() > 1e-6 * (1.0 + exact.abs()) {
                return Err(SolverError::Config(format!(
                    "flux potential and its declared derivative disagree at v = {v}: \
                     finite difference {fd}, declared {exact}"
                )));
            }
        }
        Ok(())
    }

    /// Φ(v).
    pub fn phi(&self, v: f64) -> f64 {
        match &self.form {
            FluxForm::Quadratic { k, shift } => -k * v * (v - self.v_max) + shift,
            FluxForm::Cosine {
                amplitude,
                frequency,
            } => -amplitude * ((frequency * std::f64::consts::PI * v).cos() + 1.0),
            FluxForm::Piecewise { pieces, .. } => pieces[Self::piece_index(pieces, v)].expr.eval(v),
        }
    }

    /// Φ'(v), the convective velocity.
    pub fn phi_prime(&self, v: f64) -> f64 {
        match &self.form {
            FluxForm::Quadratic { k, .. } => -k * (2.0 * v - self.v_max),
            FluxForm::Cosine {
                amplitude,
                frequency,
            } => {
                let w = frequency * std::f64::consts::PI;
                amplitude * w * (w * v).sin()
            }
            FluxForm::Piecewise { pieces, .. } => {
                pieces[Self::piece_index(pieces, v)].expr.derivative(v)
            }
        }
    }

    fn piece_index(pieces: &[FluxPiece], v: f64) -> usize {
        let mut idx = 0;
        for (i, p) in pieces.iter().enumerate().skip(1) {
            if v >= p.from {
                idx = i;
            } else {
                break;
            }
        }
        idx
    }

    /// Φ(0), cached for the upwind flux.
    pub fn phi_zero(&self) -> f64 {
        self.phi_zero
    }

    /// Both splitting parts at once; one segment lookup and one Φ evaluation.
    ///
    /// Arguments outside [0, C₀] are clamped to the range endpoints, which
    /// keeps round-off excursions of the marched solution harmless.
    pub fn split(&self, v: f64) -> (f64, f64) {
        let v = v.clamp(0.0, self.v_max);
        let mut seg = self.segments[self.segments.len() - 1];
        for s in &self.segments {
            if v <= s.hi {
                seg = *s;
                break;
            }
        }
        match seg.sign {
            1 => (seg.cum_plus + (self.phi(v) - seg.phi_lo), seg.cum_minus),
            -1 => (seg.cum_plus, seg.cum_minus + (self.phi(v) - seg.phi_lo)),
            _ => (seg.cum_plus, seg.cum_minus),
        }
    }

    /// Φ₊(v) = ∫₀ᵛ max{0, Φ'} ds.
    pub fn phi_plus(&self, v: f64) -> f64 {
        self.split(v).0
    }

    /// Φ₋(v) = ∫₀ᵛ min{0, Φ'} ds.
    pub fn phi_minus(&self, v: f64) -> f64 {
        self.split(v).1
    }

    /// Mean of max{0, Φ'} over [a, b]; zero on an empty interval.
    pub fn mean_plus_slope(&self, a: f64, b: f64) -> f64 {
        (self.phi_plus(b) - self.phi_plus(a)) * guarded_recip(b - a)
    }

    /// Mean of min{0, Φ'} over [a, b]; zero on an empty interval.
    pub fn mean_minus_slope(&self, a: f64, b: f64) -> f64 {
        (self.phi_minus(b) - self.phi_minus(a)) * guarded_recip(b - a)
    }

    /// max |Φ'| over [0, C₀]: exact at critical points and endpoints,
    /// plus a dense uniform sample.
    pub fn max_abs_phi_prime(&self) -> f64 {
        let mut m: f64 = self.phi_prime(0.0).abs().max(self.phi_prime(self.v_max).abs());
        for p in &self.critical_points {
            m = m.max(self.phi_prime(p.v).abs());
        }
        for i in 1..MAX_SLOPE_SAMPLES {
            let v = i as f64 / MAX_SLOPE_SAMPLES as f64 * self.v_max;
            m = m.max(self.phi_prime(v).abs());
        }
        m
    }

    /// The evaluation range [0, C₀].
    pub fn v_range(&self) -> (f64, f64) {
        (0.0, self.v_max)
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical_points
    }

    pub fn form(&self) -> &FluxForm {
        &self.form
    }

    /// True when Φ has exactly one interior critical point, a maximum.
    pub fn has_single_maximum(&self) -> bool {
        let interior: Vec<_> = self
            .critical_points
            .iter()
            .filter(|p| p.v > 0.0 && p.v < self.v_max)
            .collect();
        interior.len() == 1 && interior[0].kind == Extremum::Max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_flux() -> FluxModel {
        FluxModel::new(
            FluxForm::Quadratic {
                k: 1.0,
                shift: -1.0,
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn quadratic_matches_closed_form() {
        let f = ex1_flux();
        // Φ(v) = −(1−v)² on [0, 2]
        for &v in &[0.0, 0.3, 1.0, 1.7, 2.0] {
            assert!((f.phi(v) - (-(1.0 - v) * (1.0 - v))).abs() < 1e-14);
            assert!((f.phi_prime(v) - 2.0 * (1.0 - v)).abs() < 1e-14);
        }
        assert!(f.has_single_maximum());
    }

    #[test]
    fn split_empty_integral_is_zero() {
        let f = ex1_flux();
        assert_eq!(f.phi_plus(0.0), 0.0);
        assert_eq!(f.phi_minus(0.0), 0.0);
    }

    #[test]
    fn split_clamps_outside_range() {
        let f = ex1_flux();
        assert!((f.phi_plus(2.5) - f.phi_plus(2.0)).abs() < 1e-15);
        assert!((f.phi_minus(-0.1) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn splitting_identity_on_samples() {
        let f = ex1_flux();
        for i in 0..=200 {
            let v = i as f64 / 100.0;
            let (p, m) = f.split(v);
            let lhs = p + m;
            let rhs = f.phi(v) - f.phi_zero();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + f.phi(v).abs()),
                "identity failed at v = {v}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn undeclared_sign_change_is_rejected() {
        // Quadratic bump declared with no critical points.
        let form = FluxForm::Piecewise {
            pieces: vec![FluxPiece {
                from: 0.0,
                expr: FluxExpr::Power {
                    coeff: -1.0,
                    center: 1.0,
                    exponent: 2,
                    offset: 0.0,
                },
            }],
            critical_points: vec![],
        };
        assert!(matches!(
            FluxModel::new(form, 2.0),
            Err(SolverError::Config(_))
        ));
    }

    #[test]
    fn constant_flux_has_zero_splitting() {
        let form = FluxForm::Piecewise {
            pieces: vec![FluxPiece {
                from: 0.0,
                expr: FluxExpr::Power {
                    coeff: 0.0,
                    center: 0.0,
                    exponent: 1,
                    offset: -3.0,
                },
            }],
            critical_points: vec![],
        };
        let f = FluxModel::new(form, 1.0).unwrap();
        assert_eq!(f.phi_plus(0.7), 0.0);
        assert_eq!(f.phi_minus(0.7), 0.0);
        assert_eq!(f.max_abs_phi_prime(), 0.0);
    }

    #[test]
    fn mean_slope_guards_empty_interval() {
        let f = ex1_flux();
        assert_eq!(f.mean_plus_slope(0.5, 0.5), 0.0);
        // Mean of Φ' over [0, 1] where Φ' = 2(1−v) ≥ 0: (Φ(1) − Φ(0)) / 1 = 1.
        assert!((f.mean_plus_slope(0.0, 1.0) - 1.0).abs() < 1e-14);
        assert_eq!(f.mean_minus_slope(0.0, 1.0), 0.0);
    }
}
