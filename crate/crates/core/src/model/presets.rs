//! The six bundled experiments.
//!
//! Each preset fixes a flux potential, an integrated diffusion, and a
//! piecewise-constant initial density. ex1–ex3 use a single-maximum drift
//! toward the median individual; ex4–ex6 use oscillatory potentials with
//! several extrema. ex3 has an interior flat interval of A, so admissible
//! jumps between u = 5 and u = 10 are expected to appear.

use std::str::FromStr;

use super::diffusion::DiffusionModel;
use super::flux::{CriticalPoint, Extremum, FluxExpr, FluxForm, FluxPiece};
use super::initial::{InitialDatum, Piece};
use super::ProblemSpec;
use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    Ex6,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Ex1,
        Preset::Ex2,
        Preset::Ex3,
        Preset::Ex4,
        Preset::Ex5,
        Preset::Ex6,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::Ex1 => "ex1",
            Preset::Ex2 => "ex2",
            Preset::Ex3 => "ex3",
            Preset::Ex4 => "ex4",
            Preset::Ex5 => "ex5",
            Preset::Ex6 => "ex6",
        }
    }
}

impl FromStr for Preset {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, SolverError> {
        match s {
            "ex1" => Ok(Preset::Ex1),
            "ex2" => Ok(Preset::Ex2),
            "ex3" => Ok(Preset::Ex3),
            "ex4" => Ok(Preset::Ex4),
            "ex5" => Ok(Preset::Ex5),
            "ex6" => Ok(Preset::Ex6),
            other => Err(SolverError::Usage(format!(
                "unknown preset '{other}' (expected ex1..ex6)"
            ))),
        }
    }
}

/// Threshold diffusion: a = 0 up to u = 10, then a = 0.1.
fn threshold_diffusion() -> DiffusionModel {
    DiffusionModel::new(vec![(0.0, 0.0), (10.0, 0.0)], 0.1).expect("preset diffusion is valid")
}

/// Three-block datum with total mass 2.
fn three_blocks() -> InitialDatum {
    InitialDatum::new(vec![
        Piece {
            left: 0.1,
            right: 0.2,
            value: 5.0,
        },
        Piece {
            left: 0.6,
            right: 0.7,
            value: 8.0,
        },
        Piece {
            left: 0.8,
            right: 0.9,
            value: 7.0,
        },
    ])
    .expect("preset datum is valid")
}

/// Builds the named preset problem.
pub fn preset(id: Preset) -> ProblemSpec {
    let built = match id {
        Preset::Ex1 => ProblemSpec::new(
            "ex1",
            FluxForm::Quadratic {
                k: 1.0,
                shift: -1.0,
            },
            threshold_diffusion(),
            three_blocks(),
        ),
        Preset::Ex2 => ProblemSpec::new(
            "ex2",
            FluxForm::Piecewise {
                pieces: vec![
                    FluxPiece {
                        from: 0.0,
                        expr: FluxExpr::Power {
                            coeff: -1.0,
                            center: 1.0,
                            exponent: 8,
                            offset: 0.0,
                        },
                    },
                    FluxPiece {
                        from: 1.0,
                        expr: FluxExpr::Power {
                            coeff: -1.0,
                            center: 1.0,
                            exponent: 2,
                            offset: 0.0,
                        },
                    },
                ],
                critical_points: vec![CriticalPoint {
                    v: 1.0,
                    kind: Extremum::Max,
                }],
            },
            threshold_diffusion(),
            three_blocks(),
        ),
        Preset::Ex3 => ProblemSpec::new(
            "ex3",
            FluxForm::Quadratic {
                k: 1.0,
                shift: -1.0,
            },
            DiffusionModel::new(vec![(0.0, 0.0), (5.0, 0.25), (10.0, 0.25)], 0.05)
                .expect("preset diffusion is valid"),
            three_blocks(),
        ),
        Preset::Ex4 => ProblemSpec::new(
            "ex4",
            FluxForm::Cosine {
                amplitude: 0.5,
                frequency: 1.0,
            },
            threshold_diffusion(),
            InitialDatum::new(vec![
                Piece {
                    left: 0.05,
                    right: 0.15,
                    value: 10.0,
                },
                Piece {
                    left: 0.3,
                    right: 0.5,
                    value: 14.0,
                },
                Piece {
                    left: 0.6,
                    right: 0.7,
                    value: 9.0,
                },
                Piece {
                    left: 0.9,
                    right: 1.0,
                    value: 8.0,
                },
            ])
            .expect("preset datum is valid"),
        ),
        Preset::Ex5 => ProblemSpec::new(
            "ex5",
            FluxForm::Piecewise {
                pieces: vec![
                    FluxPiece {
                        from: 0.0,
                        expr: FluxExpr::Cos {
                            coeff: -0.5,
                            frequency: 1.0,
                            offset: -0.5,
                        },
                    },
                    FluxPiece {
                        from: 2.0,
                        expr: FluxExpr::Power {
                            coeff: 1.0,
                            center: 2.0,
                            exponent: 2,
                            offset: -1.0,
                        },
                    },
                ],
                critical_points: vec![
                    CriticalPoint {
                        v: 1.0,
                        kind: Extremum::Max,
                    },
                    CriticalPoint {
                        v: 2.0,
                        kind: Extremum::Min,
                    },
                ],
            },
            threshold_diffusion(),
            InitialDatum::new(vec![
                Piece {
                    left: 0.15,
                    right: 0.3,
                    value: 14.0,
                },
                Piece {
                    left: 0.6,
                    right: 0.7,
                    value: 17.0,
                },
                Piece {
                    left: 0.8,
                    right: 0.95,
                    value: 18.0,
                },
            ])
            .expect("preset datum is valid"),
        ),
        Preset::Ex6 => ProblemSpec::new(
            "ex6",
            FluxForm::Cosine {
                amplitude: 0.5,
                frequency: 2.0,
            },
            threshold_diffusion(),
            three_blocks(),
        ),
    };
    built.expect("preset problems are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex1_mass_and_boundary_values() {
        let p = preset(Preset::Ex1);
        assert!((p.initial.total_mass() - 2.0).abs() < 1e-15);
        assert!((p.flux.phi(0.0) - (-1.0)).abs() < 1e-15);
        assert!((p.flux.phi(2.0) - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn ex3_flat_exactly_on_5_10() {
        let p = preset(Preset::Ex3);
        assert_eq!(p.diffusion.flat_intervals(), &[(5.0, 10.0)]);
    }

    #[test]
    fn ex4_mass_and_extrema() {
        let p = preset(Preset::Ex4);
        assert!((p.initial.total_mass() - 5.5).abs() < 1e-12);
        // Φ' ∝ sin(πv): interior zeros at 1..5 plus the endpoint v = 0.
        let cps = p.flux.critical_points();
        let interior: Vec<f64> = cps
            .iter()
            .filter(|c| c.v > 0.0 && c.v < 5.5)
            .map(|c| c.v)
            .collect();
        assert_eq!(interior, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(!p.flux.has_single_maximum());
    }

    #[test]
    fn ex5_joins_smoothly_at_two() {
        let p = preset(Preset::Ex5);
        assert!((p.initial.total_mass() - 6.5).abs() < 1e-12);
        let below = p.flux.phi(2.0 - 1e-9);
        let at = p.flux.phi(2.0);
        assert!((below - at).abs() < 1e-7);
        assert!((at - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn single_maximum_presets() {
        assert!(preset(Preset::Ex1).flux.has_single_maximum());
        assert!(preset(Preset::Ex2).flux.has_single_maximum());
        assert!(preset(Preset::Ex3).flux.has_single_maximum());
        assert!(!preset(Preset::Ex6).flux.has_single_maximum());
    }

    #[test]
    fn unknown_id_is_usage_error() {
        assert!(matches!(
            "ex7".parse::<Preset>(),
            Err(SolverError::Usage(_))
        ));
    }
}
