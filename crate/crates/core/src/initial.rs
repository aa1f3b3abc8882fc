//! Initial density profiles and their exact cell averages.
//!
//! The named profiles are the standard test data for this model class:
//! a Riemann shock 0.7·1_{[0,∞)}, a Riemann rarefaction (0.65 → 0.35), a
//! bell 0.4 + 0.4 e^{−100x²}, and the TV-increase datum
//! 0.5·1_{(−δ,−δ/2)} + 1_{[0,∞)}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData<R> {
    RiemannShock,
    RiemannRarefaction,
    BellShaped,
    TvIncrease { delta: R },
    Constant { value: R },
    PiecewiseConstant { breakpoints: Vec<R>, values: Vec<R> },
}

// 5-point Gauss-Legendre rule on [-1, 1].
const GL5_X: [f64; 5] = [
    0.0,
    0.5384693101056831,
    -0.5384693101056831,
    0.906179845938664,
    -0.906179845938664,
];
const GL5_W: [f64; 5] = [
    0.5688888888888889,
    0.47862867049936647,
    0.47862867049936647,
    0.23692688505618909,
    0.23692688505618909,
];

enum Pieces<R> {
    Piecewise { breakpoints: Vec<R>, values: Vec<R> },
    Smooth,
}

impl<R: Real> InitialData<R> {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::RiemannShock => "riemann-shock",
            InitialData::RiemannRarefaction => "riemann-rarefaction",
            InitialData::BellShaped => "bell-shaped",
            InitialData::TvIncrease { .. } => "tv-increase",
            InitialData::Constant { .. } => "constant",
            InitialData::PiecewiseConstant { .. } => "piecewise-constant",
        }
    }

    fn pieces(&self) -> Pieces<R> {
        let o = R::of;
        match self {
            InitialData::RiemannShock => Pieces::Piecewise {
                breakpoints: vec![R::zero()],
                values: vec![R::zero(), o(0.7)],
            },
            InitialData::RiemannRarefaction => Pieces::Piecewise {
                breakpoints: vec![R::zero()],
                values: vec![o(0.65), o(0.35)],
            },
            InitialData::TvIncrease { delta } => Pieces::Piecewise {
                breakpoints: vec![-*delta, -*delta / o(2.0), R::zero()],
                values: vec![R::zero(), o(0.5), R::zero(), R::one()],
            },
            InitialData::Constant { value } => Pieces::Piecewise {
                breakpoints: vec![],
                values: vec![*value],
            },
            InitialData::PiecewiseConstant {
                breakpoints,
                values,
            } => Pieces::Piecewise {
                breakpoints: breakpoints.clone(),
                values: values.clone(),
            },
            InitialData::BellShaped => Pieces::Smooth,
        }
    }

    /// Pointwise value; at a jump the right state is returned.
    pub fn eval(&self, x: R) -> R {
        match self.pieces() {
            Pieces::Smooth => R::of(0.4) + R::of(0.4) * (-R::of(100.0) * x * x).exp(),
            Pieces::Piecewise {
                breakpoints,
                values,
            } => {
                let idx = breakpoints.iter().take_while(|&&b| x >= b).count();
                values[idx]
            }
        }
    }

    /// Exact average over [a, b]: closed-form overlaps for piecewise-constant
    /// data, composite 5-point Gauss quadrature for smooth data.
    pub fn cell_average(&self, a: R, b: R) -> R {
        let width = b - a;
        match self.pieces() {
            Pieces::Piecewise {
                breakpoints,
                values,
            } => {
                // a cell not straddling any breakpoint averages to the piece
                // value exactly
                if !breakpoints.iter().any(|&bp| bp > a && bp < b) {
                    return self.eval(a + width / R::of(2.0));
                }
                let mut acc = R::zero();
                let mut lo = a;
                for (i, &bp) in breakpoints.iter().enumerate() {
                    let hi = bp.min(b).max(a);
                    if hi > lo {
                        acc = acc + values[i] * (hi - lo);
                    }
                    lo = lo.max(hi);
                }
                if b > lo {
                    acc = acc + values[breakpoints.len()] * (b - lo);
                }
                acc / width
            }
            Pieces::Smooth => {
                let panels = 1 + (width.as_f64() / 0.01) as usize;
                let panel_w = width / R::of(panels as f64);
                let half = panel_w / R::of(2.0);
                let mut acc = R::zero();
                for p in 0..panels {
                    let mid = a + panel_w * (R::of(p as f64) + R::of(0.5));
                    for i in 0..5 {
                        acc = acc
                            + R::of(GL5_W[i]) * half * self.eval(mid + half * R::of(GL5_X[i]));
                    }
                }
                acc / width
            }
        }
    }

    /// Analytic total variation of the profile on the line.
    pub fn total_variation(&self) -> R {
        match self.pieces() {
            // the bell rises by 0.4 and falls by 0.4
            Pieces::Smooth => R::of(0.8),
            Pieces::Piecewise { values, .. } => {
                let mut tv = R::zero();
                for pair in values.windows(2) {
                    tv = tv + (pair[1] - pair[0]).abs();
                }
                tv
            }
        }
    }

    /// Structural validation: breakpoints strictly ascending, one more value
    /// than breakpoints, finite parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::TvIncrease { delta } => {
                if !(*delta > R::zero() && delta.is_finite()) {
                    return Err(Error::OutOfRange {
                        field: "delta",
                        value: delta.as_f64(),
                        expected: "(0, inf)",
                    });
                }
            }
            InitialData::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::OutOfRange {
                        field: "value",
                        value: value.as_f64(),
                        expected: "finite",
                    });
                }
            }
            InitialData::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidSpec {
                        field: "initial_data",
                        reason: format!(
                            "need {} values for {} breakpoints, got {}",
                            breakpoints.len() + 1,
                            breakpoints.len(),
                            values.len()
                        ),
                    });
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidSpec {
                        field: "initial_data",
                        reason: "breakpoints must be strictly ascending".into(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpec {
                        field: "initial_data",
                        reason: "values must be finite".into(),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether all profile values lie in [0, 1].
    pub fn in_unit_interval(&self) -> bool {
        match self.pieces() {
            Pieces::Smooth => true, // range is [0.4, 0.8]
            Pieces::Piecewise { values, .. } => values
                .iter()
                .all(|&v| v >= R::zero() && v <= R::one()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_values() {
        let shock = InitialData::<f64>::RiemannShock;
        assert_eq!(shock.eval(-1.0), 0.0);
        assert_eq!(shock.eval(0.0), 0.7);
        assert_eq!(shock.eval(1.0), 0.7);

        let tv = InitialData::TvIncrease { delta: 0.2 };
        assert_eq!(tv.eval(-0.15), 0.5);
        assert_eq!(tv.eval(-0.05), 0.0);
        assert_eq!(tv.eval(0.5), 1.0);
        assert_eq!(tv.eval(-0.3), 0.0);
    }

    #[test]
    fn piecewise_cell_averages_are_exact() {
        let shock = InitialData::<f64>::RiemannShock;
        // jump on the cell boundary
        assert_eq!(shock.cell_average(-0.1, 0.0), 0.0);
        assert_eq!(shock.cell_average(0.0, 0.1), 0.7);
        // jump mid-cell
        assert!((shock.cell_average(-0.05, 0.05) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn bell_average_matches_refined_oracle() {
        let bell = InitialData::<f64>::BellShaped;
        let (a, b) = (-5e-4, 5e-4);
        // oracle: midpoint rule with a million subintervals
        let n = 1_000_000;
        let w = (b - a) / n as f64;
        let mut oracle = 0.0;
        for i in 0..n {
            oracle += bell.eval(a + (i as f64 + 0.5) * w);
        }
        oracle /= n as f64;
        let avg = bell.cell_average(a, b);
        assert!((avg - oracle).abs() < 1e-11, "{avg} vs {oracle}");
        assert!((avg - 0.7999966666916665).abs() < 1e-12);
    }

    #[test]
    fn total_variations() {
        assert!((InitialData::<f64>::RiemannShock.total_variation() - 0.7).abs() < 1e-15);
        assert!(
            (InitialData::<f64>::RiemannRarefaction.total_variation() - 0.3).abs() < 1e-15
        );
        assert!(
            (InitialData::TvIncrease { delta: 0.2f64 }.total_variation() - 2.0).abs() < 1e-15
        );
        assert!((InitialData::<f64>::BellShaped.total_variation() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn unit_interval_check() {
        assert!(InitialData::<f64>::BellShaped.in_unit_interval());
        let bad = InitialData::PiecewiseConstant {
            breakpoints: vec![0.0f64],
            values: vec![0.5, 1.2],
        };
        assert!(!bad.in_unit_interval());
    }

    #[test]
    fn validation_rejects_malformed_data() {
        assert!(InitialData::TvIncrease { delta: -0.1f64 }.validate().is_err());
        assert!(InitialData::PiecewiseConstant {
            breakpoints: vec![0.0f64],
            values: vec![0.5],
        }
        .validate()
        .is_err());
        assert!(InitialData::PiecewiseConstant {
            breakpoints: vec![0.5f64, 0.0],
            values: vec![0.1, 0.2, 0.3],
        }
        .validate()
        .is_err());
        assert!(InitialData::PiecewiseConstant {
            breakpoints: vec![0.0f64],
            values: vec![0.1, 0.2],
        }
        .validate()
        .is_ok());
    }
}
