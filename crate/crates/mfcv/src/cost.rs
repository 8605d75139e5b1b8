//! Fidelity-dependent query cost.
//!
//! c(s) = c0 * (c2 + exp(-c1 * (1 - s))), strictly increasing on [0, 1].
//! The acquisition divides by the normalized cost c(s)/c0 so its scale does
//! not depend on the absolute cost of the high-fidelity model; cumulative
//! cost reporting uses the unnormalized value.

use crate::error::{MfcvError, Result};

/// Cost-model constants: high-fidelity cost, steepness, low-fidelity floor.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CostParams {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        for (name, v) in [("c0", c0), ("c1", c1), ("c2", c2)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(MfcvError::InvalidParameter {
                    name: match name {
                        "c0" => "c0",
                        "c1" => "c1",
                        _ => "c2",
                    },
                    reason: "must be positive and finite".into(),
                });
            }
        }
        Ok(Self { c0, c1, c2 })
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            c0: 500.0,
            c1: 10.0,
            c2: 0.1,
        }
    }
}

/// Query cost at fidelity s.
pub fn cost(s: f64, p: &CostParams) -> Result<f64> {
    Ok(p.c0 * normalized_cost(s, p)?)
}

/// Cost relative to the high-fidelity model, c(s)/c0.
pub fn normalized_cost(s: f64, p: &CostParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(MfcvError::OutOfDomain(format!("fidelity {s} outside [0, 1]")));
    }
    Ok(p.c2 + (-p.c1 * (1.0 - s)).exp())
}

/// Total cost of a sequence of queries.
pub fn cumulative_cost(trace: &[f64], p: &CostParams) -> Result<f64> {
    trace.iter().map(|&s| cost(s, p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values_with_default_constants() {
        let p = CostParams::default();
        assert_eq!(cost(1.0, &p).unwrap(), 550.0);
        assert_eq!(cost(0.0, &p).unwrap(), 500.0 * (0.1 + (-10.0f64).exp()));
        assert!((cost(0.0, &p).unwrap() - 50.0227).abs() < 1e-3);
        assert_eq!(normalized_cost(1.0, &p).unwrap(), 0.1 + 1.0);
    }

    #[test]
    fn rejects_out_of_range_fidelity_and_bad_params() {
        let p = CostParams::default();
        assert!(cost(-0.01, &p).is_err());
        assert!(cost(1.01, &p).is_err());
        assert!(CostParams::new(0.0, 10.0, 0.1).is_err());
        assert!(CostParams::new(500.0, -1.0, 0.1).is_err());
        assert!(CostParams::new(500.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn cumulative_cost_examples() {
        let p = CostParams::default();
        assert_eq!(cumulative_cost(&[], &p).unwrap(), 0.0);
        assert_eq!(cumulative_cost(&[1.0, 1.0], &p).unwrap(), 1100.0);
        let trace = [0.0, 0.3, 0.9, 1.0];
        let total = cumulative_cost(&trace, &p).unwrap();
        let by_hand: f64 = trace.iter().map(|&s| cost(s, &p).unwrap()).sum();
        assert_eq!(total, by_hand);
    }

    proptest! {
        #[test]
        // c1 capped so adjacent grid differences stay above f64 resolution
        // of the c2 offset.
        fn monotone_and_bounded(c0 in 1.0f64..1e4, c1 in 0.1f64..20.0, c2 in 1e-3f64..10.0) {
            let p = CostParams::new(c0, c1, c2).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=1000 {
                let s = i as f64 / 1000.0;
                let c = cost(s, &p).unwrap();
                prop_assert!(c > prev, "cost not strictly increasing at s={s}");
                prop_assert!(c > c0 * c2 && c <= c0 * (c2 + 1.0));
                prev = c;
            }
            prop_assert_eq!(normalized_cost(1.0, &p).unwrap(), c2 + 1.0);
        }
    }
}
