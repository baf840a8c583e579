//! Nonholonomic momentum maps in coordinates and the residuals of their
//! balance laws along computed solutions.

mod mech;
mod rod;

use crate::error::{Error, Result};

pub use mech::{momentum_equation_residual_mech, momentum_mech, momentum_rhs_mech};
pub use rod::{
    momentum_equation_residual_rod, rod_energy_current, rod_translation_identity,
    rod_translation_momentum, RodLaw, RodMomentum,
};

/// One node of a rod momentum field, `J = P ds + Q dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSample {
    pub t: f64,
    pub node: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEntry {
    pub t: f64,
    pub max_abs: f64,
    /// Discrete L² norm over the nodes (`|r|` for mechanics).
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub entries: Vec<ResidualEntry>,
    /// Largest contraction of the section with the reaction forces seen
    /// along the solution; zero for built-in admissible rod sections.
    pub admissibility_defect: f64,
    pub admissible: bool,
}

impl ResidualSeries {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs).fold(0.0, f64::max)
    }

    /// Root mean square of the per-time L² norms.
    pub fn l2(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.entries.iter().map(|e| e.l2 * e.l2).sum();
        (sum / self.entries.len() as f64).sqrt()
    }

    /// Maximum over entries whose time lies in `[from, to]`.
    pub fn max_between(&self, from: f64, to: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.t >= from && e.t <= to)
            .map(|e| e.max_abs)
            .fold(0.0, f64::max)
    }
}

/// Samples needed by the five-point difference stencils.
pub const MIN_SAMPLES: usize = 5;

const CENTRED: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const FIRST: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const SECOND: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Fourth-order derivative of uniformly spaced samples: centred in the
/// interior, one-sided five-point formulas on the two samples at each end.
pub fn time_derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    let dot = |w: &[f64; 5], start: usize| -> f64 {
        w.iter().zip(&values[start..start + 5]).map(|(a, b)| a * b).sum::<f64>() / (12.0 * h)
    };
    let mut out = vec![0.0; n];
    out[0] = dot(&FIRST, 0);
    out[1] = dot(&SECOND, 0);
    for (i, d) in out.iter_mut().enumerate().take(n - 2).skip(2) {
        *d = dot(&CENTRED, i - 2);
    }
    // mirrored one-sided stencils: reverse the sample order and the sign
    let back = |w: &[f64; 5]| -> f64 {
        -w.iter()
            .zip(values[n - 5..].iter().rev())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (12.0 * h)
    };
    out[n - 1] = back(&FIRST);
    out[n - 2] = back(&SECOND);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_differentiated_exactly() {
        let h = 0.1;
        let f = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t.powi(3) - 0.25 * t.powi(4);
        let df = |t: f64| 2.0 - 2.0 * t + 1.5 * t * t - t.powi(3);
        let vals: Vec<f64> = (0..9).map(|i| f(i as f64 * h)).collect();
        let d = time_derivative(&vals, h).unwrap();
        for (i, di) in d.iter().enumerate() {
            assert!((di - df(i as f64 * h)).abs() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            time_derivative(&[1.0; 4], 0.1),
            Err(Error::InsufficientData { needed: 5, got: 4 })
        );
    }
}
