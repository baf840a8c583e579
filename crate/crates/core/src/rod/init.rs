use std::f64::consts::TAU;

use nalgebra::DVector;

use super::{PeriodOffsets, RodGrid, RodParams, RodState};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RodShape {
    /// Circle of circumference `ℓ`, arclength-parametrised.
    Ring,
    /// Straight unit-speed rod along the direction `angle`.
    Straight { angle: f64 },
}

/// Initial data built from a centreline shape plus Fourier perturbations of
/// `θ` and `θ̇`:
///
/// `θ(s) = twist·s + a_θ sin(2π m_θ s/ℓ)`, `θ̇(s) = spin + a_ω sin(2π m_ω s/ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodInitialData {
    pub shape: RodShape,
    pub spin: f64,
    pub theta_amplitude: f64,
    pub theta_mode: u32,
    pub spin_amplitude: f64,
    pub spin_mode: u32,
    pub twist: f64,
}

impl Default for RodInitialData {
    fn default() -> Self {
        Self {
            shape: RodShape::Ring,
            spin: 0.0,
            theta_amplitude: 0.0,
            theta_mode: 1,
            spin_amplitude: 0.0,
            spin_mode: 1,
            twist: 0.0,
        }
    }
}

impl RodInitialData {
    pub fn build(&self, params: &RodParams, grid: &RodGrid) -> Result<RodState> {
        params.validate()?;
        let n = grid.n_nodes();
        let ell = grid.length();
        let s = grid.node_positions();
        let (x, y, mut offsets) = match self.shape {
            RodShape::Ring => {
                let radius = ell / TAU;
                (
                    s.map(|v| radius * (TAU * v / ell).cos()),
                    s.map(|v| radius * (TAU * v / ell).sin()),
                    PeriodOffsets::default(),
                )
            }
            RodShape::Straight { angle } => {
                let (sa, ca) = angle.sin_cos();
                (
                    s.map(|v| v * ca),
                    s.map(|v| v * sa),
                    PeriodOffsets {
                        x: ell * ca,
                        y: ell * sa,
                        theta: 0.0,
                    },
                )
            }
        };
        offsets.theta = self.twist * ell;
        let theta = DVector::from_fn(n, |j, _| {
            self.twist * s[j]
                + self.theta_amplitude * (TAU * f64::from(self.theta_mode) * s[j] / ell).sin()
        });
        let theta_dot = DVector::from_fn(n, |j, _| {
            self.spin + self.spin_amplitude * (TAU * f64::from(self.spin_mode) * s[j] / ell).sin()
        });
        Ok(RodState {
            t: 0.0,
            x,
            y,
            theta,
            theta_dot,
            offsets,
        })
    }
}
