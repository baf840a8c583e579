//! Two point masses on a plane whose velocities must stay parallel.
//!
//! Fields are ordered `(x₁, y₁, x₂, y₂)`. The optional vertical force
//! `−m g` on the first mass is an extension used to exercise nonzero
//! multipliers; `g = 0` is the classical force-free system.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::MechSystem;
use crate::error::{Error, Result};
use crate::jet::{
    BaseSignature, ChetaevFlavor, CoefficientJet, ConstraintSpec, Generator, JetPoint,
    LagrangianSpec, SymmetrySection, SystemSpec,
};

const N: usize = 4;

/// `φ = ẋ₁ẏ₂ − ẋ₂ẏ₁`.
fn parallel_velocities() -> ConstraintSpec {
    ConstraintSpec::new(
        1,
        N,
        1,
        Arc::new(|p: &JetPoint| {
            let v = p.jet1.column(0);
            DVector::from_element(1, v[0] * v[3] - v[2] * v[1])
        }),
    )
    .with_d_jet1(Arc::new(|p: &JetPoint| {
        let v = p.jet1.column(0);
        vec![DMatrix::from_column_slice(N, 1, &[v[3], -v[2], -v[1], v[0]])]
    }))
}

fn lagrangian(m: f64, g: f64) -> LagrangianSpec {
    LagrangianSpec::first_order(
        Arc::new(move |p: &JetPoint| 0.5 * m * p.jet1.norm_squared() - m * g * p.fields[1]),
        Arc::new(move |_| DVector::from_column_slice(&[0.0, -m * g, 0.0, 0.0])),
        Arc::new(move |p: &JetPoint| &p.jet1 * m),
    )
}

/// Builds the system with mass `m > 0` and forcing `g`.
pub fn benenti_system(m: f64, g: f64) -> Result<MechSystem> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter {
            name: "m",
            reason: format!("mass must be positive, got {m}"),
        });
    }
    if !g.is_finite() {
        return Err(Error::Parameter {
            name: "g",
            reason: format!("forcing must be finite, got {g}"),
        });
    }
    let spec = SystemSpec::new(
        BaseSignature::mechanics(),
        N,
        lagrangian(m, g),
        parallel_velocities(),
        ChetaevFlavor::Covariant,
    )?;
    let params = BTreeMap::from([("g".to_string(), g), ("m".to_string(), m)]);
    MechSystem::new(
        spec,
        move |_| DMatrix::identity(N, N) * m,
        move |_, _, _| DVector::from_column_slice(&[0.0, -m * g, 0.0, 0.0]),
        params,
    )
}

/// Velocity-weighted translations `α ẋ₁∂x₁ + β ẏ₁∂y₁ + γ ẋ₂∂x₂ + δ ẏ₂∂y₂`.
pub fn benenti_section(weights: [f64; 4]) -> SymmetrySection {
    let generators = (0..N).map(|a| Generator::translation(N, a, 1)).collect();
    SymmetrySection::new(
        generators,
        move |p: &JetPoint| {
            let v = p.jet1.column(0);
            let d_jet1 = (0..N)
                .map(|a| {
                    let mut block = DMatrix::zeros(N, 1);
                    block[(a, 0)] = weights[a];
                    block
                })
                .collect();
            CoefficientJet {
                value: DVector::from_fn(N, |a, _| weights[a] * v[a]),
                d_base: DMatrix::zeros(N, 1),
                d_fields: DMatrix::zeros(N, N),
                d_jet1: Some(d_jet1),
            }
        },
        true,
        None,
        N,
        1,
    )
    .expect("vertical generalized section")
}

/// The four-parameter family, one unit weight per direction.
pub fn benenti_ansatz() -> Vec<SymmetrySection> {
    (0..N)
        .map(|a| {
            let mut w = [0.0; 4];
            w[a] = 1.0;
            benenti_section(w)
        })
        .collect()
}
