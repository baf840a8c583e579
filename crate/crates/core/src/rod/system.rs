//! The rod as a [`SystemSpec`] over base `(s, t)` with fields `(x, y, θ)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::RodParams;
use crate::error::Result;
use crate::jet::{
    BaseSignature, ChetaevFlavor, CoefficientJet, ConstraintSpec, Generator, JetPoint,
    LagrangianSpec, SymmetrySection, SystemSpec,
};

const N: usize = 3;
const S: usize = 0;
const T: usize = 1;
const X: usize = 0;
const Y: usize = 1;
const TH: usize = 2;

fn second_s(p: &JetPoint, a: usize) -> f64 {
    p.jet2().map_or(0.0, |j2| j2[a][(S, S)])
}

fn lagrangian(rp: RodParams) -> LagrangianSpec {
    let RodParams {
        rho,
        alpha,
        beta,
        k,
        ..
    } = rp;
    LagrangianSpec::second_order(
        Arc::new(move |p: &JetPoint| {
            let j = &p.jet1;
            let kappa2 = second_s(p, X).powi(2) + second_s(p, Y).powi(2);
            0.5 * rho * (j[(X, T)].powi(2) + j[(Y, T)].powi(2)) + 0.5 * alpha * j[(TH, T)].powi(2)
                - 0.5 * (beta * j[(TH, S)].powi(2) + k * kappa2)
        }),
        Arc::new(|_| DVector::zeros(N)),
        Arc::new(move |p: &JetPoint| {
            let j = &p.jet1;
            let mut d = DMatrix::zeros(N, 2);
            d[(X, T)] = rho * j[(X, T)];
            d[(Y, T)] = rho * j[(Y, T)];
            d[(TH, T)] = alpha * j[(TH, T)];
            d[(TH, S)] = -beta * j[(TH, S)];
            d
        }),
        Arc::new(move |p: &JetPoint| {
            (0..N)
                .map(|a| {
                    let mut block = DMatrix::zeros(2, 2);
                    if a != TH {
                        block[(S, S)] = -k * second_s(p, a);
                    }
                    block
                })
                .collect()
        }),
    )
}

/// Rolling without slipping: `φ¹ = ẋ + Rθ̇y′`, `φ² = ẏ − Rθ̇x′`.
pub fn rod_constraints(r: f64) -> ConstraintSpec {
    ConstraintSpec::new(
        2,
        N,
        2,
        Arc::new(move |p: &JetPoint| {
            let j = &p.jet1;
            let w = j[(TH, T)];
            DVector::from_column_slice(&[
                j[(X, T)] + r * w * j[(Y, S)],
                j[(Y, T)] - r * w * j[(X, S)],
            ])
        }),
    )
    .with_d_jet1(Arc::new(move |p: &JetPoint| {
        let j = &p.jet1;
        let w = j[(TH, T)];
        let mut a1 = DMatrix::zeros(N, 2);
        a1[(X, T)] = 1.0;
        a1[(TH, T)] = r * j[(Y, S)];
        a1[(Y, S)] = r * w;
        let mut a2 = DMatrix::zeros(N, 2);
        a2[(Y, T)] = 1.0;
        a2[(TH, T)] = -r * j[(X, S)];
        a2[(X, S)] = -r * w;
        vec![a1, a2]
    }))
}

/// Second-order Lagrangian, rolling constraints, noncovariant reactions.
pub fn rod_system_spec(params: &RodParams) -> Result<SystemSpec> {
    params.validate()?;
    SystemSpec::new(
        BaseSignature::space_time(),
        N,
        lagrangian(*params),
        rod_constraints(params.r),
        ChetaevFlavor::Noncovariant,
    )
}

/// `ξ̃ = −Ry′∂x + Rx′∂y + ∂θ`.
pub fn rod_translation_section(r: f64) -> SymmetrySection {
    let generators = (0..N).map(|a| Generator::translation(N, a, 2)).collect();
    SymmetrySection::new(
        generators,
        move |p: &JetPoint| {
            let j = &p.jet1;
            let mut bx = DMatrix::zeros(N, 2);
            bx[(Y, S)] = -r;
            let mut by = DMatrix::zeros(N, 2);
            by[(X, S)] = r;
            CoefficientJet {
                value: DVector::from_column_slice(&[-r * j[(Y, S)], r * j[(X, S)], 1.0]),
                d_base: DMatrix::zeros(N, 2),
                d_fields: DMatrix::zeros(N, N),
                d_jet1: Some(vec![bx, by, DMatrix::zeros(N, 2)]),
            }
        },
        true,
        None,
        N,
        2,
    )
    .expect("vertical generalized section")
}

/// `[∂x, ∂y, ∂θ, ξ̃]`.
pub fn rod_ansatz(r: f64) -> Vec<SymmetrySection> {
    let mut out: Vec<_> = (0..N)
        .map(|a| {
            let mut e = DVector::zeros(N);
            e[a] = 1.0;
            SymmetrySection::constant(vec![e], N, 2)
        })
        .collect();
    out.push(rod_translation_section(r));
    out
}
