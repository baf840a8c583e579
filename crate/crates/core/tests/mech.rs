mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nhlab_core::jet::{
    chetaev_covariant, contract_section, BaseSignature, ChetaevFlavor, ConstraintSpec,
    LagrangianSpec, SystemSpec,
};
use nhlab_core::mech::{
    benenti_section, benenti_system, simulate, solve_multipliers, step, MechState, MechSystem,
};
use nhlab_core::Error;
use proptest::prelude::*;

fn end_state(sys: &MechSystem, s0: &MechState, total: f64, h: f64) -> MechState {
    simulate(sys, s0, total, h).unwrap().samples.pop().unwrap().state
}

/// Richardson ratio `|y_h − y_{h/2}| / |y_{h/2} − y_{h/4}|` of the end state.
pub fn richardson_ratio(sys: &MechSystem, s0: &MechState, total: f64, h: f64) -> f64 {
    let a = end_state(sys, s0, total, h);
    let b = end_state(sys, s0, total, h / 2.0);
    let c = end_state(sys, s0, total, h / 4.0);
    let dist = |x: &MechState, y: &MechState| {
        ((&x.q - &y.q).norm_squared() + (&x.v - &y.v).norm_squared()).sqrt()
    };
    dist(&a, &b) / dist(&b, &c)
}

#[test]
fn benenti_parameters() {
    assert!(matches!(benenti_system(0.0, 0.0), Err(Error::Parameter { name: "m", .. })));
    assert!(matches!(benenti_system(-1.0, 0.0), Err(Error::Parameter { .. })));
    let sys = benenti_system(2.0, 0.0).unwrap();
    assert_eq!(sys.mass(&DVector::zeros(4)), DMatrix::identity(4, 4) * 2.0);
    let sys = benenti_system(1.0, 9.8).unwrap();
    let f = sys.force(0.3, &DVector::from_element(4, 1.0), &DVector::from_element(4, -2.0));
    assert_eq!(f.as_slice(), &[0.0, -9.8, 0.0, 0.0]);
}

#[test]
fn free_benenti_has_no_reaction() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let sol = solve_multipliers(&sys, &MechState::new(0.0, &[0.0; 4], &[1.0, 0.5, 2.0, 1.0])).unwrap();
    assert_eq!(sol.lambda.as_slice(), &[0.0]);
    assert_eq!(sol.accel, DVector::zeros(4));
}

#[test]
fn forced_benenti_multiplier_matches_hand_solve() {
    // C = (0, −1, 0, 1), M = I: (C Cᵀ) λ = −C F  ⇒  2λ = −g m
    let (m, g) = (1.0, 9.8);
    let sys = benenti_system(m, g).unwrap();
    let sol = solve_multipliers(&sys, &MechState::new(0.0, &[0.0; 4], &[1.0, 0.0, 1.0, 0.0])).unwrap();
    assert!((sol.lambda[0] + g * m / 2.0).abs() < 1e-12);
    let expect = [0.0, -4.9, 0.0, -4.9];
    for (a, e) in sol.accel.iter().zip(expect) {
        assert!((a - e).abs() < 1e-12);
    }
}

#[test]
fn unconstrained_system_accelerates_by_force() {
    let spec = SystemSpec::new(
        BaseSignature::mechanics(),
        2,
        LagrangianSpec::first_order(
            Arc::new(|p| 0.5 * p.jet1.norm_squared()),
            Arc::new(|_| DVector::zeros(2)),
            Arc::new(|p| p.jet1.clone()),
        ),
        ConstraintSpec::none(2, 1),
        ChetaevFlavor::Covariant,
    )
    .unwrap();
    let sys = MechSystem::new(
        spec,
        |_| DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0])),
        |_, _, _| DVector::from_vec(vec![1.0, 1.0]),
        BTreeMap::new(),
    )
    .unwrap();
    let sol = solve_multipliers(&sys, &MechState::new(0.0, &[0.0; 2], &[0.0; 2])).unwrap();
    assert_eq!(sol.lambda.len(), 0);
    assert!((sol.accel - DVector::from_vec(vec![0.5, 0.25])).amax() < 1e-15);
}

#[test]
fn rest_state_is_singular() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let s0 = MechState::new(0.0, &[0.0; 4], &[0.0; 4]);
    assert!(matches!(
        solve_multipliers(&sys, &s0),
        Err(Error::SingularConstraint { rank: 0, expected: 1, .. })
    ));
    let err = simulate(&sys, &s0, 1.0, 1e-3).unwrap_err();
    assert!(err.partial.is_empty());
    assert!(matches!(err.error, Error::SingularConstraint { .. }));
}

#[test]
fn free_step_moves_in_straight_lines() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let s0 = MechState::new(0.0, &[0.0; 4], &[1.0, 0.0, 2.0, 0.0]);
    let s1 = step(&sys, &s0, 0.01).unwrap();
    assert!((&s1.v - &s0.v).amax() < 1e-14);
    let expect = [0.01, 0.0, 0.02, 0.0];
    for (q, e) in s1.q.iter().zip(expect) {
        assert!((q - e).abs() < 1e-14);
    }
    assert_eq!(step(&sys, &s0, 0.0).unwrap(), s0);
    assert!(step(&sys, &s0, -1.0).is_err());
}

#[test]
fn forced_step_stays_on_constraint() {
    let sys = benenti_system(1.0, 9.8).unwrap();
    let s1 = step(&sys, &MechState::new(0.0, &[0.0; 4], &[1.0, 0.0, 1.0, 0.0]), 1e-3).unwrap();
    assert!(sys.constraint_residual(&s1).unwrap().amax() <= 1e-9);
}

#[test]
fn free_benenti_long_run() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let s0 = MechState::new(0.0, &[0.0; 4], &[1.0, 0.5, 2.0, 1.0]);
    let traj = simulate(&sys, &s0, 10.0, 1e-3).unwrap();
    assert_eq!(traj.len(), 10_001);
    assert!(traj.max_constraint_residual() <= 1e-9);
    let speed = |s: &MechState, i: usize| s.v.rows(2 * i, 2).norm();
    for sample in &traj.samples {
        assert!((speed(&sample.state, 0) - speed(&s0, 0)).abs() < 1e-10);
        assert!((speed(&sample.state, 1) - speed(&s0, 1)).abs() < 1e-10);
    }
    let times = traj.times();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times[10_000] - 10.0).abs() < 1e-12);
}

#[test]
fn forced_benenti_is_fourth_order() {
    let sys = benenti_system(1.0, 9.8).unwrap();
    let s0 = MechState::new(0.0, &[0.0; 4], &[1.0, 0.5, 2.0, 1.0]);
    let ratio = richardson_ratio(&sys, &s0, 1.0, 0.05);
    assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
}

fn admissible_velocity(a: f64, b: f64, c: f64) -> [f64; 4] {
    // (ẋ₂, ẏ₂) = c (ẋ₁, ẏ₁)
    [a, b, c * a, c * b]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn multipliers_kill_constraint_derivative(
        a in 0.2..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64,
        q in prop::collection::vec(-2.0..2.0f64, 4), g in 0.0..20.0f64
    ) {
        let sys = benenti_system(1.5, g).unwrap();
        let v = admissible_velocity(a, b, c);
        let s = MechState::new(0.0, &q, &v);
        let sol = solve_multipliers(&sys, &s).unwrap();
        // dφ/dt = ∂φ/∂v · v̇ (φ depends on velocities only)
        let grad = [v[3], -v[2], -v[1], v[0]];
        let dphi: f64 = grad.iter().zip(sol.accel.iter()).map(|(x, y)| x * y).sum();
        let scale = grad.iter().map(|x| x.abs()).sum::<f64>() * sol.accel.amax().max(1.0);
        prop_assert!(dphi.abs() <= 1e-12 * scale);
    }

    #[test]
    fn reaction_does_no_work_on_admissible_sections(
        a in 0.2..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64,
        w in prop::collection::vec(-2.0..2.0f64, 3), g in 1.0..20.0f64
    ) {
        // weights with α + δ = β + γ
        let weights = [w[0], w[1], w[2], w[1] + w[2] - w[0]];
        let sys = benenti_system(1.0, g).unwrap();
        let s = MechState::new(0.0, &[0.0; 4], &admissible_velocity(a, b, c));
        let p = s.jet_point();
        let basis = chetaev_covariant(&sys.spec.constraints, &p).unwrap();
        let section = benenti_section(weights);
        prop_assert!(contract_section(&section, &basis, &p).unwrap().amax() < 1e-12);
        let sol = solve_multipliers(&sys, &s).unwrap();
        let reaction = basis.force_matrix(0).unwrap().transpose() * &sol.lambda;
        let xi = section.vector_at(&p).unwrap().1;
        prop_assert!(xi.dot(&reaction).abs() < 1e-12 * (1.0 + reaction.amax() * xi.amax()));
    }
}
