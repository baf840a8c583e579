mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nhlab_core::jet::{
    eval_constraints, BaseSignature, ChetaevFlavor, ConstraintSpec, LagrangianSpec,
    SymmetrySection, SystemSpec,
};
use nhlab_core::mech::{benenti_ansatz, benenti_section, benenti_system};
use nhlab_core::rod::{rod_ansatz, rod_system_spec, RodParams};
use nhlab_core::symmetry::{
    admissibility_residual, find_admissible, principal_angles, sample_constraint_manifold,
    SamplerConfig, SymmetryAnsatz,
};
use nhlab_core::Error;
use proptest::prelude::*;

fn table_one() -> [DVector<f64>; 3] {
    [
        DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]),
        DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]),
        DVector::from_vec(vec![1.0, 0.0, 0.0, -1.0]),
    ]
}

#[test]
fn benenti_samples_lie_on_the_constraint() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
    assert!(pts.len() >= 100);
    for p in &pts {
        let v = p.jet1.column(0);
        assert!((v[0] * v[3] - v[2] * v[1]).abs() <= 1e-10);
    }
}

#[test]
fn rod_samples_satisfy_both_constraints() {
    let spec = rod_system_spec(&RodParams::default()).unwrap();
    let pts = sample_constraint_manifold(&spec, &SamplerConfig::default()).unwrap();
    for p in &pts {
        assert!(eval_constraints(&spec.constraints, p).unwrap().amax() <= 1e-10);
    }
}

#[test]
fn unconstrained_samples_are_raw_draws() {
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
    let cfg = SamplerConfig::default().with_count(20);
    let pts = sample_constraint_manifold(&spec, &cfg).unwrap();
    assert_eq!(pts.len(), 20);
    assert!(pts.iter().all(|p| p.jet1.iter().all(|v| (-2.0..2.0).contains(v))));
    assert_eq!(pts, sample_constraint_manifold(&spec, &cfg).unwrap());
}

#[test]
fn unreachable_manifold_is_a_sampling_error() {
    // φ = (ẋ)² + 1 has no real zeros
    let spec = SystemSpec::new(
        BaseSignature::mechanics(),
        1,
        LagrangianSpec::first_order(
            Arc::new(|p| 0.5 * p.jet1.norm_squared()),
            Arc::new(|_| DVector::zeros(1)),
            Arc::new(|p| p.jet1.clone()),
        ),
        ConstraintSpec::new(1, 1, 1, Arc::new(|p| DVector::from_element(1, p.jet1[(0, 0)].powi(2) + 1.0)))
            .with_d_jet1(Arc::new(|p| vec![DMatrix::from_element(1, 1, 2.0 * p.jet1[(0, 0)])])),
        ChetaevFlavor::Covariant,
    )
    .unwrap();
    assert!(matches!(
        sample_constraint_manifold(&spec, &SamplerConfig::default().with_count(20)),
        Err(Error::Sampling { survived: 0, requested: 20 })
    ));
}

#[test]
fn benenti_ansatz_recovers_the_admissibility_condition() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
    let ansatz = SymmetryAnsatz::new(benenti_ansatz(), &sys.spec).unwrap();
    let basis = find_admissible(&sys.spec, &ansatz, &pts).unwrap();
    assert_eq!(basis.dim(), 3);
    assert!(!basis.degenerate);
    assert_eq!(basis.sample_count, pts.len());
    let normal = DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]);
    let angles = principal_angles(&basis.complement, &[normal]).unwrap();
    assert!(angles[0] <= 1e-8, "{angles:?}");
    for c in table_one() {
        assert!(basis.relative_distance(&c) <= 1e-9);
        let section = ansatz.section(&c).unwrap();
        assert!(admissibility_residual(&sys.spec, &section, &pts).unwrap() <= 1e-9);
    }
}

#[test]
fn basis_is_sound_on_fresh_samples() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let train = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
    let fresh =
        sample_constraint_manifold(&sys.spec, &SamplerConfig::default().with_seed(4242)).unwrap();
    let ansatz = SymmetryAnsatz::new(benenti_ansatz(), &sys.spec).unwrap();
    let basis = find_admissible(&sys.spec, &ansatz, &train).unwrap();
    for v in &basis.vectors {
        let s = ansatz.section(v).unwrap();
        assert!(admissibility_residual(&sys.spec, &s, &fresh).unwrap() <= 1e-8);
    }
}

#[test]
fn rod_ansatz_keeps_only_the_generalized_translation() {
    let params = RodParams::default();
    let spec = rod_system_spec(&params).unwrap();
    let pts = sample_constraint_manifold(&spec, &SamplerConfig::default()).unwrap();
    let ansatz = SymmetryAnsatz::new(rod_ansatz(params.r), &spec).unwrap();
    let basis = find_admissible(&spec, &ansatz, &pts).unwrap();
    assert_eq!(basis.dim(), 1);
    let e4 = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
    assert!(principal_angles(&basis.vectors, &[e4]).unwrap()[0] < 1e-10);
    for a in 0..3 {
        let mut e = DVector::zeros(4);
        e[a] = 1.0;
        let s = ansatz.section(&e).unwrap();
        assert!(admissibility_residual(&spec, &s, &pts).unwrap() > 0.1);
    }
}

#[test]
fn trivially_admissible_ansatz_is_degenerate() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
    let ansatz = SymmetryAnsatz::new(vec![benenti_section([0.0; 4])], &sys.spec).unwrap();
    let basis = find_admissible(&sys.spec, &ansatz, &pts).unwrap();
    assert!(basis.degenerate);
    assert_eq!(basis.dim(), 1);
}

#[test]
fn ansatz_validation() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
    let time = SymmetrySection::time_translation(4, &BaseSignature::mechanics());
    assert!(matches!(
        SymmetryAnsatz::new(vec![time, benenti_section([1.0; 4])], &sys.spec),
        Err(Error::Ansatz(_))
    ));
    assert!(matches!(SymmetryAnsatz::new(vec![], &sys.spec), Err(Error::Ansatz(_))));
    assert!(matches!(
        SymmetryAnsatz::new(rod_ansatz(1.0), &sys.spec),
        Err(Error::Dimension { .. })
    ));
    let ansatz = SymmetryAnsatz::new(benenti_ansatz(), &sys.spec).unwrap();
    assert!(matches!(
        find_admissible(&sys.spec, &ansatz, &pts[..39]),
        Err(Error::InsufficientData { needed: 40, got: 39 })
    ));
}

#[test]
fn same_seed_gives_identical_basis() {
    let sys = benenti_system(1.0, 0.0).unwrap();
    let run = || {
        let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default()).unwrap();
        let ansatz = SymmetryAnsatz::new(benenti_ansatz(), &sys.spec).unwrap();
        find_admissible(&sys.spec, &ansatz, &pts).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    for (x, y) in a.vectors.iter().zip(&b.vectors) {
        assert!(x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn principal_angles_of_known_planes() {
    let e = |i: usize| {
        let mut v = DVector::zeros(3);
        v[i] = 1.0;
        v
    };
    let tilt = DVector::from_vec(vec![0.0, 0.3f64.cos(), 0.3f64.sin()]);
    let angles = principal_angles(&[e(0), e(1)], &[e(0), tilt]).unwrap();
    assert!(angles[0].abs() < 1e-15);
    assert!((angles[1] - 0.3).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nullspace_is_scale_invariant(scales in prop::array::uniform4(0.1..10.0f64), signs in prop::array::uniform4(any::<bool>())) {
        let sys = benenti_system(1.0, 0.0).unwrap();
        let pts = sample_constraint_manifold(&sys.spec, &SamplerConfig::default().with_count(60)).unwrap();
        let plain = SymmetryAnsatz::new(benenti_ansatz(), &sys.spec).unwrap();
        let scaled_sections = benenti_ansatz()
            .iter()
            .zip(scales.iter().zip(signs))
            .map(|(s, (c, neg))| s.scaled(if neg { -c } else { *c }))
            .collect();
        let scaled = SymmetryAnsatz::new(scaled_sections, &sys.spec).unwrap();
        let a = find_admissible(&sys.spec, &plain, &pts).unwrap();
        let b = find_admissible(&sys.spec, &scaled, &pts).unwrap();
        prop_assert_eq!(a.dim(), b.dim());
        // map b's coefficients back to the unscaled parametrisation
        let back: Vec<DVector<f64>> = b.vectors.iter().map(|v| {
            DVector::from_fn(4, |i, _| v[i] * if signs[i] { -scales[i] } else { scales[i] })
        }).collect();
        let angles = principal_angles(&a.vectors, &back).unwrap();
        prop_assert!(angles.iter().all(|t| *t <= 1e-10), "{:?}", angles);
    }
}
