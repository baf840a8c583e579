//! Central-difference cross-checks for closed-form partial derivatives.
//!
//! Model builders supply exact partials; these routines compare them with
//! finite differences of the value evaluators only.

use nalgebra::DVector;

use super::{ConstraintSpec, JetPoint, LagrangianSpec};
use crate::error::Result;

/// One jet coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Base(usize),
    Field(usize),
    Jet1(usize, usize),
    /// The symmetric coordinate `y^a_{μν}`; both stored entries move together.
    Jet2(usize, usize, usize),
}

/// Worst relative discrepancy found by a check.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialsCheck {
    pub max_rel_error: f64,
    pub worst: Option<(String, Coord)>,
}

impl PartialsCheck {
    fn new() -> Self {
        Self {
            max_rel_error: 0.0,
            worst: None,
        }
    }

    fn record(&mut self, label: &str, coord: Coord, analytic: f64, numeric: f64) {
        let scale = 1.0_f64.max(analytic.abs()).max(numeric.abs());
        let err = (analytic - numeric).abs() / scale;
        if err > self.max_rel_error || err.is_nan() {
            self.max_rel_error = err;
            self.worst = Some((label.to_string(), coord));
        }
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_rel_error <= rel_tol
    }
}

/// Returns a copy of `p` with coordinate `c` shifted by `delta`.
pub fn shifted(p: &JetPoint, c: Coord, delta: f64) -> JetPoint {
    let mut q = p.clone();
    match c {
        Coord::Base(mu) => q.base[mu] += delta,
        Coord::Field(a) => q.fields[a] += delta,
        Coord::Jet1(a, mu) => q.jet1[(a, mu)] += delta,
        Coord::Jet2(a, mu, nu) => {
            if let Some(j2) = q.jet2.as_mut() {
                j2[a][(mu, nu)] += delta;
                if mu != nu {
                    j2[a][(nu, mu)] += delta;
                }
            }
        }
    }
    q
}

fn coordinate_value(p: &JetPoint, c: Coord) -> f64 {
    match c {
        Coord::Base(mu) => p.base[mu],
        Coord::Field(a) => p.fields[a],
        Coord::Jet1(a, mu) => p.jet1[(a, mu)],
        Coord::Jet2(a, mu, nu) => p.jet2().map_or(0.0, |j| j[a][(mu, nu)]),
    }
}

fn central<F: Fn(&JetPoint) -> DVector<f64>>(f: F, p: &JetPoint, c: Coord, step: f64) -> DVector<f64> {
    let h = step * 1.0_f64.max(coordinate_value(p, c).abs());
    (f(&shifted(p, c, h)) - f(&shifted(p, c, -h))) / (2.0 * h)
}

/// Compares every supplied partial of `spec` with central differences.
pub fn check_lagrangian(spec: &LagrangianSpec, p: &JetPoint, step: f64) -> PartialsCheck {
    let mut report = PartialsCheck::new();
    let value = |q: &JetPoint| DVector::from_element(1, spec.value(q));
    let (n_fields, n_base) = (p.n_fields(), p.n_base());

    let d_base = spec.d_base(p);
    for mu in 0..n_base {
        let fd = central(value, p, Coord::Base(mu), step)[0];
        report.record("dL/dx", Coord::Base(mu), d_base[mu], fd);
    }
    let d_fields = spec.d_fields(p);
    for a in 0..n_fields {
        let fd = central(value, p, Coord::Field(a), step)[0];
        report.record("dL/dy", Coord::Field(a), d_fields[a], fd);
    }
    let d_jet1 = spec.d_jet1(p);
    for a in 0..n_fields {
        for mu in 0..n_base {
            let c = Coord::Jet1(a, mu);
            report.record("dL/dy_mu", c, d_jet1[(a, mu)], central(value, p, c, step)[0]);
        }
    }
    if let (Some(d_jet2), Some(_)) = (spec.d_jet2(p), p.jet2()) {
        for (a, block) in d_jet2.iter().enumerate() {
            for mu in 0..n_base {
                for nu in mu..n_base {
                    let c = Coord::Jet2(a, mu, nu);
                    report.record("dL/dy_munu", c, block[(mu, nu)], central(value, p, c, step)[0]);
                }
            }
        }
    }
    report
}

/// Compares every supplied constraint partial with central differences.
pub fn check_constraints(spec: &ConstraintSpec, p: &JetPoint, step: f64) -> Result<PartialsCheck> {
    let mut report = PartialsCheck::new();
    let value = |q: &JetPoint| spec.raw_value(q);
    let (n_fields, n_base) = (spec.n_fields(), spec.n_base());
    p.check_shape(n_fields, n_base)?;

    let d_jet1 = spec.d_jet1(p)?;
    let d_fields = spec.d_fields(p);
    let d_base = spec.d_base(p);
    for mu in 0..n_base {
        let c = Coord::Base(mu);
        let fd = central(value, p, c, step);
        for alpha in 0..spec.count() {
            report.record("dphi/dx", c, d_base[(alpha, mu)], fd[alpha]);
        }
    }
    for a in 0..n_fields {
        let c = Coord::Field(a);
        let fd = central(value, p, c, step);
        for alpha in 0..spec.count() {
            report.record("dphi/dy", c, d_fields[(alpha, a)], fd[alpha]);
        }
        for mu in 0..n_base {
            let c = Coord::Jet1(a, mu);
            let fd = central(value, p, c, step);
            for alpha in 0..spec.count() {
                report.record("dphi/dy_mu", c, d_jet1[alpha][(a, mu)], fd[alpha]);
            }
        }
    }
    Ok(report)
}
