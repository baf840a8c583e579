//! Sampling-based search for admissible sections inside a linear ansatz.
//!
//! A coefficient vector `c` is admissible when the combined section
//! `Σ c_i ξ_i` annihilates the reaction forces at every sampled point of the
//! constraint manifold. Contractions are linear in the section, so the
//! admissible set is the nullspace of the stacked contraction matrix.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::{
    build_basis, contract_section, eval_constraints, flatten_rows, ChetaevFlavor, JetPoint,
    ReactionBasis, SymmetrySection, SystemSpec,
};
use crate::linalg::solve_full_rank;

/// Projection accepts a point once `max |φ| ≤ PROJECTION_TOL`.
pub const PROJECTION_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERS: usize = 50;
/// Singular values at or below this fraction of the largest count as zero.
pub const NULLSPACE_REL_TOL: f64 = 1e-8;
/// Samples required per ansatz parameter.
pub const SAMPLES_PER_PARAM: usize = 10;

/// Uniform box sampler over every jet coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            lower: -2.0,
            upper: 2.0,
            count: 200,
            seed: 42,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_count(self, count: usize) -> Self {
        Self { count, ..self }
    }
}

fn project(spec: &SystemSpec, mut p: JetPoint) -> Result<Option<JetPoint>> {
    let cons = &spec.constraints;
    let n_base = spec.n_base();
    for _ in 0..=MAX_NEWTON_ITERS {
        let phi = eval_constraints(cons, &p)?;
        if phi.amax() <= PROJECTION_TOL {
            return Ok(Some(p));
        }
        if !phi.iter().all(|v| v.is_finite()) {
            return Ok(None);
        }
        let g = flatten_rows(&cons.d_jet1(&p)?);
        let Ok(y) = solve_full_rank(&(&g * g.transpose()), &phi) else {
            return Ok(None);
        };
        let delta = -(g.transpose() * y);
        for (idx, d) in delta.iter().enumerate() {
            p.jet1[(idx / n_base, idx % n_base)] += d;
        }
    }
    Ok(None)
}

/// Draws `count` points uniformly in the box and pulls each back onto the
/// constraint manifold by minimum-norm Newton steps in the first-jet
/// variables. Points that do not converge are dropped; fewer than half
/// surviving is an error.
pub fn sample_constraint_manifold(spec: &SystemSpec, cfg: &SamplerConfig) -> Result<Vec<JetPoint>> {
    if cfg.lower.partial_cmp(&cfg.upper) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Parameter {
            name: "sampler box",
            reason: format!("need lower < upper, got [{}, {}]", cfg.lower, cfg.upper),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (n, m) = (spec.n_fields, spec.n_base());
    let mut out = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.count {
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(cfg.lower..cfg.upper)).collect()
        };
        let base = DVector::from_vec(draw(m));
        let fields = DVector::from_vec(draw(n));
        let jet1 = DMatrix::from_vec(n, m, draw(n * m));
        let p = JetPoint::new(base, fields, jet1)?;
        if spec.constraints.count() == 0 {
            out.push(p);
        } else if let Some(q) = project(spec, p)? {
            out.push(q);
        }
    }
    if 2 * out.len() < cfg.count {
        return Err(Error::Sampling {
            survived: out.len(),
            requested: cfg.count,
        });
    }
    if out.len() < cfg.count {
        log::warn!("{} of {} samples failed to project", cfg.count - out.len(), cfg.count);
    }
    Ok(out)
}

/// Candidate sections whose linear span is searched.
#[derive(Debug, Clone)]
pub struct SymmetryAnsatz {
    pub basis_sections: Vec<SymmetrySection>,
}

impl SymmetryAnsatz {
    /// Rejects empty ansatzes, mismatched dimensions, and mixing sections
    /// that carry a horizontal part with generalized ones.
    pub fn new(basis_sections: Vec<SymmetrySection>, spec: &SystemSpec) -> Result<Self> {
        if basis_sections.is_empty() {
            return Err(Error::Ansatz("an ansatz needs at least one section".into()));
        }
        for s in &basis_sections {
            if s.n_fields() != spec.n_fields {
                return Err(Error::dim("ansatz section fields", spec.n_fields, s.n_fields()));
            }
            if s.n_base() != spec.n_base() {
                return Err(Error::dim("ansatz section base", spec.n_base(), s.n_base()));
            }
        }
        let horizontal = basis_sections.iter().any(|s| s.horizontal_part().is_some());
        let generalized = basis_sections.iter().any(SymmetrySection::is_generalized);
        if horizontal && generalized {
            return Err(Error::Ansatz(
                "cannot combine sections with a horizontal part and generalized sections".into(),
            ));
        }
        Ok(Self { basis_sections })
    }

    pub fn n_params(&self) -> usize {
        self.basis_sections.len()
    }

    /// `Σ c_i ξ_i`.
    pub fn section(&self, coefficients: &DVector<f64>) -> Result<SymmetrySection> {
        if coefficients.len() != self.n_params() {
            return Err(Error::dim("ansatz coefficients", self.n_params(), coefficients.len()));
        }
        SymmetrySection::combine(&self.basis_sections, coefficients.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleBasis {
    /// Orthonormal coefficient vectors spanning the admissible subspace.
    pub vectors: Vec<DVector<f64>>,
    /// Orthonormal basis of its orthogonal complement.
    pub complement: Vec<DVector<f64>>,
    /// Largest contraction of any returned vector over the samples.
    pub residual_bound: f64,
    pub sample_count: usize,
    /// Every ansatz direction was trivially admissible (zero matrix).
    pub degenerate: bool,
    pub singular_values: DVector<f64>,
}

impl AdmissibleBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Distance of `c` from the admissible subspace, relative to `|c|`.
    pub fn relative_distance(&self, c: &DVector<f64>) -> f64 {
        let norm = c.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let proj = self
            .complement
            .iter()
            .map(|u| u.dot(c).powi(2))
            .sum::<f64>()
            .sqrt();
        proj / norm
    }
}

fn basis_at(spec: &SystemSpec, p: &JetPoint) -> Result<ReactionBasis> {
    match spec.flavor {
        ChetaevFlavor::Covariant => build_basis(&spec.constraints, p, None),
        ChetaevFlavor::Noncovariant => build_basis(&spec.constraints, p, Some(&spec.signature)),
    }
}

/// Rows indexed by (sample, constraint, form component), one column per
/// ansatz section.
pub fn admissibility_matrix(
    spec: &SystemSpec,
    ansatz: &SymmetryAnsatz,
    samples: &[JetPoint],
) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for p in samples {
        let basis = basis_at(spec, p)?;
        let blocks = ansatz
            .basis_sections
            .iter()
            .map(|s| contract_section(s, &basis, p))
            .collect::<Result<Vec<_>>>()?;
        let (k, c) = blocks[0].shape();
        for alpha in 0..k {
            for comp in 0..c {
                rows.push(blocks.iter().map(|b| b[(alpha, comp)]).collect());
            }
        }
    }
    let n = ansatz.n_params();
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

/// Largest contraction of a single section with the reaction forces over
/// the samples.
pub fn admissibility_residual(
    spec: &SystemSpec,
    section: &SymmetrySection,
    samples: &[JetPoint],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        let basis = basis_at(spec, p)?;
        worst = worst.max(contract_section(section, &basis, p)?.amax());
    }
    Ok(worst)
}

/// Nullspace of the admissibility matrix by singular-value thresholding.
pub fn find_admissible(
    spec: &SystemSpec,
    ansatz: &SymmetryAnsatz,
    samples: &[JetPoint],
) -> Result<AdmissibleBasis> {
    let n = ansatz.n_params();
    let needed = SAMPLES_PER_PARAM * n;
    if samples.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: samples.len(),
        });
    }
    let a = admissibility_matrix(spec, ansatz, samples)?;
    // pad so the SVD returns a full n×n right factor
    let padded = if a.nrows() < n {
        a.clone().resize_vertically(n, 0.0)
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let sigma = svd.singular_values.clone();
    let sigma_max = sigma.max();
    let degenerate = sigma_max == 0.0;
    let (mut vectors, mut complement) = (Vec::new(), Vec::new());
    for (i, s) in sigma.iter().enumerate() {
        let row: DVector<f64> = v_t.row(i).transpose();
        if degenerate || *s <= NULLSPACE_REL_TOL * sigma_max {
            vectors.push(row);
        } else {
            complement.push(row);
        }
    }
    let residual_bound = vectors
        .iter()
        .map(|v| (&a * v).amax())
        .fold(0.0, f64::max);
    Ok(AdmissibleBasis {
        vectors,
        complement,
        residual_bound,
        sample_count: samples.len(),
        degenerate,
        singular_values: sigma,
    })
}

fn orthonormal(vs: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    let m = DMatrix::from_columns(vs);
    let qr = m.qr();
    qr.q().columns(0, vs.len()).into_owned()
}

/// Principal angles (radians, ascending) between the spans of `a` and `b`.
///
/// Uses sines for small angles and cosines for large ones, so angles near
/// zero are resolved to roughly machine precision.
pub fn principal_angles(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<Vec<f64>> {
    let dim = a.first().or(b.first()).map_or(0, |v| v.len());
    if a.iter().chain(b).any(|v| v.len() != dim) {
        return Err(Error::Structural("principal angles need equal ambient dimensions".into()));
    }
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if b.is_empty() {
        return Ok(Vec::new());
    }
    let qa = orthonormal(a, dim);
    let qb = orthonormal(b, dim);
    let cross = qa.transpose() * &qb;
    let mut cos: Vec<f64> = cross.singular_values().iter().copied().collect();
    let resid = &qb - &qa * &cross;
    let mut sin: Vec<f64> = resid.singular_values().iter().copied().collect();
    cos.sort_by(|x, y| y.total_cmp(x));
    sin.sort_by(f64::total_cmp);
    Ok(cos
        .iter()
        .zip(&sin)
        .map(|(c, s)| s.atan2(*c))
        .collect())
}
