use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BaseSignature, JetPoint};
use crate::error::{Error, Result};

/// Value and first partials of an infinitesimal generator `[e_A]_Y` at a point of Y.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorJet {
    pub value: DVector<f64>,
    /// `∂e^a/∂x^μ`, `n_fields × n_base`.
    pub d_base: DMatrix<f64>,
    /// `∂e^a/∂y^b`, `n_fields × n_fields`.
    pub d_fields: DMatrix<f64>,
}

/// Vertical direction field on Y. Must read only `base` and `fields` of the point.
#[derive(Clone)]
pub struct Generator(Arc<dyn Fn(&JetPoint) -> GeneratorJet + Send + Sync>);

impl Generator {
    pub fn new(f: impl Fn(&JetPoint) -> GeneratorJet + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    /// Constant direction, e.g. a translation.
    pub fn constant(direction: DVector<f64>, n_base: usize) -> Self {
        let n = direction.len();
        let jet = GeneratorJet {
            value: direction,
            d_base: DMatrix::zeros(n, n_base),
            d_fields: DMatrix::zeros(n, n),
        };
        Self::new(move |_| jet.clone())
    }

    /// Unit translation along field `a`.
    pub fn translation(n_fields: usize, a: usize, n_base: usize) -> Self {
        let mut e = DVector::zeros(n_fields);
        e[a] = 1.0;
        Self::constant(e, n_base)
    }

    pub fn eval(&self, p: &JetPoint) -> GeneratorJet {
        (self.0)(p)
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Generator(..)")
    }
}

/// Value and partials of the coefficient functions `ξ^A` at a jet point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientJet {
    pub value: DVector<f64>,
    /// `n_gen × n_base`.
    pub d_base: DMatrix<f64>,
    /// `n_gen × n_fields`.
    pub d_fields: DMatrix<f64>,
    /// `∂ξ^A/∂y^b_ν`, one `n_fields × n_base` block per generator; `None`
    /// when the coefficients do not depend on first derivatives.
    pub d_jet1: Option<Vec<DMatrix<f64>>>,
}

impl CoefficientJet {
    pub fn constant(value: DVector<f64>, n_fields: usize, n_base: usize) -> Self {
        let n = value.len();
        Self {
            value,
            d_base: DMatrix::zeros(n, n_base),
            d_fields: DMatrix::zeros(n, n_fields),
            d_jet1: None,
        }
    }
}

type CoefficientFn = Arc<dyn Fn(&JetPoint) -> CoefficientJet + Send + Sync>;

/// A (generalized) symmetry section `ξ̄ = ξ^A e_A`, optionally with a
/// constant horizontal part `ξ^μ ∂/∂x^μ`.
///
/// Sections whose coefficients depend on first derivatives are generalized;
/// those act vertically, so they cannot carry a horizontal part.
#[derive(Clone)]
pub struct SymmetrySection {
    generators: Vec<Generator>,
    coefficients: CoefficientFn,
    depends_on_jet1: bool,
    horizontal_part: Option<DVector<f64>>,
    n_fields: usize,
    n_base: usize,
}

impl fmt::Debug for SymmetrySection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetrySection")
            .field("n_generators", &self.generators.len())
            .field("generalized", &self.depends_on_jet1)
            .field("horizontal_part", &self.horizontal_part)
            .finish_non_exhaustive()
    }
}

impl SymmetrySection {
    pub fn new(
        generators: Vec<Generator>,
        coefficients: impl Fn(&JetPoint) -> CoefficientJet + Send + Sync + 'static,
        depends_on_jet1: bool,
        horizontal_part: Option<DVector<f64>>,
        n_fields: usize,
        n_base: usize,
    ) -> Result<Self> {
        if let Some(h) = &horizontal_part {
            if h.len() != n_base {
                return Err(Error::dim("horizontal part", n_base, h.len()));
            }
            if depends_on_jet1 {
                return Err(Error::Ansatz(
                    "a section with jet-dependent coefficients must act vertically".into(),
                ));
            }
        }
        Ok(Self {
            generators,
            coefficients: Arc::new(coefficients),
            depends_on_jet1,
            horizontal_part,
            n_fields,
            n_base,
        })
    }

    /// Sum of constant directions (unit coefficients, constant generators).
    pub fn constant(directions: Vec<DVector<f64>>, n_fields: usize, n_base: usize) -> Self {
        let n = directions.len();
        let generators = directions
            .into_iter()
            .map(|d| Generator::constant(d, n_base))
            .collect();
        let coeffs = CoefficientJet::constant(DVector::from_element(n, 1.0), n_fields, n_base);
        Self::new(generators, move |_| coeffs.clone(), false, None, n_fields, n_base)
            .expect("vertical constant section")
    }

    /// Translation along the time direction of `sig`, with zero vertical part.
    pub fn time_translation(n_fields: usize, sig: &BaseSignature) -> Self {
        let mut h = DVector::zeros(sig.n_base());
        h[sig.time_index()] = 1.0;
        let n_base = sig.n_base();
        Self::new(
            Vec::new(),
            move |_| CoefficientJet::constant(DVector::zeros(0), n_fields, n_base),
            false,
            Some(h),
            n_fields,
            n_base,
        )
        .expect("projectable time translation")
    }

    /// `Σ_i w_i · sections[i]`, realised by concatenating generators.
    pub fn combine(sections: &[SymmetrySection], weights: &[f64]) -> Result<Self> {
        let first = sections
            .first()
            .ok_or_else(|| Error::Structural("cannot combine an empty list of sections".into()))?;
        if weights.len() != sections.len() {
            return Err(Error::dim("combination weights", sections.len(), weights.len()));
        }
        let (n_fields, n_base) = (first.n_fields, first.n_base);
        if sections.iter().any(|s| s.n_fields != n_fields || s.n_base != n_base) {
            return Err(Error::Structural("sections live on different bundles".into()));
        }
        let generators: Vec<Generator> = sections
            .iter()
            .flat_map(|s| s.generators.iter().cloned())
            .collect();
        let depends_on_jet1 = sections.iter().any(|s| s.depends_on_jet1);
        let horizontal_part = if sections.iter().any(|s| s.horizontal_part.is_some()) {
            let mut h = DVector::zeros(n_base);
            for (s, w) in sections.iter().zip(weights) {
                if let Some(hs) = &s.horizontal_part {
                    h += hs * *w;
                }
            }
            Some(h)
        } else {
            None
        };
        let parts: Vec<(CoefficientFn, f64, usize)> = sections
            .iter()
            .zip(weights)
            .map(|(s, w)| (s.coefficients.clone(), *w, s.generators.len()))
            .collect();
        let coefficients = move |p: &JetPoint| {
            let jets: Vec<(CoefficientJet, f64, usize)> =
                parts.iter().map(|(f, w, n)| (f(p), *w, *n)).collect();
            let total: usize = jets.iter().map(|j| j.2).sum();
            let mut out = CoefficientJet::constant(DVector::zeros(total), n_fields, n_base);
            let any_jet1 = jets.iter().any(|j| j.0.d_jet1.is_some());
            let mut d_jet1 = Vec::with_capacity(total);
            let mut row = 0;
            for (jet, w, n) in &jets {
                for i in 0..*n {
                    out.value[row + i] = w * jet.value[i];
                    out.d_base.row_mut(row + i).copy_from(&(jet.d_base.row(i) * *w));
                    out.d_fields.row_mut(row + i).copy_from(&(jet.d_fields.row(i) * *w));
                    if any_jet1 {
                        d_jet1.push(match &jet.d_jet1 {
                            Some(blocks) => &blocks[i] * *w,
                            None => DMatrix::zeros(n_fields, n_base),
                        });
                    }
                }
                row += n;
            }
            if any_jet1 {
                out.d_jet1 = Some(d_jet1);
            }
            out
        };
        Self::new(
            generators,
            coefficients,
            depends_on_jet1,
            horizontal_part,
            n_fields,
            n_base,
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::combine(std::slice::from_ref(self), &[factor]).expect("single-section combination")
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn is_generalized(&self) -> bool {
        self.depends_on_jet1
    }

    pub fn horizontal_part(&self) -> Option<&DVector<f64>> {
        self.horizontal_part.as_ref()
    }

    fn coefficient_jet(&self, p: &JetPoint) -> Result<CoefficientJet> {
        p.check_shape(self.n_fields, self.n_base)?;
        let jet = (self.coefficients)(p);
        if jet.value.len() != self.generators.len() {
            return Err(Error::dim("section coefficients", self.generators.len(), jet.value.len()));
        }
        Ok(jet)
    }

    fn generator_jets(&self, p: &JetPoint) -> Result<Vec<GeneratorJet>> {
        self.generators
            .iter()
            .map(|g| {
                let jet = g.eval(p);
                if jet.value.len() != self.n_fields {
                    return Err(Error::dim("generator value", self.n_fields, jet.value.len()));
                }
                Ok(jet)
            })
            .collect()
    }

    /// The associated vector field at the underlying point: `(ξ^μ, ξ^a)`.
    pub fn vector_at(&self, p: &JetPoint) -> Result<(DVector<f64>, DVector<f64>)> {
        let coeffs = self.coefficient_jet(p)?;
        let gens = self.generator_jets(p)?;
        let mut field = DVector::zeros(self.n_fields);
        for (c, g) in coeffs.value.iter().zip(&gens) {
            field.axpy(*c, &g.value, 1.0);
        }
        let base = self
            .horizontal_part
            .clone()
            .unwrap_or_else(|| DVector::zeros(self.n_base));
        Ok((base, field))
    }
}

/// A prolonged (generalized) vector field evaluated at a jet point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedVector {
    pub base_comp: DVector<f64>,
    pub field_comp: DVector<f64>,
    /// Coefficient of `∂/∂y^a_μ` at `(a, μ)`.
    pub jet1_comp: DMatrix<f64>,
    pub evaluated_at: JetPoint,
}

/// First prolongation of a section by total derivatives.
///
/// `jet1_comp[(a, μ)] = D_μ ξ^a − y^a_ν ∂ξ^ν/∂x^μ`, where `D_μ` includes the
/// `∂ξ^a/∂y^b_ν · y^b_{μν}` term for generalized sections; the horizontal
/// part is constant, so its correction term vanishes.
pub fn prolong(section: &SymmetrySection, p: &JetPoint) -> Result<ProlongedVector> {
    let coeffs = section.coefficient_jet(p)?;
    let gens = section.generator_jets(p)?;
    let (n_fields, n_base) = (section.n_fields, section.n_base);
    let jet2 = if section.depends_on_jet1 {
        Some(p.jet2().ok_or(Error::Missing(
            "second-order jet coordinates for a generalized section",
        ))?)
    } else {
        None
    };

    // D_μ ξ^A, n_gen × n_base
    let mut total_coeff = &coeffs.d_base + &coeffs.d_fields * &p.jet1;
    if let (Some(blocks), Some(second)) = (&coeffs.d_jet1, jet2) {
        for (gen, block) in blocks.iter().enumerate() {
            for mu in 0..n_base {
                let mut acc = 0.0;
                for b in 0..n_fields {
                    for nu in 0..n_base {
                        acc += block[(b, nu)] * second[b][(mu, nu)];
                    }
                }
                total_coeff[(gen, mu)] += acc;
            }
        }
    }

    let mut field_comp = DVector::zeros(n_fields);
    let mut jet1_comp = DMatrix::zeros(n_fields, n_base);
    for (gen, g) in gens.iter().enumerate() {
        let c = coeffs.value[gen];
        field_comp.axpy(c, &g.value, 1.0);
        // D_μ e^a = ∂_μ e^a + ∂e^a/∂y^b y^b_μ
        let total_gen = &g.d_base + &g.d_fields * &p.jet1;
        jet1_comp += &total_gen * c;
        jet1_comp += &g.value * total_coeff.row(gen);
    }

    let base_comp = section
        .horizontal_part
        .clone()
        .unwrap_or_else(|| DVector::zeros(n_base));

    Ok(ProlongedVector {
        base_comp,
        field_comp,
        jet1_comp,
        evaluated_at: p.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> JetPoint {
        JetPoint::mechanical(0.3, &[1.0, -1.0], &[0.5, 2.0]).unwrap()
    }

    #[test]
    fn constant_section_has_zero_jet_component() {
        let s = SymmetrySection::constant(
            vec![DVector::from_vec(vec![1.0, 2.0]), DVector::from_vec(vec![0.0, 1.0])],
            2,
            1,
        );
        let v = prolong(&s, &point()).unwrap();
        assert_eq!(v.field_comp.as_slice(), &[1.0, 3.0]);
        assert_eq!(v.jet1_comp, DMatrix::zeros(2, 1));
        assert_eq!(v.base_comp.as_slice(), &[0.0]);
    }

    #[test]
    fn time_translation_is_purely_horizontal() {
        let s = SymmetrySection::time_translation(2, &BaseSignature::mechanics());
        let v = prolong(&s, &point()).unwrap();
        assert_eq!(v.base_comp.as_slice(), &[1.0]);
        assert_eq!(v.field_comp, DVector::zeros(2));
        assert_eq!(v.jet1_comp, DMatrix::zeros(2, 1));
    }

    #[test]
    fn generalized_section_needs_second_jet() {
        let s = SymmetrySection::new(
            vec![Generator::translation(2, 0, 1)],
            |p: &JetPoint| CoefficientJet {
                value: DVector::from_element(1, p.jet1[(0, 0)]),
                d_base: DMatrix::zeros(1, 1),
                d_fields: DMatrix::zeros(1, 2),
                d_jet1: Some(vec![DMatrix::from_column_slice(2, 1, &[1.0, 0.0])]),
            },
            true,
            None,
            2,
            1,
        )
        .unwrap();
        assert!(matches!(prolong(&s, &point()), Err(Error::Missing(_))));
        let p = point().with_accelerations(&[7.0, 8.0]).unwrap();
        let v = prolong(&s, &p).unwrap();
        assert_eq!(v.jet1_comp.as_slice(), &[7.0, 0.0]);
    }

    #[test]
    fn generalized_sections_cannot_be_horizontal() {
        let r = SymmetrySection::new(
            vec![],
            |_: &JetPoint| CoefficientJet::constant(DVector::zeros(0), 1, 1),
            true,
            Some(DVector::from_element(1, 1.0)),
            1,
            1,
        );
        assert!(matches!(r, Err(Error::Ansatz(_))));
    }

    /// Generator rotating the plane, e = (−y, x), coefficient depending on x.
    #[test]
    fn field_dependent_generator_uses_total_derivative() {
        let rot = Generator::new(|p: &JetPoint| GeneratorJet {
            value: DVector::from_vec(vec![-p.fields[1], p.fields[0]]),
            d_base: DMatrix::zeros(2, 1),
            d_fields: DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        });
        let s = SymmetrySection::new(
            vec![rot],
            |p: &JetPoint| CoefficientJet {
                value: DVector::from_element(1, p.fields[0]),
                d_base: DMatrix::zeros(1, 1),
                d_fields: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
                d_jet1: None,
            },
            false,
            None,
            2,
            1,
        )
        .unwrap();
        // ξ = x(−y, x); d/dt ξ = ẋ(−y, x) + x(−ẏ, ẋ)
        let p = point();
        let (x, y, xd, yd) = (1.0, -1.0, 0.5, 2.0);
        let v = prolong(&s, &p).unwrap();
        let expect = [xd * -y + x * -yd, xd * x + x * xd];
        assert!((v.jet1_comp[(0, 0)] - expect[0]).abs() < 1e-15);
        assert!((v.jet1_comp[(1, 0)] - expect[1]).abs() < 1e-15);
    }
}
