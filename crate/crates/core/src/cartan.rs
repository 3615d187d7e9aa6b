//! Polyvector fields and differential forms with polynomial coefficients:
//! wedge products, evaluation against exact differentials, exterior
//! derivative, interior product and the musical isomorphisms induced by a
//! nondegenerate bivector.
//!
//! Components are keyed by strictly increasing variable-index subsets; no
//! zero component is stored.  Degree 0 is admitted for both kinds (a bare
//! polynomial), which extends the complexes below their usual start.

use crate::gradedpoly::{Mono, Polynomial, Rat, WeightedContext};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CartanError {
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("arity mismatch: degree-{degree} polyvector applied to {got} arguments")]
    ArityMismatch { degree: usize, got: usize },
    #[error("bivector coefficient matrix is not invertible over the polynomial ring")]
    NonConstantDeterminant,
    #[error("expected a bivector (degree 2), got degree {0}")]
    NotABivector(usize),
}

/// Shared component storage for alternating tensors of either variance.
#[derive(Debug, Clone, PartialEq, Eq)]
struct AltComponents {
    nvars: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Polynomial>,
}

impl AltComponents {
    fn zero(nvars: usize, degree: usize) -> Self {
        AltComponents {
            nvars,
            degree,
            comps: BTreeMap::new(),
        }
    }

    fn add_component(&mut self, subset: Vec<usize>, coeff: Polynomial) {
        debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(subset.len(), self.degree);
        if coeff.is_zero() {
            return;
        }
        match self.comps.entry(subset) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (s, c) in &other.comps {
            out.add_component(s.clone(), c.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        AltComponents {
            nvars: self.nvars,
            degree: self.degree,
            comps: self.comps.iter().map(|(s, c)| (s.clone(), c.neg())).collect(),
        }
    }

    fn scale_poly(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (s, c) in &self.comps {
            out.add_component(s.clone(), c.mul(p));
        }
        out
    }

    fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars, self.degree + other.degree);
        for (sa, ca) in &self.comps {
            for (sb, cb) in &other.comps {
                if let Some((merged, sign)) = merge_subsets(sa, sb) {
                    let mut coeff = ca.mul(cb);
                    if sign < 0 {
                        coeff = coeff.neg();
                    }
                    out.add_component(merged, coeff);
                }
            }
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

/// Merges two strictly increasing subsets; `None` when they intersect.
/// The sign is the parity of the merge permutation.
fn merge_subsets(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => return None,
            (Some(&x), Some(&y)) if x < y => {
                out.push(x);
                i += 1;
            }
            (Some(_), Some(&y)) => {
                // y jumps over the remaining elements of a
                inversions += a.len() - i;
                out.push(y);
                j += 1;
            }
            (Some(&x), None) => {
                out.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Some((out, if inversions % 2 == 0 { 1 } else { -1 }))
}

macro_rules! alt_kind {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct $name(AltComponents);

        impl $name {
            pub fn zero(nvars: usize, degree: usize) -> Self {
                $name(AltComponents::zero(nvars, degree))
            }

            pub fn scalar(p: Polynomial) -> Self {
                let nvars = p.nvars();
                let mut inner = AltComponents::zero(nvars, 0);
                inner.add_component(vec![], p);
                $name(inner)
            }

            pub fn from_components(
                nvars: usize,
                degree: usize,
                comps: Vec<(Vec<usize>, Polynomial)>,
            ) -> Self {
                let mut inner = AltComponents::zero(nvars, degree);
                for (s, c) in comps {
                    inner.add_component(s, c);
                }
                $name(inner)
            }

            pub fn nvars(&self) -> usize {
                self.0.nvars
            }

            pub fn degree(&self) -> usize {
                self.0.degree
            }

            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }

            pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
                self.0.comps.iter()
            }

            pub fn component(&self, subset: &[usize]) -> Polynomial {
                self.0
                    .comps
                    .get(subset)
                    .cloned()
                    .unwrap_or_else(|| Polynomial::zero(self.0.nvars))
            }

            pub fn add(&self, other: &Self) -> Self {
                $name(self.0.add(&other.0))
            }

            pub fn sub(&self, other: &Self) -> Self {
                $name(self.0.add(&other.0.neg()))
            }

            pub fn neg(&self) -> Self {
                $name(self.0.neg())
            }

            pub fn scale_poly(&self, p: &Polynomial) -> Self {
                $name(self.0.scale_poly(p))
            }

            pub fn scale(&self, c: &Rat) -> Self {
                let nvars = self.0.nvars;
                self.scale_poly(&Polynomial::constant(nvars, c.clone()))
            }

            /// Graded-anticommutative product within the same kind.
            pub fn wedge(&self, other: &Self) -> Self {
                $name(self.0.wedge(&other.0))
            }

            /// Applies the quotient normal form to every coefficient.
            pub fn map_coeffs(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
                let mut inner = AltComponents::zero(self.0.nvars, self.0.degree);
                for (s, c) in &self.0.comps {
                    inner.add_component(s.clone(), f(c));
                }
                $name(inner)
            }
        }
    };
}

alt_kind!(
    Polyvector,
    "Alternating multi-derivation with polynomial coefficients (degree 0 = a polynomial)."
);
alt_kind!(
    DifferentialForm,
    "Alternating differential form with polynomial coefficients (degree 0 = a polynomial)."
);

impl Polyvector {
    /// Basis derivation `∂_i`.
    pub fn partial(nvars: usize, i: usize) -> Self {
        Self::from_components(nvars, 1, vec![(vec![i], Polynomial::one(nvars))])
    }

    /// Weight of a component `c·∂_S`: weight(c) − Σ weights of S.
    pub fn component_weight(ctx: &WeightedContext, subset: &[usize], coeff_mono: &Mono) -> i64 {
        ctx.mono_weight(coeff_mono) - subset.iter().map(|&i| ctx.weight(i)).sum::<i64>()
    }

    /// Weight of a weighted-homogeneous polyvector, `None` otherwise.
    /// Zero is homogeneous of every weight (reported as `Some(0)`).
    pub fn homogeneous_weight(&self, ctx: &WeightedContext) -> Option<i64> {
        let mut seen: Option<i64> = None;
        for (s, c) in self.components() {
            for (m, _) in c.terms() {
                let w = Self::component_weight(ctx, s, m);
                match seen {
                    None => seen = Some(w),
                    Some(prev) if prev != w => return None,
                    _ => {}
                }
            }
        }
        seen.or(Some(0))
    }

    /// Evaluates the polyvector on the exact differentials of `args`:
    /// `P(da_1 ∧ … ∧ da_k) = Σ_S P_S · det(∂a_r/∂x_{S_c})`.
    pub fn evaluate_on_exacts(&self, args: &[Polynomial]) -> Result<Polynomial, CartanError> {
        if args.len() != self.degree() {
            return Err(CartanError::ArityMismatch {
                degree: self.degree(),
                got: args.len(),
            });
        }
        let nvars = self.nvars();
        let mut out = Polynomial::zero(nvars);
        for (subset, coeff) in self.components() {
            let k = subset.len();
            let entries: Vec<Vec<Polynomial>> = (0..k)
                .map(|r| (0..k).map(|c| args[r].partial(subset[c])).collect())
                .collect();
            out = out.add(&coeff.mul(&poly_det(&entries, nvars)));
        }
        Ok(out)
    }
}

fn poly_det(m: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
    let n = m.len();
    match n {
        0 => Polynomial::one(nvars),
        1 => m[0][0].clone(),
        _ => {
            let mut out = Polynomial::zero(nvars);
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = (1..n)
                    .map(|r| (0..n).filter(|&cc| cc != c).map(|cc| m[r][cc].clone()).collect())
                    .collect();
                let term = m[0][c].mul(&poly_det(&minor, nvars));
                out = if c % 2 == 0 { out.add(&term) } else { out.sub(&term) };
            }
            out
        }
    }
}

impl DifferentialForm {
    /// Basis 1-form `dx_i`.
    pub fn dx(nvars: usize, i: usize) -> Self {
        Self::from_components(nvars, 1, vec![(vec![i], Polynomial::one(nvars))])
    }

    /// Weight of a component `c·dx_S`: weight(c) + Σ weights of S.
    pub fn component_weight(ctx: &WeightedContext, subset: &[usize], coeff_mono: &Mono) -> i64 {
        ctx.mono_weight(coeff_mono) + subset.iter().map(|&i| ctx.weight(i)).sum::<i64>()
    }

    pub fn homogeneous_weight(&self, ctx: &WeightedContext) -> Option<i64> {
        let mut seen: Option<i64> = None;
        for (s, c) in self.components() {
            for (m, _) in c.terms() {
                let w = Self::component_weight(ctx, s, m);
                match seen {
                    None => seen = Some(w),
                    Some(prev) if prev != w => return None,
                    _ => {}
                }
            }
        }
        seen.or(Some(0))
    }

    /// Exterior derivative; satisfies `d∘d = 0` and the graded Leibniz rule.
    pub fn de_rham_d(&self) -> DifferentialForm {
        let nvars = self.nvars();
        let mut out = AltComponents::zero(nvars, self.degree() + 1);
        for (subset, coeff) in self.components() {
            for i in 0..nvars {
                let dc = coeff.partial(i);
                if dc.is_zero() {
                    continue;
                }
                if let Some((merged, sign)) = merge_subsets(&[i], subset) {
                    out.add_component(merged, if sign < 0 { dc.neg() } else { dc });
                }
            }
        }
        DifferentialForm(out)
    }

    /// `df` for a polynomial `f`.
    pub fn exact(f: &Polynomial) -> DifferentialForm {
        DifferentialForm::scalar(f.clone()).de_rham_d()
    }
}

/// Interior product `ι(P)ω`.  For a decomposable `P = v_1 ∧ … ∧ v_j` the
/// convention is to contract with `v_1` first:
/// `ι(v_1 ∧ v_2) = ι(v_2) ∘ ι(v_1)`, which makes the full pairing satisfy
/// `ι(∂_S)(dx_S) = +1`.
pub fn interior_product(
    p: &Polyvector,
    omega: &DifferentialForm,
) -> Result<DifferentialForm, CartanError> {
    if p.degree() > omega.degree() {
        return Err(CartanError::DegreeMismatch {
            expected: omega.degree(),
            got: p.degree(),
        });
    }
    let nvars = p.nvars();
    let mut out = AltComponents::zero(nvars, omega.degree() - p.degree());
    for (sp, cp) in p.components() {
        for (sw, cw) in omega.components() {
            // contract indices of sp, first factor first
            let mut current: Vec<usize> = sw.clone();
            let mut sign = 1i32;
            let mut ok = true;
            for &i in sp.iter() {
                match current.iter().position(|&x| x == i) {
                    Some(pos) => {
                        if pos % 2 == 1 {
                            sign = -sign;
                        }
                        current.remove(pos);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut coeff = cp.mul(cw);
            if sign < 0 {
                coeff = coeff.neg();
            }
            out.add_component(current, coeff);
        }
    }
    Ok(DifferentialForm(out))
}

/// The musical isomorphism attached to a nondegenerate bivector with
/// constant determinant.  Degree 1 sends `v ↦ ι(v)ω` where `ω` is the 2-form
/// with `ω(H_f, H_g) = {f, g}` (coefficient matrix `−Π⁻¹` for the bivector
/// matrix `Π`); higher degrees are the exterior powers.  A homogeneous
/// degree-`i` polyvector of weight `w` maps to a form of weight `w + i·l`.
pub struct MusicalMap {
    nvars: usize,
    /// rows of the 2-form matrix: musical(∂_k) = Σ_j omega[k][j] dx_j
    omega: Vec<Vec<Polynomial>>,
    /// rows of the inverse: musical⁻¹(dx_k) = Σ_j omega_inv[k][j] ∂_j
    omega_inv: Vec<Vec<Polynomial>>,
}

impl MusicalMap {
    pub fn new(theta: &Polyvector) -> Result<Self, CartanError> {
        if theta.degree() != 2 {
            return Err(CartanError::NotABivector(theta.degree()));
        }
        let n = theta.nvars();
        // full antisymmetric coefficient matrix Π
        let mut pi = vec![vec![Polynomial::zero(n); n]; n];
        for (s, c) in theta.components() {
            pi[s[0]][s[1]] = c.clone();
            pi[s[1]][s[0]] = c.neg();
        }
        let det = poly_det(&pi, n);
        let det_c = match det.as_constant() {
            Some(c) if !c.is_zero() => c,
            _ => return Err(CartanError::NonConstantDeterminant),
        };
        // Π⁻¹ = adj(Π)/det;  ω = −Π⁻¹,  ω⁻¹ = −Π
        let mut omega = vec![vec![Polynomial::zero(n); n]; n];
        let inv_det = det_c.recip();
        for r in 0..n {
            for c in 0..n {
                // adj(Π)[r][c] = (−1)^{r+c} · minor(c, r)
                let minor: Vec<Vec<Polynomial>> = (0..n)
                    .filter(|&i| i != c)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| j != r)
                            .map(|j| pi[i][j].clone())
                            .collect()
                    })
                    .collect();
                let mut cof = poly_det(&minor, n).scale(&inv_det);
                if (r + c) % 2 == 1 {
                    cof = cof.neg();
                }
                omega[r][c] = cof.neg();
            }
        }
        let omega_inv = (0..n)
            .map(|r| (0..n).map(|c| pi[r][c].neg()).collect())
            .collect();
        Ok(MusicalMap {
            nvars: n,
            omega,
            omega_inv,
        })
    }

    fn map_generic(
        nvars: usize,
        rows: &[Vec<Polynomial>],
        degree: usize,
        comps: Vec<(&Vec<usize>, &Polynomial)>,
    ) -> AltComponents {
        let mut out = AltComponents::zero(nvars, degree);
        for (subset, coeff) in comps {
            // exterior product of the images of the basis directions
            let mut acc = AltComponents::zero(nvars, 0);
            acc.add_component(vec![], coeff.clone());
            for &k in subset.iter() {
                let mut img = AltComponents::zero(nvars, 1);
                for (j, entry) in rows[k].iter().enumerate() {
                    if !entry.is_zero() {
                        img.add_component(vec![j], entry.clone());
                    }
                }
                acc = acc.wedge(&img);
            }
            for (s, c) in acc.comps {
                out.add_component(s, c);
            }
        }
        out
    }

    pub fn to_form(&self, p: &Polyvector) -> DifferentialForm {
        DifferentialForm(Self::map_generic(
            self.nvars,
            &self.omega,
            p.degree(),
            p.components().collect(),
        ))
    }

    pub fn to_polyvector(&self, w: &DifferentialForm) -> Polyvector {
        Polyvector(Self::map_generic(
            self.nvars,
            &self.omega_inv,
            w.degree(),
            w.components().collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::{parse_polynomial, WeightedContext};

    fn ctx() -> WeightedContext {
        WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, &ctx()).unwrap()
    }

    #[test]
    fn wedge_basics() {
        let dx = Polyvector::partial(2, 0);
        let dy = Polyvector::partial(2, 1);
        let w = dx.wedge(&dy);
        assert_eq!(w.component(&[0, 1]), p("1"));
        assert!(dx.wedge(&dx).is_zero());
        let a = dx.scale_poly(&p("x"));
        let b = dy.scale_poly(&p("y"));
        assert_eq!(a.wedge(&b).component(&[0, 1]), p("x*y"));
        // graded anticommutativity for degree-1 factors
        assert_eq!(a.wedge(&b), b.wedge(&a).neg());
    }

    #[test]
    fn evaluate_on_exacts_examples() {
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], p("1"))]);
        assert_eq!(theta.evaluate_on_exacts(&[p("x"), p("y")]).unwrap(), p("1"));
        assert_eq!(
            theta.evaluate_on_exacts(&[p("x^2"), p("y")]).unwrap(),
            p("2*x")
        );
        assert!(theta.evaluate_on_exacts(&[p("x"), p("x")]).unwrap().is_zero());
        assert!(theta.evaluate_on_exacts(&[p("x")]).is_err());
    }

    #[test]
    fn de_rham_examples() {
        // d(x dy) = dx ∧ dy
        let xdy = DifferentialForm::dx(2, 1).scale_poly(&p("x"));
        assert_eq!(xdy.de_rham_d().component(&[0, 1]), p("1"));
        // d(xy dx) = −x dx ∧ dy
        let xydx = DifferentialForm::dx(2, 0).scale_poly(&p("x*y"));
        assert_eq!(xydx.de_rham_d().component(&[0, 1]), p("-x"));
        // d(df) = 0
        let df = DifferentialForm::exact(&p("x^3*y"));
        assert!(df.de_rham_d().is_zero());
    }

    #[test]
    fn interior_product_examples() {
        let dxdy = DifferentialForm::dx(2, 0).wedge(&DifferentialForm::dx(2, 1));
        let ix = interior_product(&Polyvector::partial(2, 0), &dxdy).unwrap();
        assert_eq!(ix.component(&[1]), p("1"));
        let iy = interior_product(&Polyvector::partial(2, 1), &dxdy).unwrap();
        assert_eq!(iy.component(&[0]), p("-1"));
        let full = interior_product(
            &Polyvector::partial(2, 0).wedge(&Polyvector::partial(2, 1)),
            &dxdy,
        )
        .unwrap();
        assert_eq!(full.component(&[]), p("1"));
        // degree mismatch
        assert!(interior_product(
            &Polyvector::partial(2, 0).wedge(&Polyvector::partial(2, 1)),
            &DifferentialForm::dx(2, 0)
        )
        .is_err());
    }

    #[test]
    fn musical_roundtrip() {
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], p("1"))]);
        let mus = MusicalMap::new(&theta).unwrap();
        let v = Polyvector::partial(2, 0);
        let form = mus.to_form(&v);
        // ω = dx∧dy, so musical(∂x) = ι(∂x)(dx∧dy) = dy
        assert_eq!(form.component(&[1]), p("1"));
        assert!(form.component(&[0]).is_zero());
        assert_eq!(mus.to_polyvector(&form), v);

        let biv = Polyvector::from_components(2, 2, vec![(vec![0, 1], p("x*y + 1"))]);
        let back = mus.to_polyvector(&mus.to_form(&biv));
        assert_eq!(back, biv);

        // non-constant determinant is rejected
        let bad = Polyvector::from_components(2, 2, vec![(vec![0, 1], p("x"))]);
        assert!(matches!(
            MusicalMap::new(&bad),
            Err(CartanError::NonConstantDeterminant)
        ));
    }

    #[test]
    fn iota_composition_convention() {
        // ι(a∧b) = ι(b)∘ι(a): contract with the first factor first
        let dxdy = DifferentialForm::dx(2, 0).wedge(&DifferentialForm::dx(2, 1));
        let a = Polyvector::partial(2, 0);
        let b = Polyvector::partial(2, 1);
        let lhs = interior_product(&a.wedge(&b), &dxdy).unwrap();
        let rhs = interior_product(&b, &interior_product(&a, &dxdy).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
