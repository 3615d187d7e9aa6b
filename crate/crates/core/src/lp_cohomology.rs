//! The Lichnerowicz–Poisson complex: the explicit coboundary on polyvector
//! fields, weight-graded slice matrices, cohomology dimensions, and the
//! comparison with the truncated de Rham complex through the musical map.
//!
//! The coboundary lowers weight by `l` while raising degree by one, so a
//! slice is indexed by the invariant `W = w + i·l`, constant along the
//! complex; the degree-`i` spot of slice `W` holds weight-`(W − i·l)`
//! polyvectors.
//!
//! The classical complex starts at degree 1; the degree-0 extension (whose
//! kernel is the Casimirs and whose image is spanned by Hamiltonian fields)
//! is exposed separately and labeled `Extended`.

use crate::cartan::{CartanError, DifferentialForm, MusicalMap, Polyvector};
use crate::exactlinalg::RationalMatrix;
use crate::gradedpoly::{Mono, Polynomial, Rat, WeightedContext};
use crate::poisson::PoissonStructure;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("structure is not weighted-homogeneous for the declared bracket weight")]
    NotHomogeneous,
    #[error("musical isomorphism unavailable: {0}")]
    MusicalUnavailable(#[from] CartanError),
    #[error("degree {0} is not part of the {1} complex")]
    InvalidDegree(usize, &'static str),
    #[error("δ∘δ ≠ 0 at degree {0}, weight {1}: the bivector violates the Jacobi identity")]
    NotAComplex(usize, i64),
}

/// Which version of the complex a dimension refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexVariant {
    /// Degrees ≥ 1: the classical Lichnerowicz-Poisson complex.
    Positive,
    /// Degrees ≥ 0; degree 0 contributes Casimirs and Hamiltonian images.
    Extended,
}

/// The Lichnerowicz–Poisson coboundary.  For a degree-`i` polyvector the
/// value on `da_1 ∧ … ∧ da_{i+1}` is
/// `Σ_j (−1)^{j+1} {a_j, P(… ǎ_j …)} + Σ_{j<k} (−1)^{j+k} P({a_j,a_k}, … ǎ_j … ǎ_k …)`,
/// reconstructed componentwise from evaluations on coordinate tuples.
pub fn lp_differential(ps: &PoissonStructure, p: &Polyvector) -> Polyvector {
    let n = ps.nvars();
    let out_degree = p.degree() + 1;
    let mut comps: Vec<(Vec<usize>, Polynomial)> = Vec::new();
    for subset in subsets(n, out_degree) {
        let coords: Vec<Polynomial> = subset
            .iter()
            .map(|&v| Polynomial::variable(n, v))
            .collect();
        let mut val = Polynomial::zero(n);
        for j in 0..coords.len() {
            let rest: Vec<Polynomial> = coords
                .iter()
                .enumerate()
                .filter(|&(idx, _)| idx != j)
                .map(|(_, a)| a.clone())
                .collect();
            let inner = p.evaluate_on_exacts(&rest).unwrap();
            let term = ps.bracket(&coords[j], &ps.nf(&inner));
            val = if j % 2 == 0 { val.add(&term) } else { val.sub(&term) };
        }
        for j in 0..coords.len() {
            for k in (j + 1)..coords.len() {
                let br = ps.bracket(&coords[j], &coords[k]);
                if br.is_zero() {
                    continue;
                }
                let mut args = vec![br];
                args.extend(
                    coords
                        .iter()
                        .enumerate()
                        .filter(|&(idx, _)| idx != j && idx != k)
                        .map(|(_, a)| a.clone()),
                );
                let term = ps.nf(&p.evaluate_on_exacts(&args).unwrap());
                val = if (j + k) % 2 == 0 { val.add(&term) } else { val.sub(&term) };
            }
        }
        val = ps.nf(&val);
        if !val.is_zero() {
            comps.push((subset, val));
        }
    }
    Polyvector::from_components(n, out_degree, comps)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next k-combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in (i + 1)..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Ordered monomial-polyvector basis of one graded spot.
#[derive(Debug, Clone)]
pub struct PolyvectorBasis {
    pub degree: usize,
    pub weight: i64,
    pub elems: Vec<(Vec<usize>, Mono)>,
    index: BTreeMap<(Vec<usize>, Mono), usize>,
}

impl PolyvectorBasis {
    /// All monomial polyvectors `m·∂_S` of the given degree and weight
    /// (normal-form monomials when a quotient is present).  Subsets ascend
    /// lexicographically; monomials follow the graded-lex basis order.
    pub fn build(ps: &PoissonStructure, degree: usize, weight: i64) -> Self {
        let ctx = ps.ctx();
        let n = ctx.nvars();
        let mut elems = Vec::new();
        for subset in subsets(n, degree) {
            let coeff_weight = weight + subset.iter().map(|&i| ctx.weight(i)).sum::<i64>();
            for m in ctx.monomials_of_weight(coeff_weight, ps.quotient()) {
                elems.push((subset.clone(), m));
            }
        }
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        PolyvectorBasis {
            degree,
            weight,
            elems,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn element(&self, i: usize, nvars: usize) -> Polyvector {
        let (s, m) = &self.elems[i];
        Polyvector::from_components(nvars, self.degree, vec![(s.clone(), Polynomial::monomial(m))])
    }

    /// Expands a polyvector in this basis; panics if a component falls
    /// outside the spot (callers keep slices weight-consistent).
    pub fn coords(&self, p: &Polyvector) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.elems.len()];
        for (s, c) in p.components() {
            for (m, coeff) in c.terms() {
                let idx = self
                    .index
                    .get(&(s.clone(), m.clone()))
                    .unwrap_or_else(|| panic!("component outside graded spot"));
                v[*idx] = coeff.clone();
            }
        }
        v
    }
}

/// A weight slice of the complex: bases per degree and the coboundary
/// matrices between consecutive spots.
#[derive(Debug)]
pub struct SliceComplex {
    pub invariant: i64,
    pub degrees: Vec<usize>,
    pub bases: Vec<PolyvectorBasis>,
    /// `diffs[k]` maps `bases[k]` to `bases[k+1]`.
    pub diffs: Vec<RationalMatrix>,
}

impl SliceComplex {
    /// `δ∘δ = 0` on every stored pair of consecutive matrices.
    pub fn verify_exactness(&self) -> bool {
        self.diffs
            .windows(2)
            .all(|w| w[1].matmul(&w[0]).is_zero())
    }

    pub fn basis_for_degree(&self, degree: usize) -> Option<&PolyvectorBasis> {
        self.degrees
            .iter()
            .position(|&d| d == degree)
            .map(|i| &self.bases[i])
    }
}

/// Builds the slice of invariant `W` over an inclusive degree range.
pub fn build_slice(
    ps: &PoissonStructure,
    invariant: i64,
    degrees: std::ops::RangeInclusive<usize>,
) -> Result<SliceComplex, LpError> {
    if !ps.is_weighted_homogeneous() {
        return Err(LpError::NotHomogeneous);
    }
    let ctx = ps.ctx();
    let l = ctx.bracket_weight_l();
    let n = ctx.nvars();
    let degs: Vec<usize> = degrees.collect();
    let bases: Vec<PolyvectorBasis> = degs
        .iter()
        .map(|&i| PolyvectorBasis::build(ps, i, invariant - (i as i64) * l))
        .collect();
    let mut diffs = Vec::new();
    for k in 0..degs.len().saturating_sub(1) {
        let (src, dst) = (&bases[k], &bases[k + 1]);
        let mut m = RationalMatrix::zero(dst.len(), src.len());
        for c in 0..src.len() {
            let image = lp_differential(ps, &src.element(c, n));
            for (r, val) in dst.coords(&image).into_iter().enumerate() {
                if !val.is_zero() {
                    m.set(r, c, val);
                }
            }
        }
        diffs.push(m);
    }
    Ok(SliceComplex {
        invariant,
        degrees: degs,
        bases,
        diffs,
    })
}

/// Cohomology dimension of the chosen complex at degree `i`, weight `w`
/// (the weight of the degree-`i` spot itself).
pub fn hp_dimension(
    ps: &PoissonStructure,
    i: usize,
    w: i64,
    variant: ComplexVariant,
) -> Result<usize, LpError> {
    let first_degree = match variant {
        ComplexVariant::Positive => 1usize,
        ComplexVariant::Extended => 0usize,
    };
    if i < first_degree {
        return Err(LpError::InvalidDegree(
            i,
            match variant {
                ComplexVariant::Positive => "positive",
                ComplexVariant::Extended => "extended",
            },
        ));
    }
    let l = ps.ctx().bracket_weight_l();
    let invariant = w + (i as i64) * l;
    let lo = i.max(first_degree + 1) - 1; // i−1 clamped to the complex start
    let slice = build_slice(ps, invariant, lo..=(i + 1))?;
    let pos = slice.degrees.iter().position(|&d| d == i).unwrap();
    let dim_i = slice.bases[pos].len();
    let rank_out = slice.diffs[pos].rank();
    let kernel = dim_i - rank_out;
    let image_in = if pos > 0 { slice.diffs[pos - 1].rank() } else { 0 };
    // image ⊄ kernel can only happen when the Jacobi check was deferred
    // and actually fails
    kernel.checked_sub(image_in).ok_or(LpError::NotAComplex(i, w))
}

// ---------------------------------------------------------------------------
// truncated de Rham oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct FormBasis {
    elems: Vec<(Vec<usize>, Mono)>,
    index: BTreeMap<(Vec<usize>, Mono), usize>,
}

impl FormBasis {
    fn build(ctx: &WeightedContext, degree: usize, weight: i64) -> Self {
        let n = ctx.nvars();
        let mut elems = Vec::new();
        for subset in subsets(n, degree) {
            let coeff_weight = weight - subset.iter().map(|&i| ctx.weight(i)).sum::<i64>();
            for m in ctx.monomials_of_weight(coeff_weight, None) {
                elems.push((subset.clone(), m));
            }
        }
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        FormBasis { elems, index }
    }

    fn coords(&self, f: &DifferentialForm) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.elems.len()];
        for (s, c) in f.components() {
            for (m, coeff) in c.terms() {
                let idx = self.index.get(&(s.clone(), m.clone())).unwrap();
                v[*idx] = coeff.clone();
            }
        }
        v
    }
}

fn derham_matrix(src: &FormBasis, dst: &FormBasis, n: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zero(dst.elems.len(), src.elems.len());
    for (c, (s, mono)) in src.elems.iter().enumerate() {
        let form = DifferentialForm::from_components(
            n,
            s.len(),
            vec![(s.clone(), Polynomial::monomial(mono))],
        );
        let image = form.de_rham_d();
        for (r, val) in dst.coords(&image).into_iter().enumerate() {
            if !val.is_zero() {
                m.set(r, c, val);
            }
        }
    }
    m
}

/// Cohomology dimension of the truncated de Rham complex `(Ω^{≥1}, d)` at
/// the slice matching LP degree `i`, weight `w`: under the musical map the
/// whole LP slice `W = w + i·l` lands in form-weight `W`.  Serves as the
/// independent oracle for `hp_dimension` in the symplectic case.
pub fn derham_slice_dimension(ps: &PoissonStructure, i: usize, w: i64) -> Result<usize, LpError> {
    MusicalMap::new(ps.theta())?; // precondition: musical available
    if i < 1 {
        return Err(LpError::InvalidDegree(i, "truncated de Rham"));
    }
    let ctx = ps.ctx();
    let n = ctx.nvars();
    let weight = w + (i as i64) * ctx.bracket_weight_l();
    let basis_i = FormBasis::build(ctx, i, weight);
    let basis_up = FormBasis::build(ctx, i + 1, weight);
    let rank_out = derham_matrix(&basis_i, &basis_up, n).rank();
    let kernel = basis_i.elems.len() - rank_out;
    let image_in = if i >= 2 {
        let basis_dn = FormBasis::build(ctx, i - 1, weight);
        derham_matrix(&basis_dn, &basis_i, n).rank()
    } else {
        0
    };
    Ok(kernel - image_in)
}

/// `musical(δP) − d(musical(P))`; the musical map is a chain map into the
/// truncated de Rham complex, so this must vanish identically.
pub fn chain_map_residual(
    ps: &PoissonStructure,
    p: &Polyvector,
) -> Result<DifferentialForm, LpError> {
    let mus = MusicalMap::new(ps.theta())?;
    let lhs = mus.to_form(&lp_differential(ps, p));
    let rhs = mus.to_form(p).de_rham_d();
    Ok(lhs.sub(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::{parse_polynomial, WeightedContext};

    fn symplectic2() -> PoissonStructure {
        let ctx = WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap();
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], Polynomial::one(2))]);
        PoissonStructure::new(ctx, theta, None).unwrap()
    }

    fn sl2star() -> PoissonStructure {
        let ctx =
            WeightedContext::new(vec!["e".into(), "f".into(), "h".into()], vec![2, 2, 2], 2)
                .unwrap();
        let p = |s: &str| parse_polynomial(s, &ctx).unwrap();
        let theta = Polyvector::from_components(
            3,
            2,
            vec![
                (vec![0, 1], p("h")),
                (vec![0, 2], p("-2*e")),
                (vec![1, 2], p("2*f")),
            ],
        );
        PoissonStructure::new(ctx, theta, None).unwrap()
    }

    #[test]
    fn lp_differential_examples() {
        let ps = symplectic2();
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        // δ(x∂x) = ∂x∧∂y
        let xdx = Polyvector::from_components(2, 1, vec![(vec![0], p("x"))]);
        let d = lp_differential(&ps, &xdx);
        assert_eq!(d.component(&[0, 1]), p("1"));
        // Hamiltonian fields are cocycles
        let hf = ps.hamiltonian_field(&p("x^3 + x*y"));
        assert!(lp_differential(&ps, &hf).is_zero());
        // δΘ = 0
        assert!(lp_differential(&ps, ps.theta()).is_zero());
        assert!(lp_differential(&sl2star(), sl2star().theta()).is_zero());
    }

    #[test]
    fn slice_bases_counts() {
        let ps = symplectic2();
        // degree 1, weight 0 basis = {x∂x, x∂y, y∂x, y∂y}
        let b = PolyvectorBasis::build(&ps, 1, 0);
        assert_eq!(b.len(), 4);
        // degree 2, weight −2 basis = {∂x∧∂y}
        let b = PolyvectorBasis::build(&ps, 2, -2);
        assert_eq!(b.len(), 1);
        // sl2star degree 0 weight 4: monomials of weight 4 in 3 variables
        let b = PolyvectorBasis::build(&sl2star(), 0, 4);
        assert_eq!(b.len(), 6);
    }

    #[test]
    fn hp_dimension_examples() {
        let ps = symplectic2();
        // extended degree 0: no nonconstant Casimirs
        for w in 1..=4 {
            assert_eq!(hp_dimension(&ps, 0, w, ComplexVariant::Extended).unwrap(), 0);
        }
        // positive complex, degree 1 weight 0 → 3
        assert_eq!(hp_dimension(&ps, 1, 0, ComplexVariant::Positive).unwrap(), 3);
        // sl2star extended degree 0 weight 4 → the Casimir only
        assert_eq!(
            hp_dimension(&sl2star(), 0, 4, ComplexVariant::Extended).unwrap(),
            1
        );
    }

    #[test]
    fn derham_agrees_on_c2() {
        let ps = symplectic2();
        assert_eq!(derham_slice_dimension(&ps, 1, 0).unwrap(), 3);
        for w in -2..=3 {
            for i in 1..=2usize {
                assert_eq!(
                    hp_dimension(&ps, i, w, ComplexVariant::Positive).unwrap(),
                    derham_slice_dimension(&ps, i, w).unwrap(),
                    "degree {i} weight {w}"
                );
            }
        }
    }

    #[test]
    fn chain_map_residual_examples() {
        let ps = symplectic2();
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        let x_dx = Polyvector::from_components(2, 1, vec![(vec![0], p("x"))]);
        assert!(chain_map_residual(&ps, &x_dx).unwrap().is_zero());
        let mixed = Polyvector::from_components(
            2,
            1,
            vec![(vec![0], p("x*y")), (vec![1], p("x^2"))],
        );
        assert!(chain_map_residual(&ps, &mixed).unwrap().is_zero());
    }

    #[test]
    fn slice_exactness() {
        let ps = sl2star();
        let slice = build_slice(&ps, 6, 0..=3).unwrap();
        assert!(slice.verify_exactness());
    }
}
