//! Weight slices of the truncated total complex `(d + δ)` and their
//! cohomology dimensions.
//!
//! The vertical `d` preserves total input weight and factor count; `δ`
//! raises the factor count by one and lowers the cochain weight
//! (value minus input) by `l`.  The invariant `κ = (value − input) + s·l`
//! is therefore constant along the total complex; a slice collects, per
//! spot, the coordinates (basis key, value monomial) with value weight
//! `input + κ − s·l`.
//!
//! Truncation at `D` keeps inputs of total weight ≤ D: both differentials
//! only consult values on inputs of equal or smaller weight, so this is a
//! well-defined finite complex.  Stability is reported empirically by
//! comparing dimensions at `D` and `D − 1`.

use super::chains::{ChainBases, TruncationError};
use super::cochain::{
    apply_diff_terms, expand_d, expand_delta, Cochain, DiffTerm, Key, Spot, SpotKeys,
};
use crate::exactlinalg::SparseIntMat;
use crate::gradedpoly::{Mono, Polynomial, Rat};
use crate::poisson::PoissonStructure;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Shared chain bases and key enumerations for one structure at one
/// truncation bound.
#[derive(Debug)]
pub struct Truncation {
    pub d_max: i64,
    pub bases: ChainBases,
    spots: BTreeMap<Spot, SpotKeys>,
}

impl Truncation {
    pub fn new(ps: &PoissonStructure, d_max: i64) -> Self {
        let bases = ChainBases::build(ps, 3, d_max);
        let spots = [Spot::C1, Spot::C2, Spot::C11, Spot::C3, Spot::C21, Spot::C111]
            .into_iter()
            .map(|s| (s, SpotKeys::build(&bases, s, d_max)))
            .collect();
        Truncation { d_max, bases, spots }
    }

    pub fn keys(&self, spot: Spot) -> &SpotKeys {
        &self.spots[&spot]
    }

    pub fn key_weight(&self, key: &Key) -> i64 {
        key.iter()
            .map(|&(n, id)| self.bases.basis_weight(n, id))
            .sum()
    }
}

/// Coordinates of one spot inside a `κ`-slice.
#[derive(Debug)]
pub struct SpotCoords {
    pub spot: Spot,
    /// (key index within the spot enumeration, value monomial)
    pub coords: Vec<(usize, Mono)>,
    index: BTreeMap<(usize, Mono), usize>,
}

impl SpotCoords {
    fn build(ps: &PoissonStructure, trunc: &Truncation, spot: Spot, kappa: i64, d_eff: i64) -> Self {
        let ctx = ps.ctx();
        let l = ctx.bracket_weight_l();
        let omega = kappa - (spot.factor_count() as i64) * l;
        let keys = trunc.keys(spot);
        let mut coords = Vec::new();
        for (ki, w) in keys.weights.iter().enumerate() {
            if *w > d_eff {
                continue;
            }
            let u = *w + omega;
            for m in ctx.monomials_of_weight(u, ps.quotient()) {
                coords.push((ki, m));
            }
        }
        let index = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        SpotCoords { spot, coords, index }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, key_idx: usize, mono: &Mono) -> Option<usize> {
        self.index.get(&(key_idx, mono.clone())).copied()
    }

    /// Materializes a coordinate vector as a cochain.
    pub fn cochain_from_coords(&self, trunc: &Truncation, nvars: usize, v: &[(usize, Rat)]) -> Cochain {
        let keys = &trunc.keys(self.spot).keys;
        let mut out = Cochain::zero(self.spot);
        for (ci, c) in v {
            let (ki, m) = &self.coords[*ci];
            let key = keys[*ki].clone();
            let mut val = out.value(&key, nvars);
            val.add_term(m.clone(), c.clone());
            out.set(key, val);
        }
        out
    }
}

/// One `κ`-slice of the total complex at an effective input-weight cutoff.
#[derive(Debug)]
pub struct TotalSlice {
    pub kappa: i64,
    pub d_eff: i64,
    /// spaces[t−1] = coordinate spaces of total degree t, one per spot
    pub spaces: Vec<Vec<SpotCoords>>,
}

impl TotalSlice {
    pub fn build(ps: &PoissonStructure, trunc: &Truncation, kappa: i64, d_eff: i64) -> Self {
        let spaces = (1..=3usize)
            .map(|t| {
                Spot::at_total(t)
                    .iter()
                    .map(|&s| SpotCoords::build(ps, trunc, s, kappa, d_eff))
                    .collect()
            })
            .collect();
        TotalSlice { kappa, d_eff, spaces }
    }

    pub fn dim(&self, total: usize) -> usize {
        self.spaces[total - 1].iter().map(|s| s.len()).sum()
    }

    fn col_of(&self, total: usize, spot: Spot, key_idx: usize, mono: &Mono) -> Option<usize> {
        let mut offset = 0;
        for sc in &self.spaces[total - 1] {
            if sc.spot == spot {
                return sc.position(key_idx, mono).map(|p| offset + p);
            }
            offset += sc.len();
        }
        None
    }

    /// Sparse rows of the total differential from degree `t` to `t + 1`.
    pub fn matrix(
        &self,
        ps: &PoissonStructure,
        trunc: &Truncation,
        t: usize,
    ) -> Result<Vec<Vec<(usize, Rat)>>, TruncationError> {
        let ctx = ps.ctx();
        let l = ctx.bracket_weight_l();
        let mut rows: Vec<Vec<(usize, Rat)>> = Vec::new();
        for tgt in &self.spaces[t] {
            // rows for this spot, indexed in coordinate order
            let keys = trunc.keys(tgt.spot);
            // group target coords by key
            let mut per_key: BTreeMap<usize, Vec<(usize, Mono)>> = BTreeMap::new();
            for (local, (ki, m)) in tgt.coords.iter().enumerate() {
                per_key.entry(*ki).or_default().push((local, m.clone()));
            }
            let mut local_rows: Vec<BTreeMap<usize, Rat>> =
                vec![BTreeMap::new(); tgt.coords.len()];
            for (&ki, monos) in &per_key {
                let key = &keys.keys[ki];
                let mono_index: BTreeMap<&Mono, usize> =
                    monos.iter().map(|(local, m)| (m, *local)).collect();
                let mut terms = expand_d(ps, &trunc.bases, key)?;
                terms.extend(expand_delta(ps, &trunc.bases, key)?);
                for term in &terms {
                    let (spot, skey, coeff, is_bracket, aux) = match term {
                        DiffTerm::Plain { spot, key, coeff, mult } => {
                            (*spot, key, coeff, false, mult)
                        }
                        DiffTerm::Bracket { spot, key, coeff, with } => {
                            (*spot, key, coeff, true, with)
                        }
                    };
                    let src_keys = trunc.keys(spot);
                    let ski = match src_keys.position(skey) {
                        Some(p) => p,
                        None => continue,
                    };
                    let v = src_keys.weights[ski];
                    if v > self.d_eff {
                        continue;
                    }
                    let omega_src = self.kappa - (spot.factor_count() as i64) * l;
                    let u = v + omega_src;
                    if u < 0 {
                        continue;
                    }
                    for m in ctx.monomials_of_weight(u, ps.quotient()) {
                        let contrib = if is_bracket {
                            ps.bracket(&Polynomial::monomial(aux), &Polynomial::monomial(&m))
                                .scale(coeff)
                        } else {
                            ps.nf(
                                &Polynomial::monomial(aux)
                                    .mul(&Polynomial::monomial(&m))
                                    .scale(coeff),
                            )
                        };
                        if contrib.is_zero() {
                            continue;
                        }
                        let col = match self.col_of(t, spot, ski, &m) {
                            Some(c) => c,
                            None => continue,
                        };
                        for (tm, tc) in contrib.terms() {
                            if let Some(&local) = mono_index.get(tm) {
                                let row = &mut local_rows[local];
                                let e = row.entry(col).or_insert_with(Rat::zero);
                                *e += tc;
                                if e.is_zero() {
                                    row.remove(&col);
                                }
                            }
                        }
                    }
                }
            }
            rows.extend(
                local_rows
                    .into_iter()
                    .map(|r| r.into_iter().collect::<Vec<_>>()),
            );
        }
        Ok(rows)
    }
}

pub fn rank_of_rows(rows: &[Vec<(usize, Rat)>], cols: usize) -> usize {
    let mut m = SparseIntMat::new(cols.max(1));
    for r in rows {
        m.push_rat_row(r);
    }
    m.rank()
}

/// Truncated total-complex cohomology dimension at total degree `i`
/// (1 or 2), LP-convention weight `w` (slice `κ = w + i·l`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalHp {
    pub dim: usize,
    pub prev_dim: usize,
    pub stable: bool,
    pub kappa: i64,
    /// dimension of the truncated total-degree-`i` cochain space
    pub cochain_dim: usize,
}

pub fn total_hp(
    ps: &PoissonStructure,
    trunc: &Truncation,
    i: usize,
    w: i64,
    d_eff: i64,
) -> Result<TotalHp, TruncationError> {
    assert!(i == 1 || i == 2, "total_hp computes HP¹ and HP² only");
    let l = ps.ctx().bracket_weight_l();
    let kappa = w + (i as i64) * l;
    let (dim, cochain_dim) = total_hp_at(ps, trunc, i, kappa, d_eff)?;
    let (prev_dim, _) = total_hp_at(ps, trunc, i, kappa, d_eff - 1)?;
    Ok(TotalHp {
        dim,
        prev_dim,
        stable: dim == prev_dim,
        kappa,
        cochain_dim,
    })
}

fn total_hp_at(
    ps: &PoissonStructure,
    trunc: &Truncation,
    i: usize,
    kappa: i64,
    d_eff: i64,
) -> Result<(usize, usize), TruncationError> {
    let slice = TotalSlice::build(ps, trunc, kappa, d_eff);
    let out_rank = {
        let rows = slice.matrix(ps, trunc, i)?;
        rank_of_rows(&rows, slice.dim(i))
    };
    let kernel = slice.dim(i) - out_rank;
    let image = if i >= 2 {
        let rows = slice.matrix(ps, trunc, i - 1)?;
        rank_of_rows(&rows, slice.dim(i - 1))
    } else {
        0
    };
    Ok((kernel - image, slice.dim(i)))
}

/// The axis coboundary `d` applied to a single-column cochain
/// (`Hom(ch_n) → Hom(ch_{n+1})` for n = 1, 2, and
/// `Hom(∧²ch_1) → Hom(ch_2⊗ch_1)`).
pub fn coboundary_d(
    ps: &PoissonStructure,
    trunc: &Truncation,
    f: &Cochain,
) -> Result<Option<Cochain>, TruncationError> {
    let target = match f.spot {
        Spot::C1 => Spot::C2,
        Spot::C2 => Spot::C3,
        Spot::C11 => Spot::C21,
        _ => return Ok(None),
    };
    let mut out = Cochain::zero(target);
    for key in &trunc.keys(target).keys {
        let terms = expand_d(ps, &trunc.bases, key)?;
        let val = apply_diff_terms(ps, &terms, f);
        out.set(key.clone(), val);
    }
    Ok(Some(out))
}

/// The double-complex coboundary `δ` on every realized source spot.
pub fn coboundary_delta(
    ps: &PoissonStructure,
    trunc: &Truncation,
    f: &Cochain,
) -> Result<Option<Cochain>, TruncationError> {
    let target = match f.spot {
        Spot::C1 => Spot::C11,
        Spot::C2 => Spot::C21,
        Spot::C11 => Spot::C111,
        _ => return Ok(None),
    };
    let mut out = Cochain::zero(target);
    for key in &trunc.keys(target).keys {
        let terms = expand_delta(ps, &trunc.bases, key)?;
        let val = apply_diff_terms(ps, &terms, f);
        out.set(key.clone(), val);
    }
    Ok(Some(out))
}

/// Applies `d + δ` to a cochain at total degree 1 or 2, returning the
/// components on every realized target spot.
pub fn total_coboundary(
    ps: &PoissonStructure,
    trunc: &Truncation,
    f: &Cochain,
) -> Result<Vec<Cochain>, TruncationError> {
    let mut out = Vec::new();
    if let Some(c) = coboundary_d(ps, trunc, f)? {
        out.push(c);
    }
    if let Some(c) = coboundary_delta(ps, trunc, f)? {
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::Polyvector;
    use crate::gradedpoly::{parse_polynomial, WeightedContext};

    fn symplectic2() -> PoissonStructure {
        let ctx = WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap();
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], Polynomial::one(2))]);
        PoissonStructure::new(ctx, theta, None).unwrap()
    }

    fn mono(ps: &PoissonStructure, s: &str) -> Mono {
        let p = parse_polynomial(s, ps.ctx()).unwrap();
        let m = p.terms().next().unwrap().0.clone();
        m
    }

    fn key1(trunc: &Truncation, ps: &PoissonStructure, s: &str) -> Key {
        let m = mono(ps, s);
        let id = (0..trunc.bases.basis_len(1))
            .find(|&i| trunc.bases.basis_tensor(1, i)[0] == m)
            .unwrap();
        vec![(1, id)]
    }

    #[test]
    fn d1_of_identity_cochain() {
        // f = id on A: (d¹f)(a⊗b) = a·f(b) − f(ab) + f(a)·b = ab
        let ps = symplectic2();
        let trunc = Truncation::new(&ps, 4);
        let mut f = Cochain::zero(Spot::C1);
        for id in 0..trunc.bases.basis_len(1) {
            let m = trunc.bases.basis_tensor(1, id)[0].clone();
            f.set(vec![(1, id)], Polynomial::monomial(&m));
        }
        let df = coboundary_d(&ps, &trunc, &f).unwrap().unwrap();
        // at (x, y): expect xy
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        let x = mono(&ps, "x");
        let y = mono(&ps, "y");
        let coords2 = trunc.bases.reduce_tensor(&ps, &[x, y]).unwrap();
        let val = df.eval_factors(2, &[(2, coords2)]);
        assert_eq!(val, p("x*y"));
    }

    #[test]
    fn derivations_are_d_cocycles() {
        // f = ∂/∂x is a derivation: d¹f = 0
        let ps = symplectic2();
        let trunc = Truncation::new(&ps, 5);
        let mut f = Cochain::zero(Spot::C1);
        for id in 0..trunc.bases.basis_len(1) {
            let m = trunc.bases.basis_tensor(1, id)[0].clone();
            f.set(vec![(1, id)], Polynomial::monomial(&m).partial(0));
        }
        let df = coboundary_d(&ps, &trunc, &f).unwrap().unwrap();
        assert!(df.is_zero());
    }

    #[test]
    fn delta_example_4i() {
        // δf(a∧b) = {a,f(b)} + {f(a),b} − f({a,b}) for f ∈ Hom(ch₁,A)
        let ps = symplectic2();
        let trunc = Truncation::new(&ps, 5);
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        // f = identity cochain
        let mut f = Cochain::zero(Spot::C1);
        for id in 0..trunc.bases.basis_len(1) {
            let m = trunc.bases.basis_tensor(1, id)[0].clone();
            f.set(vec![(1, id)], Polynomial::monomial(&m));
        }
        let delta_f = coboundary_delta(&ps, &trunc, &f).unwrap().unwrap();
        // δ(id)(a∧b) = {a,b} + {a,b} − {a,b} = {a,b}; at (x,y): 1
        let kx = key1(&trunc, &ps, "x")[0];
        let ky = key1(&trunc, &ps, "y")[0];
        let one = Rat::from_integer(1.into());
        let val = delta_f.eval_factors(
            2,
            &[(1, vec![(kx.1, one.clone())]), (1, vec![(ky.1, one)])],
        );
        assert_eq!(val, p("1"));
    }

    #[test]
    fn d_squared_and_total_square_vanish() {
        let ps = symplectic2();
        let trunc = Truncation::new(&ps, 5);
        // pseudorandomish C1 cochain
        let mut f = Cochain::zero(Spot::C1);
        for id in 0..trunc.bases.basis_len(1) {
            let w = trunc.bases.basis_weight(1, id);
            let m = trunc.bases.basis_tensor(1, id)[0].clone();
            let val = Polynomial::monomial(&m)
                .mul(&Polynomial::monomial(&m))
                .scale(&Rat::from_integer(((id % 5) as i64 - 2).into()));
            if w <= 3 {
                f.set(vec![(1, id)], val);
            }
        }
        let df = coboundary_d(&ps, &trunc, &f).unwrap().unwrap();
        let ddf = coboundary_d(&ps, &trunc, &df).unwrap().unwrap();
        assert!(ddf.is_zero(), "d² ≠ 0");
        let delta_f = coboundary_delta(&ps, &trunc, &f).unwrap().unwrap();
        let delta_delta_f = coboundary_delta(&ps, &trunc, &delta_f).unwrap().unwrap();
        assert!(delta_delta_f.is_zero(), "δ² ≠ 0");
        // anticommutation: dδf + δdf = 0 on C21
        let d_delta = coboundary_d(&ps, &trunc, &delta_f).unwrap().unwrap();
        let delta_d = coboundary_delta(&ps, &trunc, &df).unwrap().unwrap();
        assert!(d_delta.add(&delta_d).is_zero(), "dδ + δd ≠ 0");
    }

    #[test]
    fn hp1_matches_lp_on_symplectic_plane() {
        let ps = symplectic2();
        let trunc = Truncation::new(&ps, 6);
        // positive-complex HP¹(w) = w + 3 on the symplectic plane
        for w in [-1i64, 0, 1] {
            let hp = total_hp(&ps, &trunc, 1, w, 6).unwrap();
            assert_eq!(hp.dim as i64, w + 3, "HP¹ at weight {w}");
            assert!(hp.stable);
        }
    }
}
