//! Cochain components of the Poisson double complex, up to total degree 3:
//! `Hom(ch_1)`, `Hom(ch_2)`, `Hom(∧²ch_1)`, `Hom(ch_3)`, `Hom(ch_2⊗ch_1)`,
//! `Hom(∧³ch_1)` — exactly the spots needed for HP¹ and HP² with their
//! cocycle conditions.
//!
//! A cochain stores values on canonical source keys: tuples of chain-basis
//! elements ordered by descending chain degree, then ascending basis id.
//! Reordering mixed products uses the Koszul rule `a·b = (−1)^{pq} b·a`,
//! and a repeated odd factor kills the product.

use super::chains::{harrison_boundary, ChainBases, ChainElem, TensorElem, TruncationError};
use crate::gradedpoly::{Mono, Polynomial, Rat};
use crate::poisson::PoissonStructure;
use std::collections::BTreeMap;

/// One component of the double complex, named by its shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Spot {
    /// Hom(ch_1, A)
    C1,
    /// Hom(ch_2, A)
    C2,
    /// Hom(∧²ch_1, A)
    C11,
    /// Hom(ch_3, A)
    C3,
    /// Hom(ch_2 ⊗ ch_1, A)
    C21,
    /// Hom(∧³ch_1, A)
    C111,
}

impl Spot {
    pub fn shape(&self) -> &'static [usize] {
        match self {
            Spot::C1 => &[1],
            Spot::C2 => &[2],
            Spot::C11 => &[1, 1],
            Spot::C3 => &[3],
            Spot::C21 => &[2, 1],
            Spot::C111 => &[1, 1, 1],
        }
    }

    pub fn total_degree(&self) -> usize {
        self.shape().iter().sum()
    }

    pub fn factor_count(&self) -> usize {
        self.shape().len()
    }

    pub fn at_total(n: usize) -> &'static [Spot] {
        match n {
            1 => &[Spot::C1],
            2 => &[Spot::C2, Spot::C11],
            3 => &[Spot::C3, Spot::C21, Spot::C111],
            _ => &[],
        }
    }

    fn from_degrees(mut degs: Vec<usize>) -> Option<Spot> {
        degs.sort_unstable_by(|a, b| b.cmp(a));
        match degs.as_slice() {
            [1] => Some(Spot::C1),
            [2] => Some(Spot::C2),
            [1, 1] => Some(Spot::C11),
            [3] => Some(Spot::C3),
            [2, 1] => Some(Spot::C21),
            [1, 1, 1] => Some(Spot::C111),
            _ => None,
        }
    }
}

/// Canonical source key: (chain degree, basis id) factors, descending
/// degree then ascending id.
pub type Key = Vec<(usize, usize)>;

/// Sorts a factor tuple into canonical order with the Koszul sign; `None`
/// when a repeated odd factor makes the product zero.
pub fn canonicalize(mut tuple: Vec<(usize, usize)>) -> Option<(Key, i64)> {
    let mut sign = 1i64;
    // insertion sort, tracking the sign of each adjacent transposition
    for i in 1..tuple.len() {
        let mut j = i;
        while j > 0 {
            let a = tuple[j - 1];
            let b = tuple[j];
            let before = (std::cmp::Reverse(a.0), a.1);
            let after = (std::cmp::Reverse(b.0), b.1);
            if before <= after {
                break;
            }
            if a.0 % 2 == 1 && b.0 % 2 == 1 {
                sign = -sign;
            }
            tuple.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in tuple.windows(2) {
        if w[0] == w[1] && w[0].0 % 2 == 1 {
            return None;
        }
    }
    Some((tuple, sign))
}

/// Enumeration of all canonical keys of one spot up to the truncation.
#[derive(Debug)]
pub struct SpotKeys {
    pub spot: Spot,
    pub keys: Vec<Key>,
    pub weights: Vec<i64>,
    index: BTreeMap<Key, usize>,
}

impl SpotKeys {
    pub fn build(bases: &ChainBases, spot: Spot, d_max: i64) -> Self {
        let mut keys: Vec<Key> = Vec::new();
        match spot {
            Spot::C1 | Spot::C2 | Spot::C3 => {
                let n = spot.shape()[0];
                for id in 0..bases.basis_len(n) {
                    if bases.basis_weight(n, id) <= d_max {
                        keys.push(vec![(n, id)]);
                    }
                }
            }
            Spot::C11 => {
                let len = bases.basis_len(1);
                for i in 0..len {
                    let wi = bases.basis_weight(1, i);
                    for j in (i + 1)..len {
                        if wi + bases.basis_weight(1, j) <= d_max {
                            keys.push(vec![(1, i), (1, j)]);
                        }
                    }
                }
            }
            Spot::C21 => {
                for i in 0..bases.basis_len(2) {
                    let wi = bases.basis_weight(2, i);
                    for j in 0..bases.basis_len(1) {
                        if wi + bases.basis_weight(1, j) <= d_max {
                            keys.push(vec![(2, i), (1, j)]);
                        }
                    }
                }
            }
            Spot::C111 => {
                let len = bases.basis_len(1);
                for i in 0..len {
                    let wi = bases.basis_weight(1, i);
                    for j in (i + 1)..len {
                        let wij = wi + bases.basis_weight(1, j);
                        for k in (j + 1)..len {
                            if wij + bases.basis_weight(1, k) <= d_max {
                                keys.push(vec![(1, i), (1, j), (1, k)]);
                            }
                        }
                    }
                }
            }
        }
        let weights = keys
            .iter()
            .map(|k| k.iter().map(|&(n, id)| bases.basis_weight(n, id)).sum())
            .collect();
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        SpotKeys {
            spot,
            keys,
            weights,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, key: &Key) -> Option<usize> {
        self.index.get(key).copied()
    }
}

/// A cochain supported on one spot: values on canonical keys, extended by
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub spot: Spot,
    pub values: BTreeMap<Key, Polynomial>,
}

impl Cochain {
    pub fn zero(spot: Spot) -> Self {
        Cochain {
            spot,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: Key, value: Polynomial) {
        if value.is_zero() {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
    }

    pub fn value(&self, key: &Key, nvars: usize) -> Polynomial {
        self.values
            .get(key)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        assert_eq!(self.spot, other.spot);
        let mut out = self.clone();
        for (k, v) in &other.values {
            let nvars = v.nvars();
            let sum = out.value(k, nvars).add(v);
            out.set(k.clone(), sum);
        }
        out
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        assert_eq!(self.spot, other.spot);
        let mut out = self.clone();
        for (k, v) in &other.values {
            let nvars = v.nvars();
            let diff = out.value(k, nvars).sub(v);
            out.set(k.clone(), diff);
        }
        out
    }

    /// Evaluates on a product of chain factors given by basis coordinates.
    /// Each factor is (chain degree, coordinates); the product distributes,
    /// canonicalizes with Koszul signs and looks values up.
    pub fn eval_factors(&self, nvars: usize, factors: &[(usize, Vec<(usize, Rat)>)]) -> Polynomial {
        let mut out = Polynomial::zero(nvars);
        let mut stack: Vec<(usize, Vec<(usize, usize)>, Rat)> =
            vec![(0, Vec::new(), Rat::from_integer(1.into()))];
        while let Some((pos, tuple, coeff)) = stack.pop() {
            if pos == factors.len() {
                if let Some((key, sign)) = canonicalize(tuple) {
                    if Spot::from_degrees(key.iter().map(|&(n, _)| n).collect()) == Some(self.spot)
                    {
                        if let Some(v) = self.values.get(&key) {
                            let c = if sign >= 0 { coeff } else { -coeff };
                            out = out.add(&v.scale(&c));
                        }
                    }
                }
                continue;
            }
            let (deg, coords) = &factors[pos];
            for (id, c) in coords {
                let mut next = tuple.clone();
                next.push((*deg, *id));
                stack.push((pos + 1, next, &coeff * c));
            }
        }
        out
    }
}

/// The bracket `[f, g]` of two pure tensors through pure shuffles with
/// adjacent contraction: for each `(p,q)`-interleaving keeping both blocks
/// in order, and each position `i` where an `f`-factor is immediately
/// followed by a `g`-factor, the pair contracts to `{f_i, g_j}` with sign
/// `sgn(π)·(−1)^{i+1}`.  Restricted to `ch_1 × ch_1` it is the Poisson
/// bracket.
pub fn chain_bracket(ps: &PoissonStructure, f: &[Mono], g: &[Mono]) -> TensorElem {
    let p = f.len();
    let q = g.len();
    let mut out = TensorElem::zero(p + q - 1);
    // enumerate interleavings: subsets of positions occupied by the f-block
    for positions in combinations(p + q, p) {
        let mut from_f = vec![false; p + q];
        for &pos in &positions {
            from_f[pos] = true;
        }
        let mut inversions = 0usize;
        for (i, &pos) in positions.iter().enumerate() {
            inversions += pos - i;
        }
        let shuffle_sign = if inversions % 2 == 0 { 1i64 } else { -1 };
        // the interleaved sequence of factors
        let mut seq: Vec<&Mono> = Vec::with_capacity(p + q);
        let (mut fi, mut gi) = (0usize, 0usize);
        for &is_f in &from_f {
            if is_f {
                seq.push(&f[fi]);
                fi += 1;
            } else {
                seq.push(&g[gi]);
                gi += 1;
            }
        }
        for i in 0..(p + q - 1) {
            if !(from_f[i] && !from_f[i + 1]) {
                continue;
            }
            let br = ps.bracket(&Polynomial::monomial(seq[i]), &Polynomial::monomial(seq[i + 1]));
            if br.is_zero() {
                continue;
            }
            // position sign (−1)^{i+1} with 1-based i
            let pos_sign = if i % 2 == 0 { 1i64 } else { -1 };
            let total = shuffle_sign * pos_sign;
            let prefix: Vec<Mono> = seq[..i].iter().map(|m| (*m).clone()).collect();
            let suffix: Vec<Mono> = seq[i + 2..].iter().map(|m| (*m).clone()).collect();
            let mut elem = TensorElem::zero(p + q - 1);
            elem.add_poly_slot(&prefix, &br, &suffix, &Rat::from_integer(total.into()));
            for (factors, c) in elem.terms {
                out.add_term(factors, c);
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
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

/// A single linear term of an expanded differential: the target value picks
/// up `coeff · (mult · f(key))` or `coeff · {with, f(key)}`.
#[derive(Debug, Clone)]
pub enum DiffTerm {
    Plain {
        spot: Spot,
        key: Key,
        coeff: Rat,
        mult: Mono,
    },
    Bracket {
        spot: Spot,
        key: Key,
        coeff: Rat,
        with: Mono,
    },
}

/// Expands `(df)(target)` as a linear functional of `f`: the dual of the
/// Harrison boundary extended as a super-derivation over the product.
pub fn expand_d(
    ps: &PoissonStructure,
    bases: &ChainBases,
    target: &Key,
) -> Result<Vec<DiffTerm>, TruncationError> {
    let mut out = Vec::new();
    let degs: Vec<usize> = target.iter().map(|&(n, _)| n).collect();
    for (i, &(n, id)) in target.iter().enumerate() {
        if n < 2 {
            continue; // ∂ vanishes on ch_1 factors
        }
        // super-derivation sign (−1)^{p_1+…+p_{i−1}}
        let prefix_deg: usize = degs[..i].iter().sum();
        let outer_sign = if prefix_deg % 2 == 0 { 1i64 } else { -1 };
        let tensor = bases.basis_tensor(n, id).clone();
        let boundary = harrison_boundary(ps, &ChainElem::single(tensor, unit_mono(ps)));
        for ((factors, module), c) in &boundary.terms {
            // reduce the lowered factor into its chain basis
            let reduced = bases.reduce_tensor(ps, factors)?;
            for (rid, rc) in reduced {
                let mut tuple: Vec<(usize, usize)> = Vec::with_capacity(target.len());
                for (j, &(nj, idj)) in target.iter().enumerate() {
                    if j == i {
                        tuple.push((n - 1, rid));
                    } else {
                        tuple.push((nj, idj));
                    }
                }
                if let Some((key, ksign)) = canonicalize(tuple) {
                    let spot = match Spot::from_degrees(key.iter().map(|&(d, _)| d).collect()) {
                        Some(s) => s,
                        None => continue,
                    };
                    out.push(DiffTerm::Plain {
                        spot,
                        key,
                        coeff: c * &rc * Rat::from_integer((outer_sign * ksign).into()),
                        mult: module.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn unit_mono(ps: &PoissonStructure) -> Mono {
    vec![0; ps.nvars()]
}

/// Expands `(δf)(target)` as a linear functional of `f` per the double
/// complex coboundary
/// `δ(f)(x_1…x_s) = Σ_i (−1)^{σ(i)} tr₁[x_i, f(…x̌_i…)] − Σ_{i<j} (−1)^{τ(i,j)} f([x_i,x_j]…x̌_i…x̌_j…)`
/// with `σ(i) = deg x_i·(deg x_1+…+deg x_{i−1})` and
/// `τ(i,j) = σ(i) + deg x_j·(deg x_1+…+deg x̌_i+…+deg x_{j−1})`.
pub fn expand_delta(
    ps: &PoissonStructure,
    bases: &ChainBases,
    target: &Key,
) -> Result<Vec<DiffTerm>, TruncationError> {
    let mut out = Vec::new();
    let degs: Vec<usize> = target.iter().map(|&(n, _)| n).collect();
    let s = target.len();
    // first sum: only ch_1 factors survive the truncation to ch_1
    for i in 0..s {
        let (n, id) = target[i];
        if n != 1 {
            continue;
        }
        let sigma: usize = degs[i] * degs[..i].iter().sum::<usize>();
        let sign = if sigma % 2 == 0 { 1i64 } else { -1 };
        let rest: Vec<(usize, usize)> = target
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &t)| t)
            .collect();
        if rest.is_empty() {
            continue; // s = 1 has no (s−1)-factor source
        }
        if let Some((key, ksign)) = canonicalize(rest) {
            if let Some(spot) = Spot::from_degrees(key.iter().map(|&(d, _)| d).collect()) {
                out.push(DiffTerm::Bracket {
                    spot,
                    key,
                    coeff: Rat::from_integer((sign * ksign).into()),
                    with: bases.basis_tensor(1, id)[0].clone(),
                });
            }
        }
    }
    // second sum: bracket two factors, feed the rest to f
    for i in 0..s {
        for j in (i + 1)..s {
            let tau = degs[i] * degs[..i].iter().sum::<usize>()
                + degs[j]
                    * (degs[..j].iter().sum::<usize>() - degs[i]);
            let sign = if tau % 2 == 0 { -1i64 } else { 1 }; // global −Σ
            let (ni, idi) = target[i];
            let (nj, idj) = target[j];
            let br = chain_bracket(
                ps,
                &bases.basis_tensor(ni, idi).clone(),
                &bases.basis_tensor(nj, idj).clone(),
            );
            if br.is_zero() {
                continue;
            }
            let rest: Vec<(usize, usize)> = target
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, &t)| t)
                .collect();
            for (factors, c) in &br.terms {
                for (rid, rc) in bases.reduce_tensor(ps, factors)? {
                    let mut tuple = vec![(ni + nj - 1, rid)];
                    tuple.extend(rest.iter().copied());
                    if let Some((key, ksign)) = canonicalize(tuple) {
                        if let Some(spot) =
                            Spot::from_degrees(key.iter().map(|&(d, _)| d).collect())
                        {
                            out.push(DiffTerm::Plain {
                                spot,
                                key,
                                coeff: c * &rc * Rat::from_integer((sign * ksign).into()),
                                mult: unit_mono(ps),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Applies the expanded total differential `d + δ` of `f` at one target key.
pub fn apply_diff_terms(
    ps: &PoissonStructure,
    terms: &[DiffTerm],
    f: &Cochain,
) -> Polynomial {
    let n = ps.nvars();
    let mut out = Polynomial::zero(n);
    for t in terms {
        match t {
            DiffTerm::Plain { spot, key, coeff, mult } => {
                if *spot != f.spot {
                    continue;
                }
                if let Some(v) = f.values.get(key) {
                    let term = ps.nf(&v.mul(&Polynomial::monomial(mult)).scale(coeff));
                    out = out.add(&term);
                }
            }
            DiffTerm::Bracket { spot, key, coeff, with } => {
                if *spot != f.spot {
                    continue;
                }
                if let Some(v) = f.values.get(key) {
                    let br = ps.bracket(&Polynomial::monomial(with), v);
                    out = out.add(&br.scale(coeff));
                }
            }
        }
    }
    ps.nf(&out)
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

    #[test]
    fn bracket_on_ch1_is_poisson() {
        let ps = symplectic2();
        let x = mono(&ps, "x");
        let y = mono(&ps, "y");
        let b = chain_bracket(&ps, &[x.clone()], &[y.clone()]);
        let mut expected = TensorElem::zero(1);
        expected.add_term(vec![mono(&ps, "1")], Rat::from_integer(1.into()));
        assert_eq!(b, expected);
        // antisymmetric on ch_1
        let b2 = chain_bracket(&ps, &[y], &[x]);
        let mut expected2 = TensorElem::zero(1);
        expected2.add_term(vec![mono(&ps, "1")], Rat::from_integer((-1).into()));
        assert_eq!(b2, expected2);
    }

    #[test]
    fn bracket_insertion_expansion() {
        // [x, y⊗z] = {x,y}⊗z + y⊗{x,z}  (three (1,2)-shuffles, one empty)
        let ctx = WeightedContext::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![1, 1, 1],
            2,
        )
        .unwrap();
        let p = |s: &str| parse_polynomial(s, &ctx).unwrap();
        // standard symplectic-like bracket on three variables: {x,y}=1, {x,z}=y, {y,z}=0
        let theta = Polyvector::from_components(
            3,
            2,
            vec![(vec![0, 1], p("1")), (vec![0, 2], p("y"))],
        );
        let ps = PoissonStructure::new_deferred(ctx, theta, None).unwrap();
        let m = |s: &str| mono(&ps, s);
        let b = chain_bracket(&ps, &[m("x")], &[m("y"), m("z")]);
        let mut expected = TensorElem::zero(2);
        // {x,y}⊗z = 1⊗z ; y⊗{x,z} = y⊗y
        expected.add_term(vec![m("1"), m("z")], Rat::from_integer(1.into()));
        expected.add_term(vec![m("y"), m("y")], Rat::from_integer(1.into()));
        assert_eq!(b, expected);
    }

    #[test]
    fn canonicalize_signs() {
        // two odd factors swap with a minus
        let (key, sign) = canonicalize(vec![(1, 5), (1, 2)]).unwrap();
        assert_eq!(key, vec![(1, 2), (1, 5)]);
        assert_eq!(sign, -1);
        // repeated odd factor dies
        assert!(canonicalize(vec![(1, 3), (1, 3)]).is_none());
        // even-odd swap is free
        let (key, sign) = canonicalize(vec![(1, 4), (2, 0)]).unwrap();
        assert_eq!(key, vec![(2, 0), (1, 4)]);
        assert_eq!(sign, 1);
    }
}
