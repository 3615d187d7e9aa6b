//! Truncated Harrison chain modules: weight-graded bases of the shuffle
//! quotients `ch_n = A^{⊗n}/N` together with reduction of arbitrary tensors
//! into those bases.
//!
//! Shuffle generators permute the factors of a monomial tensor, so `N`
//! splits as a direct sum over factor multisets.  Bases and reductions are
//! computed per multiset block; blocks are tiny (at most `n!` tensors), so
//! the quotient is cheap even when the ambient tensor space is large.

use crate::exactlinalg::{Rref, SparseIntMat, SparseVec};
use crate::gradedpoly::{Mono, Polynomial, Rat};
use crate::poisson::PoissonStructure;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TruncationError {
    #[error("tensor of weight {0} exceeds the truncation bound {1}")]
    WeightExceeded(i64, i64),
    #[error("chain degree {0} not built (max {1})")]
    DegreeNotBuilt(usize, usize),
}

/// Linear combination of monomial tensors of fixed degree (no module slot).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElem {
    pub n: usize,
    pub terms: BTreeMap<Vec<Mono>, Rat>,
}

impl TensorElem {
    pub fn zero(n: usize) -> Self {
        TensorElem { n, terms: BTreeMap::new() }
    }

    pub fn single(factors: Vec<Mono>) -> Self {
        let n = factors.len();
        let mut t = Self::zero(n);
        t.add_term(factors, Rat::from_integer(1.into()));
        t
    }

    pub fn add_term(&mut self, factors: Vec<Mono>, coeff: Rat) {
        debug_assert_eq!(factors.len(), self.n);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inserts a polynomial into slot `at`, distributing over monomials
    /// (each with the given extra coefficient).
    pub fn add_poly_slot(&mut self, prefix: &[Mono], poly: &Polynomial, suffix: &[Mono], c: &Rat) {
        for (m, pc) in poly.terms() {
            let mut factors = Vec::with_capacity(self.n);
            factors.extend_from_slice(prefix);
            factors.push(m.clone());
            factors.extend_from_slice(suffix);
            self.add_term(factors, pc * c);
        }
    }
}

/// Linear combination of monomial tensors with a module slot (`ch_n ⊗ A`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainElem {
    pub n: usize,
    /// (factors, module monomial) -> coefficient
    pub terms: BTreeMap<(Vec<Mono>, Mono), Rat>,
}

impl ChainElem {
    pub fn zero(n: usize) -> Self {
        ChainElem { n, terms: BTreeMap::new() }
    }

    pub fn single(factors: Vec<Mono>, module: Mono) -> Self {
        let n = factors.len();
        let mut t = Self::zero(n);
        t.add_term(factors, module, Rat::from_integer(1.into()));
        t
    }

    pub fn add_term(&mut self, factors: Vec<Mono>, module: Mono, coeff: Rat) {
        debug_assert_eq!(factors.len(), self.n);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry((factors, module)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// All pure `(r, n−r)`-shuffle images of a tensor, with signs: the element
/// originally in position `i` moves to position `π(i)`, increasing on each
/// block.
pub fn shuffle_image(factors: &[Mono], r: usize) -> Vec<(Vec<Mono>, i64)> {
    let n = factors.len();
    assert!(r > 0 && r < n);
    let mut out = Vec::new();
    // choose the image positions of the first block
    for positions in combinations(n, r) {
        let mut seq: Vec<Option<&Mono>> = vec![None; n];
        for (i, &p) in positions.iter().enumerate() {
            seq[p] = Some(&factors[i]);
        }
        let mut rest = factors[r..].iter();
        for slot in seq.iter_mut() {
            if slot.is_none() {
                *slot = rest.next();
            }
        }
        // sign: parity of crossings between the two blocks; first-block
        // element i lands at position p with p − i second-block elements
        // in front of it
        let mut inversions = 0usize;
        for (i, &p) in positions.iter().enumerate() {
            inversions += p - i;
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        out.push((seq.into_iter().map(|m| m.unwrap().clone()).collect(), sign));
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
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

/// One multiset block of a chain level: the distinct orderings of a factor
/// multiset, the shuffle relations among them, and the surviving basis.
#[derive(Debug)]
struct Block {
    /// distinct orderings, sorted; local index space
    tensors: Vec<Vec<Mono>>,
    rref: Rref,
    /// local index -> global basis id for free (non-pivot) columns
    basis_global: BTreeMap<usize, usize>,
}

impl Block {
    fn local_index(&self, t: &[Mono]) -> usize {
        self.tensors
            .binary_search_by(|probe| probe.as_slice().cmp(t))
            .expect("tensor missing from its own block")
    }
}

/// Weight-truncated basis data for one chain degree `ch_n`.
#[derive(Debug)]
pub struct ChLevel {
    pub n: usize,
    /// basis tensors in global-id order (weight ascending)
    pub basis: Vec<Vec<Mono>>,
    pub basis_weight: Vec<i64>,
    blocks: BTreeMap<Vec<Mono>, Block>,
    /// shuffle-kernel rank per weight
    pub shuffle_rank: BTreeMap<i64, usize>,
}

/// Weight-truncated bases of `ch_1 … ch_max` for one structure.
#[derive(Debug)]
pub struct ChainBases {
    pub d_max: i64,
    pub max_n: usize,
    levels: Vec<ChLevel>,
}

impl ChainBases {
    pub fn build(ps: &PoissonStructure, max_n: usize, d_max: i64) -> Self {
        let levels = (1..=max_n).map(|n| build_level(ps, n, d_max)).collect();
        ChainBases { d_max, max_n, levels }
    }

    pub fn level(&self, n: usize) -> &ChLevel {
        &self.levels[n - 1]
    }

    pub fn basis_len(&self, n: usize) -> usize {
        self.level(n).basis.len()
    }

    pub fn basis_tensor(&self, n: usize, id: usize) -> &Vec<Mono> {
        &self.level(n).basis[id]
    }

    pub fn basis_weight(&self, n: usize, id: usize) -> i64 {
        self.level(n).basis_weight[id]
    }

    /// Reduces a monomial tensor to basis coordinates.
    pub fn reduce_tensor(
        &self,
        ps: &PoissonStructure,
        factors: &[Mono],
    ) -> Result<Vec<(usize, Rat)>, TruncationError> {
        let n = factors.len();
        if n > self.max_n {
            return Err(TruncationError::DegreeNotBuilt(n, self.max_n));
        }
        let w: i64 = factors.iter().map(|m| ps.ctx().mono_weight(m)).sum();
        if w > self.d_max {
            return Err(TruncationError::WeightExceeded(w, self.d_max));
        }
        let level = self.level(n);
        let mut key: Vec<Mono> = factors.to_vec();
        key.sort();
        let block = level
            .blocks
            .get(&key)
            .expect("block missing for in-range weight");
        let local = block.local_index(factors);
        let reduced = block.rref.reduce(&SparseVec::from_entries(vec![(
            local,
            Rat::from_integer(1.into()),
        )]));
        Ok(reduced
            .entries
            .into_iter()
            .map(|(loc, c)| (block.basis_global[&loc], c))
            .collect())
    }

    /// Reduces a linear combination of tensors.
    pub fn reduce_elem(
        &self,
        ps: &PoissonStructure,
        elem: &TensorElem,
    ) -> Result<Vec<(usize, Rat)>, TruncationError> {
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        for (factors, c) in &elem.terms {
            for (id, r) in self.reduce_tensor(ps, factors)? {
                let e = acc.entry(id).or_insert_with(Rat::zero);
                *e += &r * c;
                if e.is_zero() {
                    acc.remove(&id);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }

    /// Writes a chain with module slot in the truncated basis:
    /// (basis id, module monomial) coordinates.
    pub fn reduce_chain(
        &self,
        ps: &PoissonStructure,
        elem: &ChainElem,
    ) -> Result<Vec<((usize, Mono), Rat)>, TruncationError> {
        let mut acc: BTreeMap<(usize, Mono), Rat> = BTreeMap::new();
        for ((factors, module), c) in &elem.terms {
            for (id, r) in self.reduce_tensor(ps, factors)? {
                let key = (id, module.clone());
                let e = acc.entry(key.clone()).or_insert_with(Rat::zero);
                *e += &r * c;
                if e.is_zero() {
                    acc.remove(&key);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }
}

fn build_level(ps: &PoissonStructure, n: usize, d_max: i64) -> ChLevel {
    let mut basis: Vec<Vec<Mono>> = Vec::new();
    let mut basis_weight: Vec<i64> = Vec::new();
    let mut blocks: BTreeMap<Vec<Mono>, Block> = BTreeMap::new();
    let mut shuffle_rank: BTreeMap<i64, usize> = BTreeMap::new();

    for w in 0..=d_max {
        // group all weight-w tensors by factor multiset
        let mut by_multiset: BTreeMap<Vec<Mono>, Vec<Vec<Mono>>> = BTreeMap::new();
        let mut factors_buf: Vec<Mono> = Vec::with_capacity(n);
        enumerate_tensors(ps, n, w, &mut factors_buf, &mut |t| {
            let mut key = t.to_vec();
            key.sort();
            by_multiset.entry(key).or_default().push(t.to_vec());
        });
        let mut w_rank = 0usize;
        for (key, mut tensors) in by_multiset {
            tensors.sort();
            tensors.dedup();
            let index: BTreeMap<&[Mono], usize> = tensors
                .iter()
                .enumerate()
                .map(|(i, t)| (t.as_slice(), i))
                .collect();
            let mut mat = SparseIntMat::new(tensors.len());
            if n >= 2 {
                for t in &tensors {
                    for r in 1..n {
                        let row: Vec<(usize, Rat)> = {
                            let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
                            for (img, sign) in shuffle_image(t, r) {
                                let idx = index[img.as_slice()];
                                let e = acc.entry(idx).or_insert_with(Rat::zero);
                                *e += Rat::from_integer(sign.into());
                                if e.is_zero() {
                                    acc.remove(&idx);
                                }
                            }
                            acc.into_iter().collect()
                        };
                        mat.push_rat_row(&row);
                    }
                }
            }
            let rref = mat.rref();
            w_rank += rref.rank();
            let pivots: std::collections::BTreeSet<usize> =
                rref.pivot_cols().into_iter().collect();
            let mut basis_global = BTreeMap::new();
            for (loc, t) in tensors.iter().enumerate() {
                if !pivots.contains(&loc) {
                    basis_global.insert(loc, basis.len());
                    basis.push(t.clone());
                    basis_weight.push(w);
                }
            }
            blocks.insert(
                key,
                Block {
                    tensors,
                    rref,
                    basis_global,
                },
            );
        }
        if w_rank > 0 {
            shuffle_rank.insert(w, w_rank);
        }
    }
    ChLevel {
        n,
        basis,
        basis_weight,
        blocks,
        shuffle_rank,
    }
}

fn enumerate_tensors(
    ps: &PoissonStructure,
    slots: usize,
    rem: i64,
    buf: &mut Vec<Mono>,
    f: &mut impl FnMut(&[Mono]),
) {
    if slots == 0 {
        if rem == 0 {
            f(buf);
        }
        return;
    }
    for u in 0..=rem {
        for m in ps.ctx().monomials_of_weight(u, ps.quotient()) {
            buf.push(m);
            enumerate_tensors(ps, slots - 1, rem - u, buf, f);
            buf.pop();
        }
    }
}

/// The Harrison boundary `∂_n : ch_n ⊗ A → ch_{n−1} ⊗ A`:
/// `∂(a_1⊗…⊗a_n⊗m) = a_1⊗…⊗a_{n−1}⊗(a_n m)
///  + Σ_{1≤i≤n−1} (−1)^{n−i} a_1⊗…⊗a_i a_{i+1}⊗…⊗a_n⊗m
///  + (−1)^n a_2⊗…⊗a_n⊗(a_1 m)`.
/// Products are reduced to normal form when a quotient is present.
pub fn harrison_boundary(ps: &PoissonStructure, elem: &ChainElem) -> ChainElem {
    let n = elem.n;
    let mut out = ChainElem::zero(n.saturating_sub(1));
    if n < 2 {
        return out; // the chain starts at ch_1
    }
    for ((factors, module), coeff) in &elem.terms {
        // a_n multiplied into the module slot
        let prod = ps.nf(&Polynomial::monomial(&factors[n - 1]).mul(&Polynomial::monomial(module)));
        for (m, c) in prod.terms() {
            out.add_term(factors[..n - 1].to_vec(), m.clone(), c * coeff);
        }
        // interior multiplications
        for i in 0..(n - 1) {
            let sign_pos = (n - 1 - i) % 2 == 0; // (−1)^{n−i} with i 1-based = n−(i+1)+...
            let prod =
                ps.nf(&Polynomial::monomial(&factors[i]).mul(&Polynomial::monomial(&factors[i + 1])));
            for (m, c) in prod.terms() {
                let mut fs = Vec::with_capacity(n - 1);
                fs.extend_from_slice(&factors[..i]);
                fs.push(m.clone());
                fs.extend_from_slice(&factors[i + 2..]);
                let val = c * coeff;
                out.add_term(fs, module.clone(), if sign_pos { val } else { -val });
            }
        }
        // a_1 multiplied into the module slot, sign (−1)^n
        let prod = ps.nf(&Polynomial::monomial(&factors[0]).mul(&Polynomial::monomial(module)));
        for (m, c) in prod.terms() {
            let val = c * coeff;
            out.add_term(
                factors[1..].to_vec(),
                m.clone(),
                if n % 2 == 0 { val } else { -val },
            );
        }
    }
    out
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
    fn boundary_example_1() {
        // ∂₂(x⊗y⊗1) = x⊗y − xy⊗1 + y⊗x
        let ps = symplectic2();
        let x = mono(&ps, "x");
        let y = mono(&ps, "y");
        let one = mono(&ps, "1");
        let elem = ChainElem::single(vec![x.clone(), y.clone()], one.clone());
        let b = harrison_boundary(&ps, &elem);
        let mut expected = ChainElem::zero(1);
        expected.add_term(vec![x.clone()], y.clone(), Rat::from_integer(1.into()));
        expected.add_term(vec![mono(&ps, "x*y")], one, Rat::from_integer((-1).into()));
        expected.add_term(vec![y], x, Rat::from_integer(1.into()));
        assert_eq!(b, expected);
    }

    #[test]
    fn boundary_squares_to_zero() {
        let ps = symplectic2();
        let m = |s: &str| mono(&ps, s);
        for factors in [
            vec![m("x"), m("y"), m("x*y"), m("x^2")],
            vec![m("x^2"), m("1"), m("y"), m("x")],
            vec![m("y^2"), m("x"), m("x"), m("y")],
        ] {
            let elem = ChainElem::single(factors, m("x"));
            let bb = harrison_boundary(&ps, &harrison_boundary(&ps, &elem));
            assert!(bb.is_zero());
        }
    }

    #[test]
    fn boundary_kills_shuffle_relations() {
        // ∂₃ of s_{r,3−r}-images reduces to zero in the ch₂ quotient
        let ps = symplectic2();
        let bases = ChainBases::build(&ps, 3, 6);
        let m = |s: &str| mono(&ps, s);
        let t = vec![m("x"), m("y"), m("x^2")];
        for r in 1..3 {
            let mut total: BTreeMap<(usize, Mono), Rat> = BTreeMap::new();
            for (img, sign) in shuffle_image(&t, r) {
                let b = harrison_boundary(&ps, &ChainElem::single(img, m("1")));
                for ((factors, module), c) in &b.terms {
                    // reduce the factor part, aggregate per (basis id, module)
                    for (id, r2) in bases.reduce_tensor(&ps, factors).unwrap() {
                        let key = (id, module.clone());
                        let e = total.entry(key.clone()).or_insert_with(Rat::zero);
                        *e += r2 * c * Rat::from_integer(sign.into());
                        if e.is_zero() {
                            total.remove(&key);
                        }
                    }
                }
            }
            assert!(total.is_empty(), "shuffle type ({r},{}) not killed", 3 - r);
        }
    }

    #[test]
    fn ch2_is_sym2() {
        let ps = symplectic2();
        let bases = ChainBases::build(&ps, 2, 4);
        // weight-2 basis of ch₂: unordered pairs {1⊗x², 1⊗xy, 1⊗y², x⊗x, x⊗y, y⊗y}
        let count = (0..bases.basis_len(2))
            .filter(|&i| bases.basis_weight(2, i) == 2)
            .count();
        assert_eq!(count, 6);
        // x⊗y and y⊗x reduce to the same class up to the stored representative
        let m = |s: &str| mono(&ps, s);
        let a = bases.reduce_tensor(&ps, &[m("x"), m("y")]).unwrap();
        let b = bases.reduce_tensor(&ps, &[m("y"), m("x")]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ch3_shuffle_quotient_dims() {
        let ps = symplectic2();
        let bases = ChainBases::build(&ps, 3, 4);
        // distinct-letter block {1, x, y}: quotient dimension 2 of 6 orderings
        let level = bases.level(3);
        let m = |s: &str| mono(&ps, s);
        let mut key = vec![m("1"), m("x"), m("y")];
        key.sort();
        let ids: Vec<usize> = level
            .basis
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let mut k = (*t).clone();
                k.sort();
                k == key
            })
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ids.len(), 2);
    }
}
