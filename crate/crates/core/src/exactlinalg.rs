//! Exact rational dense linear algebra: rank, kernel bases and linear solves.
//!
//! The public surface works on dense `RationalMatrix` values.  Underneath,
//! everything runs through a sparse fraction-free integer elimination: rows
//! are cleared of denominators, elimination steps cross-multiply and the gcd
//! of each row is divided out, so no floating point and no rational blow-up.
//! The reduced row-echelon form is canonical for the row space, which makes
//! ranks, kernel bases and solve results deterministic.

use crate::gradedpoly::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry list has length {0}, expected {1}")]
    BadEntryCount(usize, usize),
    #[error("dimension mismatch: matrix has {0} rows but vector has length {1}")]
    DimensionMismatch(usize, usize),
}

/// Dense exact-rational matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rat>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::BadEntryCount(entries.len(), rows * cols));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            entries.extend(row);
        }
        RationalMatrix { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut out = Self::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = Rat::zero();
                for c in 0..self.cols {
                    let e = self.get(r, c);
                    if !e.is_zero() && !v[c].is_zero() {
                        acc += e * &v[c];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let cur = out.get(r, c) + a * b;
                        out.set(r, c, cur);
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn to_sparse(&self) -> SparseIntMat {
        let mut m = SparseIntMat::new(self.cols);
        for r in 0..self.rows {
            let row: Vec<(usize, Rat)> = (0..self.cols)
                .filter(|&c| !self.get(r, c).is_zero())
                .map(|c| (c, self.get(r, c).clone()))
                .collect();
            m.push_rat_row(&row);
        }
        m
    }

    /// Rank and a deterministic kernel basis (reduced row-echelon pivots;
    /// one basis vector per free column, that free coordinate set to 1).
    pub fn rank_and_kernel(&self) -> (usize, Vec<Vec<Rat>>) {
        let rref = self.to_sparse().rref();
        let kernel = rref
            .kernel_basis()
            .into_iter()
            .map(|sv| sv.to_dense(self.cols))
            .collect();
        (rref.rank(), kernel)
    }

    pub fn rank(&self) -> usize {
        self.to_sparse().rank()
    }

    /// One exact solution of `m·x = b` (free variables set to zero), or
    /// `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Result<Option<Vec<Rat>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(self.rows, b.len()));
        }
        let mut m = SparseIntMat::new(self.cols + 1);
        for r in 0..self.rows {
            let mut row: Vec<(usize, Rat)> = (0..self.cols)
                .filter(|&c| !self.get(r, c).is_zero())
                .map(|c| (c, self.get(r, c).clone()))
                .collect();
            if !b[r].is_zero() {
                row.push((self.cols, b[r].clone()));
            }
            m.push_rat_row(&row);
        }
        let rref = m.rref();
        let mut x = vec![Rat::zero(); self.cols];
        for row in &rref.rows {
            if row.pivot == self.cols {
                return Ok(None); // pivot in the augmented column
            }
            // RREF row: x_pivot + Σ_free a_j x_j = rhs; free variables = 0
            let rhs = row
                .entries
                .iter()
                .find(|(c, _)| *c == self.cols)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(Rat::zero);
            x[row.pivot] = rhs;
        }
        Ok(Some(x))
    }
}

// ---------------------------------------------------------------------------
// sparse fraction-free engine
// ---------------------------------------------------------------------------

/// Sparse vector with ascending column indices and nonzero entries.
#[derive(Debug, Clone, Default)]
pub struct SparseVec {
    pub entries: Vec<(usize, Rat)>,
}

impl SparseVec {
    pub fn from_entries(mut entries: Vec<(usize, Rat)>) -> Self {
        entries.retain(|(_, v)| !v.is_zero());
        entries.sort_by_key(|&(c, _)| c);
        SparseVec { entries }
    }

    pub fn to_dense(&self, cols: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); cols];
        for (c, val) in &self.entries {
            v[*c] = val.clone();
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

type IntRow = Vec<(usize, BigInt)>;

fn row_gcd_normalize(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    if !g.is_one() && !g.is_zero() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `a*ra - b*rb`, merged by column, gcd-normalized.
fn row_combine(a: &BigInt, ra: &IntRow, b: &BigInt, rb: &IntRow) -> IntRow {
    let mut out: IntRow = Vec::with_capacity(ra.len() + rb.len());
    let (mut i, mut j) = (0, 0);
    while i < ra.len() || j < rb.len() {
        match (ra.get(i), rb.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = a * va - b * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, a * va));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, -(b * vb)));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, a * va));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, -(b * vb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    row_gcd_normalize(&mut out);
    out
}

/// Sparse integer matrix accumulating rows for elimination.
#[derive(Debug, Clone)]
pub struct SparseIntMat {
    cols: usize,
    rows: Vec<IntRow>,
}

impl SparseIntMat {
    pub fn new(cols: usize) -> Self {
        SparseIntMat { cols, rows: Vec::new() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a rational row after clearing denominators and normalizing.
    pub fn push_rat_row(&mut self, row: &[(usize, Rat)]) {
        let mut denom_lcm = BigInt::one();
        for (_, v) in row {
            if !v.is_zero() {
                denom_lcm = denom_lcm.lcm(v.denom());
            }
        }
        let mut irow: IntRow = row
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (*c, v.numer() * (&denom_lcm / v.denom())))
            .collect();
        irow.sort_by_key(|&(c, _)| c);
        row_gcd_normalize(&mut irow);
        if !irow.is_empty() {
            self.rows.push(irow);
        }
    }

    pub fn push_int_row(&mut self, mut row: IntRow) {
        row.retain(|(_, v)| !v.is_zero());
        row.sort_by_key(|&(c, _)| c);
        row_gcd_normalize(&mut row);
        if !row.is_empty() {
            self.rows.push(row);
        }
    }

    /// Forward elimination to (non-reduced) echelon form.  Rows come back
    /// sorted by pivot column.
    fn echelon(self) -> Vec<IntRow> {
        let mut buckets: BTreeMap<usize, Vec<IntRow>> = BTreeMap::new();
        for row in self.rows {
            buckets.entry(row[0].0).or_default().push(row);
        }
        let mut done: Vec<IntRow> = Vec::new();
        while let Some((&col, _)) = buckets.iter().next() {
            let mut rows = buckets.remove(&col).unwrap();
            // pivot: fewest nonzeros, ties broken by arrival order
            let mut best = 0;
            for (i, r) in rows.iter().enumerate() {
                if r.len() < rows[best].len() {
                    best = i;
                }
            }
            let pivot = rows.swap_remove(best);
            let plead = pivot[0].1.clone();
            for r in rows {
                let rlead = r[0].1.clone();
                let combined = row_combine(&plead, &r, &rlead, &pivot);
                if !combined.is_empty() {
                    buckets.entry(combined[0].0).or_default().push(combined);
                }
            }
            done.push(pivot);
        }
        done
    }

    /// Rank only (skips back-substitution).
    pub fn rank(self) -> usize {
        self.echelon().len()
    }

    /// Canonical reduced row-echelon form over the rationals.
    pub fn rref(self) -> Rref {
        let cols = self.cols;
        let mut rows = self.echelon();
        // back-eliminate: clear each pivot column from all earlier rows
        for i in (0..rows.len()).rev() {
            let pcol = rows[i][0].0;
            let plead = rows[i][0].1.clone();
            for j in 0..i {
                let coeff = rows[j]
                    .iter()
                    .find(|(c, _)| *c == pcol)
                    .map(|(_, v)| v.clone());
                if let Some(coeff) = coeff {
                    rows[j] = row_combine(&plead, &rows[j], &coeff, &rows[i]);
                }
            }
        }
        let out = rows
            .into_iter()
            .map(|r| {
                let pivot = r[0].0;
                let plead = Rat::from_integer(r[0].1.clone());
                let entries = r
                    .into_iter()
                    .map(|(c, v)| (c, Rat::from_integer(v) / &plead))
                    .collect();
                RrefRow { pivot, entries }
            })
            .collect();
        Rref { cols, rows: out }
    }
}

/// One unit-pivot row of a reduced row-echelon form.
#[derive(Debug, Clone)]
pub struct RrefRow {
    pub pivot: usize,
    /// Ascending columns, pivot entry equal to 1.
    pub entries: Vec<(usize, Rat)>,
}

/// Canonical reduced row-echelon form; doubles as a coset-reduction oracle.
#[derive(Debug, Clone)]
pub struct Rref {
    pub cols: usize,
    pub rows: Vec<RrefRow>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    /// Kernel basis: one vector per free column `j`, with `v[j] = 1` and
    /// `v[pivot_i] = -rref[i][j]`.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let pivots: std::collections::BTreeSet<usize> = self.pivot_cols().into_iter().collect();
        let mut out = Vec::new();
        for j in 0..self.cols {
            if pivots.contains(&j) {
                continue;
            }
            let mut entries = vec![(j, Rat::one())];
            for row in &self.rows {
                if let Some((_, v)) = row.entries.iter().find(|(c, _)| *c == j) {
                    entries.push((row.pivot, -v.clone()));
                }
            }
            out.push(SparseVec::from_entries(entries));
        }
        out
    }

    /// Reduces a vector modulo the row space; the result is supported on
    /// free columns only and is the canonical coset representative.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut dense: BTreeMap<usize, Rat> = v.entries.iter().cloned().collect();
        for row in &self.rows {
            let c = match dense.get(&row.pivot) {
                Some(c) if !c.is_zero() => c.clone(),
                _ => continue,
            };
            for (col, val) in &row.entries {
                let entry = dense.entry(*col).or_insert_with(Rat::zero);
                *entry -= &c * val;
                if entry.is_zero() {
                    dense.remove(col);
                }
            }
        }
        SparseVec {
            entries: dense.into_iter().collect(),
        }
    }

    /// Inserts a vector into the echelon if independent; returns true when
    /// the vector enlarged the row space.  Used for incremental spans.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let red = self.reduce(v);
        if red.is_zero() {
            return false;
        }
        let (pivot, plead) = red.entries[0].clone();
        let entries: Vec<(usize, Rat)> = red
            .entries
            .iter()
            .map(|(c, val)| (*c, val / &plead))
            .collect();
        // keep earlier rows reduced against the new pivot
        for row in &mut self.rows {
            if let Some(pos) = row.entries.iter().position(|(c, _)| *c == pivot) {
                let coeff = row.entries[pos].1.clone();
                let mut map: BTreeMap<usize, Rat> = row.entries.iter().cloned().collect();
                for (c, val) in &entries {
                    let e = map.entry(*c).or_insert_with(Rat::zero);
                    *e -= &coeff * val;
                    if e.is_zero() {
                        map.remove(c);
                    }
                }
                row.entries = map.into_iter().collect();
            }
        }
        let at = self
            .rows
            .binary_search_by_key(&pivot, |r| r.pivot)
            .unwrap_err();
        self.rows.insert(at, RrefRow { pivot, entries });
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::rat_int;

    fn mat(rows: Vec<Vec<i64>>) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat_int).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let m = mat(vec![vec![1, 0], vec![0, 1]]);
        let (rank, kernel) = m.rank_and_kernel();
        assert_eq!(rank, 2);
        assert!(kernel.is_empty());
    }

    #[test]
    fn one_by_two() {
        let m = mat(vec![vec![1, 1]]);
        let (rank, kernel) = m.rank_and_kernel();
        assert_eq!(rank, 1);
        assert_eq!(kernel.len(), 1);
        // kernel vector spans {(t, -t)}, and maps to zero
        assert!(m.mul_vec(&kernel[0]).iter().all(|v| v.is_zero()));
        assert!(!kernel[0][0].is_zero() || !kernel[0][1].is_zero());
    }

    #[test]
    fn rank_deficient() {
        let m = mat(vec![vec![1, 2], vec![2, 4]]);
        let (rank, kernel) = m.rank_and_kernel();
        assert_eq!(rank, 1);
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0], vec![rat_int(-2), rat_int(1)]);
    }

    #[test]
    fn solve_cases() {
        let id = mat(vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(
            id.solve(&[rat_int(3), rat_int(5)]).unwrap(),
            Some(vec![rat_int(3), rat_int(5)])
        );

        // underdetermined: pivot convention puts free variables to zero
        let m = mat(vec![vec![1, 1]]);
        assert_eq!(
            m.solve(&[rat_int(2)]).unwrap(),
            Some(vec![rat_int(2), rat_int(0)])
        );

        // inconsistent
        let m = mat(vec![vec![1], vec![1]]);
        assert_eq!(m.solve(&[rat_int(0), rat_int(1)]).unwrap(), None);

        // dimension mismatch
        assert!(m.solve(&[rat_int(0)]).is_err());
    }

    #[test]
    fn incremental_span() {
        let mut span = Rref { cols: 3, rows: vec![] };
        let v1 = SparseVec::from_entries(vec![(0, rat_int(1)), (1, rat_int(2))]);
        let v2 = SparseVec::from_entries(vec![(0, rat_int(2)), (1, rat_int(4))]);
        let v3 = SparseVec::from_entries(vec![(2, rat_int(5))]);
        assert!(span.insert(&v1));
        assert!(!span.insert(&v2));
        assert!(span.insert(&v3));
        assert_eq!(span.rank(), 2);
    }
}
