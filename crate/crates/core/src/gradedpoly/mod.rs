//! Sparse multivariate polynomial arithmetic over the rationals with a
//! positive weight grading, plus normal forms modulo a single
//! weighted-homogeneous relation whose leading monomial is a pure power.
//!
//! Monomials are exponent vectors aligned with the context's variable list.
//! The monomial order used for bases and printing is graded-lexicographic:
//! first by weighted degree, then lexicographically by variable index
//! (earlier variables rank higher).

mod parse;
mod quotient;

pub use parse::{parse_polynomial, ParseError};
pub use quotient::{QuotientError, QuotientPresentation};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Exact scalar type used everywhere in the crate.
pub type Rat = BigRational;

/// Exponent vector; `mono.len()` equals the number of context variables.
pub type Mono = Vec<u32>;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("variable weights must be strictly positive (variable `{0}` has weight {1})")]
    NonPositiveWeight(String, i64),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("variable and weight lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// The grading universe: ordered variables, their positive weights, and the
/// weight `l` lost by the Poisson bracket (`deg{a,b} = deg a + deg b - l`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedContext {
    vars: Vec<String>,
    weights: Vec<i64>,
    bracket_weight_l: i64,
}

impl WeightedContext {
    pub fn new(
        vars: Vec<String>,
        weights: Vec<i64>,
        bracket_weight_l: i64,
    ) -> Result<Self, ContextError> {
        if vars.len() != weights.len() {
            return Err(ContextError::LengthMismatch(vars.len(), weights.len()));
        }
        for (v, &w) in vars.iter().zip(&weights) {
            if w <= 0 {
                return Err(ContextError::NonPositiveWeight(v.clone(), w));
            }
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(ContextError::DuplicateVariable(v.clone()));
            }
        }
        Ok(WeightedContext {
            vars,
            weights,
            bracket_weight_l,
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.vars[i]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i]
    }

    pub fn bracket_weight_l(&self) -> i64 {
        self.bracket_weight_l
    }

    /// Weighted degree of an exponent vector.
    pub fn mono_weight(&self, m: &[u32]) -> i64 {
        m.iter()
            .zip(&self.weights)
            .map(|(&e, &w)| e as i64 * w)
            .sum()
    }

    /// Graded-lex comparison: weighted degree first, then lexicographic by
    /// variable index (a higher power of an earlier variable ranks higher).
    pub fn mono_cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self.mono_weight(a).cmp(&self.mono_weight(b)) {
            Ordering::Equal => a.cmp(b),
            ord => ord,
        }
    }

    /// All monomials of the given weight, graded-lex descending.  With a
    /// quotient present only normal-form monomials are returned.
    pub fn monomials_of_weight(&self, weight: i64, q: Option<&QuotientPresentation>) -> Vec<Mono> {
        let mut out = Vec::new();
        if weight < 0 {
            return out;
        }
        let mut cur = vec![0u32; self.nvars()];
        self.enumerate_rec(0, weight, &mut cur, q, &mut out);
        out
    }

    fn enumerate_rec(
        &self,
        var: usize,
        rem: i64,
        cur: &mut Mono,
        q: Option<&QuotientPresentation>,
        out: &mut Vec<Mono>,
    ) {
        if var == self.nvars() {
            if rem == 0 {
                if let Some(q) = q {
                    if q.is_reducible(cur) {
                        return;
                    }
                }
                out.push(cur.clone());
            }
            return;
        }
        let w = self.weights[var];
        let max = rem / w;
        // descending exponent on the earlier variable gives graded-lex descending output
        for e in (0..=max).rev() {
            cur[var] = e as u32;
            self.enumerate_rec(var + 1, rem - e * w, cur, q, out);
        }
        cur[var] = 0;
    }
}

/// All normal-form monomials of the given weight as monic polynomials, in
/// deterministic graded-lex order.
pub fn monomial_basis(
    ctx: &WeightedContext,
    weight: i64,
    q: Option<&QuotientPresentation>,
) -> Vec<Polynomial> {
    ctx.monomials_of_weight(weight, q)
        .into_iter()
        .map(|m| Polynomial::from_term(m, Rat::one()))
        .collect()
}

/// Sparse exact-rational multivariate polynomial.
///
/// Invariants: no stored coefficient is zero and every exponent vector has
/// length `nvars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Mono, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::from_term(m, Rat::one())
    }

    pub fn from_term(mono: Mono, coeff: Rat) -> Self {
        let nvars = mono.len();
        let mut p = Self::zero(nvars);
        if !coeff.is_zero() {
            p.terms.insert(mono, coeff);
        }
        p
    }

    pub fn monomial(mono: &[u32]) -> Self {
        Self::from_term(mono.to_vec(), Rat::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &[u32]) -> Rat {
        self.terms.get(mono).cloned().unwrap_or_else(Rat::zero)
    }

    /// The constant term viewed as a rational; `None` when the polynomial is
    /// not constant.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.iter().all(|&e| e == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, mono: Mono, coeff: Rat) {
        debug_assert_eq!(mono.len(), self.nvars);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
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

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Mono = ma.iter().zip(mb).map(|(&x, &y)| x + y).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut out = Self::one(self.nvars);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] = e - 1;
            out.add_term(m2, c * rat_int(e as i64));
        }
        out
    }

    /// Splits into weighted-homogeneous components, weights strictly
    /// increasing.  The zero polynomial yields an empty sequence.
    pub fn weight_decompose(&self, ctx: &WeightedContext) -> Vec<(i64, Polynomial)> {
        let mut buckets: BTreeMap<i64, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let w = ctx.mono_weight(m);
            buckets
                .entry(w)
                .or_insert_with(|| Polynomial::zero(self.nvars))
                .add_term(m.clone(), c.clone());
        }
        buckets.into_iter().collect()
    }

    /// Weight of a weighted-homogeneous polynomial; `None` for mixed-weight
    /// polynomials.  The zero polynomial is homogeneous of every weight and
    /// reported as `Some(0)`.
    pub fn homogeneous_weight(&self, ctx: &WeightedContext) -> Option<i64> {
        let mut it = self.terms.keys();
        let first = match it.next() {
            None => return Some(0),
            Some(m) => ctx.mono_weight(m),
        };
        for m in it {
            if ctx.mono_weight(m) != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn is_homogeneous_of(&self, ctx: &WeightedContext, w: i64) -> bool {
        self.is_zero() || self.homogeneous_weight(ctx) == Some(w)
    }

    /// Terms sorted graded-lex descending — the canonical print order.
    pub fn sorted_terms(&self, ctx: &WeightedContext) -> Vec<(&Mono, &Rat)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| ctx.mono_cmp(b.0, a.0));
        v
    }

    /// Renders the polynomial in the grammar accepted by `parse_polynomial`.
    pub fn to_text(&self, ctx: &WeightedContext) -> String {
        assert_eq!(self.nvars, ctx.nvars());
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.sorted_terms(ctx).into_iter().enumerate() {
            let neg = c < &Rat::zero();
            let abs = if neg { -c } else { c.clone() };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            s.push_str(&term_text(&abs, m, ctx));
        }
        s
    }
}

fn term_text(abs_coeff: &Rat, mono: &[u32], ctx: &WeightedContext) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !abs_coeff.is_one() || mono.iter().all(|&e| e == 0) {
        if abs_coeff.denom().is_one() {
            parts.push(abs_coeff.numer().to_string());
        } else {
            parts.push(format!("{}/{}", abs_coeff.numer(), abs_coeff.denom()));
        }
    }
    for (i, &e) in mono.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ctx.var_name(i).to_string()),
            _ => parts.push(format!("{}^{}", ctx.var_name(i), e)),
        }
    }
    parts.join("*")
}

/// Display for contexts, mostly for diagnostics.
impl fmt::Display for WeightedContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .vars
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| format!("{v}:{w}"))
            .collect();
        write!(f, "[{}; l={}]", pairs.join(", "), self.bracket_weight_l)
    }
}
