//! First-order Poisson deformations over the dual numbers: verification of
//! the associativity cocycle condition and the two bracket conditions,
//! equivalence witnesses, enumeration of deformation classes, and explicit
//! dual-number multiplication/bracket tables with independent re-checking.
//!
//! A deformation is a pair `(φ, ψ)`: `a * b = ab + εφ(a,b)` perturbs the
//! product, `{a,b}_ε = {a,b} + εψ(a,b)` perturbs the bracket.  The three
//! verified identities are `d²φ = 0` (associativity),
//!
//! `(⋆):  ψ(a,bc) − cψ(a,b) − bψ(a,c) = φ({a,b},c) + φ({a,c},b) − {a,φ(b,c)}`
//!
//! and
//!
//! `(⋆⋆): ψ(a,{b,c}) + ψ(b,{c,a}) + ψ(c,{a,b})
//!        + {a,ψ(b,c)} + {b,ψ(c,a)} + {c,ψ(a,b)} = 0`,
//!
//! checked on all monomial triples of total weight within the truncation.
//! Two deformations are equivalent when some `χ_f(a) = a + f(a)ε` carries
//! one to the other: `(φ' − φ) = −d(f)` and `(ψ' − ψ) = −δ(f)`.

use crate::exactlinalg::{Rref, SparseIntMat, SparseVec};
use crate::gradedpoly::{Mono, Polynomial, Rat, WeightedContext};
use crate::harrison::{canonicalize, Cochain, Key, Spot, SpotCoords, TotalSlice, TruncationError, Truncation};
use crate::lp_cohomology::{build_slice, LpError};
use crate::poisson::PoissonStructure;
use crate::cartan::Polyvector;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error(transparent)]
    Truncation(#[from] TruncationError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("deformations live on different weight slices ({0} vs {1})")]
    SliceMismatch(i64, i64),
    #[error("deformation fails verification; cannot build dual-number tables")]
    NotVerified,
    #[error("internal inconsistency: rebuilt tables fail {0}")]
    TableCheckFailed(&'static str),
}

/// A first-order deformation, stored as truncated cochains: `phi` on
/// `Hom(ch_2, A)` (symmetric), `psi` on `Hom(∧²ch_1, A)` (antisymmetric).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstOrderDeformation {
    /// slice invariant: cochain weight + s·l, shared by `phi` and `psi`
    pub kappa: i64,
    pub phi: Cochain,
    pub psi: Cochain,
}

impl FirstOrderDeformation {
    pub fn zero(kappa: i64) -> Self {
        FirstOrderDeformation {
            kappa,
            phi: Cochain::zero(Spot::C2),
            psi: Cochain::zero(Spot::C11),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phi.is_zero() && self.psi.is_zero()
    }

    /// Smooth-case deformation: `φ = 0`, `ψ(a,b) = Z(da∧db)` for a
    /// weighted-homogeneous bivector `Z`.
    pub fn from_bivector(
        ps: &PoissonStructure,
        trunc: &Truncation,
        z: &Polyvector,
    ) -> Result<Self, DeformError> {
        assert_eq!(z.degree(), 2);
        let ctx = ps.ctx();
        let w = z.homogeneous_weight(ctx).expect("bivector must be homogeneous");
        let kappa = w + 2 * ctx.bracket_weight_l();
        let mut psi = Cochain::zero(Spot::C11);
        let keys = trunc.keys(Spot::C11);
        for key in &keys.keys {
            let a = Polynomial::monomial(&trunc.bases.basis_tensor(1, key[0].1)[0].clone());
            let b = Polynomial::monomial(&trunc.bases.basis_tensor(1, key[1].1)[0].clone());
            let v = ps.nf(&z.evaluate_on_exacts(&[a, b]).unwrap());
            psi.set(key.clone(), v);
        }
        Ok(FirstOrderDeformation {
            kappa,
            phi: Cochain::zero(Spot::C2),
            psi,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, DeformError> {
        if self.kappa != other.kappa && !self.is_zero() && !other.is_zero() {
            return Err(DeformError::SliceMismatch(self.kappa, other.kappa));
        }
        Ok(FirstOrderDeformation {
            kappa: self.kappa,
            phi: self.phi.sub(&other.phi),
            psi: self.psi.sub(&other.psi),
        })
    }
}

// ---------------------------------------------------------------------------
// cochain evaluation on polynomial pairs
// ---------------------------------------------------------------------------

fn eval_c2(
    ps: &PoissonStructure,
    trunc: &Truncation,
    phi: &Cochain,
    a: &Polynomial,
    b: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    let n = ps.nvars();
    let mut out = Polynomial::zero(n);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let reduced = trunc.bases.reduce_tensor(ps, &[ma.clone(), mb.clone()])?;
            for (id, c) in reduced {
                if let Some(v) = phi.values.get(&vec![(2usize, id)]) {
                    out = out.add(&v.scale(&(ca * cb * c)));
                }
            }
        }
    }
    Ok(ps.nf(&out))
}

fn ch1_id(trunc: &Truncation, m: &Mono) -> usize {
    // ch_1 has no relations: every monomial is a basis tensor
    trunc
        .keys(Spot::C1)
        .position(&vec![(1usize, 0)])
        .map(|_| ())
        .unwrap_or(());
    // binary search over the level-1 basis
    (0..trunc.bases.basis_len(1))
        .find(|&i| trunc.bases.basis_tensor(1, i)[0] == *m)
        .expect("monomial outside truncation")
}

fn eval_c11(
    ps: &PoissonStructure,
    trunc: &Truncation,
    psi: &Cochain,
    a: &Polynomial,
    b: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    let n = ps.nvars();
    let mut out = Polynomial::zero(n);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            if ma == mb {
                continue;
            }
            let (ia, ib) = (ch1_id(trunc, ma), ch1_id(trunc, mb));
            let (key, sign) = canonicalize(vec![(1, ia), (1, ib)]).expect("distinct factors");
            if let Some(v) = psi.values.get(&key) {
                let c = ca * cb * Rat::from_integer(sign.into());
                out = out.add(&v.scale(&c));
            }
        }
    }
    Ok(ps.nf(&out))
}

fn eval_c1(
    ps: &PoissonStructure,
    trunc: &Truncation,
    f: &Cochain,
    a: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    let n = ps.nvars();
    let mut out = Polynomial::zero(n);
    for (m, c) in a.terms() {
        let id = ch1_id(trunc, m);
        if let Some(v) = f.values.get(&vec![(1usize, id)]) {
            out = out.add(&v.scale(c));
        }
    }
    Ok(ps.nf(&out))
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    Associativity,
    Star,
    StarStar,
}

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Identity::Associativity => write!(f, "associativity cocycle"),
            Identity::Star => write!(f, "(*) Leibniz compatibility"),
            Identity::StarStar => write!(f, "(**) Jacobi compatibility"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub identity: Identity,
    pub triple: (Mono, Mono, Mono),
    pub discrepancy: Polynomial,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub pass: bool,
    pub triples_checked: usize,
    pub violation: Option<Violation>,
}

fn monomials_to(ctx: &WeightedContext, ps: &PoissonStructure, d_eff: i64) -> Vec<Mono> {
    let mut out = Vec::new();
    for w in 0..=d_eff {
        out.extend(ctx.monomials_of_weight(w, ps.quotient()));
    }
    out
}

fn assoc_discrepancy(
    ps: &PoissonStructure,
    trunc: &Truncation,
    phi: &Cochain,
    a: &Polynomial,
    b: &Polynomial,
    c: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    // φ(ab,c) + cφ(a,b) − φ(a,bc) − aφ(b,c)
    let ab = ps.nf(&a.mul(b));
    let bc = ps.nf(&b.mul(c));
    let t1 = eval_c2(ps, trunc, phi, &ab, c)?;
    let t2 = eval_c2(ps, trunc, phi, a, b)?.mul(c);
    let t3 = eval_c2(ps, trunc, phi, a, &bc)?;
    let t4 = eval_c2(ps, trunc, phi, b, c)?.mul(a);
    Ok(ps.nf(&t1.add(&t2).sub(&t3).sub(&t4)))
}

fn star_discrepancy(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d: &FirstOrderDeformation,
    a: &Polynomial,
    b: &Polynomial,
    c: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    // ψ(a,bc) − cψ(a,b) − bψ(a,c) − φ({a,b},c) − φ({a,c},b) + {a,φ(b,c)}
    let bc = ps.nf(&b.mul(c));
    let t1 = eval_c11(ps, trunc, &d.psi, a, &bc)?;
    let t2 = eval_c11(ps, trunc, &d.psi, a, b)?.mul(c);
    let t3 = eval_c11(ps, trunc, &d.psi, a, c)?.mul(b);
    let t4 = eval_c2(ps, trunc, &d.phi, &ps.bracket(a, b), c)?;
    let t5 = eval_c2(ps, trunc, &d.phi, &ps.bracket(a, c), b)?;
    let t6 = ps.bracket(a, &eval_c2(ps, trunc, &d.phi, b, c)?);
    Ok(ps.nf(&t1.sub(&t2).sub(&t3).sub(&t4).sub(&t5).add(&t6)))
}

fn starstar_discrepancy(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d: &FirstOrderDeformation,
    a: &Polynomial,
    b: &Polynomial,
    c: &Polynomial,
) -> Result<Polynomial, TruncationError> {
    let t1 = eval_c11(ps, trunc, &d.psi, a, &ps.bracket(b, c))?;
    let t2 = eval_c11(ps, trunc, &d.psi, b, &ps.bracket(c, a))?;
    let t3 = eval_c11(ps, trunc, &d.psi, c, &ps.bracket(a, b))?;
    let t4 = ps.bracket(a, &eval_c11(ps, trunc, &d.psi, b, c)?);
    let t5 = ps.bracket(b, &eval_c11(ps, trunc, &d.psi, c, a)?);
    let t6 = ps.bracket(c, &eval_c11(ps, trunc, &d.psi, a, b)?);
    Ok(ps.nf(&t1.add(&t2).add(&t3).add(&t4).add(&t5).add(&t6)))
}

/// Checks `d²φ = 0`, `(⋆)` and `(⋆⋆)` on all monomial triples of total
/// weight ≤ `d_eff`; symmetric instances are deduplicated.  Reports the
/// first failing triple with its nonzero discrepancy.
pub fn verify_first_order(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d: &FirstOrderDeformation,
    d_eff: i64,
) -> Result<VerifyReport, DeformError> {
    let ctx = ps.ctx();
    let monos = monomials_to(ctx, ps, d_eff);
    let weights: Vec<i64> = monos.iter().map(|m| ctx.mono_weight(m)).collect();
    let mut checked = 0usize;
    for ia in 0..monos.len() {
        for ib in 0..monos.len() {
            let wab = weights[ia] + weights[ib];
            if wab > d_eff {
                continue;
            }
            for ic in 0..monos.len() {
                if wab + weights[ic] > d_eff {
                    continue;
                }
                let (a, b, c) = (
                    Polynomial::monomial(&monos[ia]),
                    Polynomial::monomial(&monos[ib]),
                    Polynomial::monomial(&monos[ic]),
                );
                // d²φ is antisymmetric under a↔c, (⋆) symmetric in (b,c),
                // (⋆⋆) fully alternating
                if ia < ic {
                    checked += 1;
                    let disc = assoc_discrepancy(ps, trunc, &d.phi, &a, &b, &c)?;
                    if !disc.is_zero() {
                        return Ok(fail(Identity::Associativity, &monos, ia, ib, ic, disc, checked));
                    }
                }
                if ib <= ic {
                    checked += 1;
                    let disc = star_discrepancy(ps, trunc, d, &a, &b, &c)?;
                    if !disc.is_zero() {
                        return Ok(fail(Identity::Star, &monos, ia, ib, ic, disc, checked));
                    }
                }
                if ia < ib && ib < ic {
                    checked += 1;
                    let disc = starstar_discrepancy(ps, trunc, d, &a, &b, &c)?;
                    if !disc.is_zero() {
                        return Ok(fail(Identity::StarStar, &monos, ia, ib, ic, disc, checked));
                    }
                }
            }
        }
    }
    Ok(VerifyReport {
        pass: true,
        triples_checked: checked,
        violation: None,
    })
}

fn fail(
    identity: Identity,
    monos: &[Mono],
    ia: usize,
    ib: usize,
    ic: usize,
    discrepancy: Polynomial,
    checked: usize,
) -> VerifyReport {
    VerifyReport {
        pass: false,
        triples_checked: checked,
        violation: Some(Violation {
            identity,
            triple: (monos[ia].clone(), monos[ib].clone(), monos[ic].clone()),
            discrepancy,
        }),
    }
}

// ---------------------------------------------------------------------------
// the equivalence system:  M·f = (d¹f, δ f)  over one κ-slice
// ---------------------------------------------------------------------------

/// Coordinates of the unknown `f ∈ Hom(ch_1, A)` on slice κ.
struct FCoords {
    /// (ch₁ basis id, value monomial)
    coords: Vec<(usize, Mono)>,
    by_id: BTreeMap<usize, Vec<usize>>,
}

impl FCoords {
    fn build(ps: &PoissonStructure, trunc: &Truncation, kappa: i64, d_eff: i64) -> Self {
        let ctx = ps.ctx();
        let omega = kappa - ctx.bracket_weight_l();
        let mut coords = Vec::new();
        for id in 0..trunc.bases.basis_len(1) {
            let w = trunc.bases.basis_weight(1, id);
            if w > d_eff {
                continue;
            }
            for m in ctx.monomials_of_weight(w + omega, ps.quotient()) {
                coords.push((id, m));
            }
        }
        let mut by_id: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, (id, _)) in coords.iter().enumerate() {
            by_id.entry(*id).or_default().push(i);
        }
        FCoords { coords, by_id }
    }
}

/// Accumulates, per output monomial, a sparse linear row over unknowns.
struct RowAcc {
    rows: BTreeMap<Mono, BTreeMap<usize, Rat>>,
}

impl RowAcc {
    fn new() -> Self {
        RowAcc { rows: BTreeMap::new() }
    }

    fn scatter(&mut self, col: usize, poly: &Polynomial) {
        for (m, c) in poly.terms() {
            let e = self
                .rows
                .entry(m.clone())
                .or_default()
                .entry(col)
                .or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                let row = self.rows.get_mut(m).unwrap();
                row.remove(&col);
                if row.is_empty() {
                    self.rows.remove(m);
                }
            }
        }
    }
}

/// Applies `d¹f` and `δf` symbolically for the unit unknowns touching a
/// polynomial argument: every term is `Mult(p)` or `Bracket(p)` against the
/// value of `f` at the expansion of `arg`.
fn scatter_f_of(
    ps: &PoissonStructure,
    trunc: &Truncation,
    fcoords: &FCoords,
    arg: &Polynomial,
    transform: &Xform,
    sign: i64,
    acc: &mut RowAcc,
) {
    for (m, c) in arg.terms() {
        let id = ch1_id(trunc, m);
        let Some(cols) = fcoords.by_id.get(&id) else { continue };
        for &col in cols {
            let (_, nu) = &fcoords.coords[col];
            let base = Polynomial::monomial(nu).scale(&(c * Rat::from_integer(sign.into())));
            let poly = match transform {
                Xform::Mult(p) => ps.nf(&base.mul(p)),
                Xform::Bracket(p) => ps.bracket(p, &base),
            };
            acc.scatter(col, &poly);
        }
    }
}

enum Xform {
    Mult(Polynomial),
    Bracket(Polynomial),
}

/// Builds the linear map `f ↦ (d¹f, δf)` restricted to the κ-slice, as rows
/// over the f-coordinates, aligned with the given deformation coordinate
/// spaces; also converts a deformation into the matching right-hand side.
struct EquivalenceSystem {
    /// rows parallel to (phi coords ++ psi coords)
    rows: Vec<Vec<(usize, Rat)>>,
    ncols: usize,
}

fn build_equivalence_system(
    ps: &PoissonStructure,
    trunc: &Truncation,
    fcoords: &FCoords,
    phi_coords: &SpotCoords,
    psi_coords: &SpotCoords,
) -> EquivalenceSystem {
    let n = ps.nvars();
    let one = Polynomial::one(n);
    let mut rows: Vec<Vec<(usize, Rat)>> = Vec::new();
    // d¹f(m1⊗m2) = m1·f(m2) − f(nf(m1·m2)) + m2·f(m1)
    let keys2 = trunc.keys(Spot::C2);
    let mut per_key: BTreeMap<usize, Vec<&Mono>> = BTreeMap::new();
    for (ki, m) in &phi_coords.coords {
        per_key.entry(*ki).or_default().push(m);
    }
    for (ki, monos) in per_key {
        let key = &keys2.keys[ki];
        let t = trunc.bases.basis_tensor(2, key[0].1).clone();
        let (m1, m2) = (Polynomial::monomial(&t[0]), Polynomial::monomial(&t[1]));
        let mut acc = RowAcc::new();
        scatter_f_of(ps, trunc, fcoords, &m2, &Xform::Mult(m1.clone()), 1, &mut acc);
        scatter_f_of(ps, trunc, fcoords, &ps.nf(&m1.mul(&m2)), &Xform::Mult(one.clone()), -1, &mut acc);
        scatter_f_of(ps, trunc, fcoords, &m1, &Xform::Mult(m2.clone()), 1, &mut acc);
        for m in monos {
            let row = acc
                .rows
                .get(m)
                .map(|r| r.iter().map(|(c, v)| (*c, v.clone())).collect())
                .unwrap_or_default();
            rows.push(row);
        }
    }
    // δf(a∧b) = {a,f(b)} + {f(a),b} − f({a,b})
    let keys11 = trunc.keys(Spot::C11);
    let mut per_key11: BTreeMap<usize, Vec<&Mono>> = BTreeMap::new();
    for (ki, m) in &psi_coords.coords {
        per_key11.entry(*ki).or_default().push(m);
    }
    for (ki, monos) in per_key11 {
        let key = &keys11.keys[ki];
        let a = Polynomial::monomial(&trunc.bases.basis_tensor(1, key[0].1)[0].clone());
        let b = Polynomial::monomial(&trunc.bases.basis_tensor(1, key[1].1)[0].clone());
        let mut acc = RowAcc::new();
        scatter_f_of(ps, trunc, fcoords, &b, &Xform::Bracket(a.clone()), 1, &mut acc);
        // {f(a), b} = −{b, f(a)}
        scatter_f_of(ps, trunc, fcoords, &a, &Xform::Bracket(b.clone()), -1, &mut acc);
        scatter_f_of(ps, trunc, fcoords, &ps.bracket(&a, &b), &Xform::Mult(one.clone()), -1, &mut acc);
        for m in monos {
            let row = acc
                .rows
                .get(m)
                .map(|r| r.iter().map(|(c, v)| (*c, v.clone())).collect())
                .unwrap_or_default();
            rows.push(row);
        }
    }
    EquivalenceSystem {
        rows,
        ncols: fcoords.coords.len(),
    }
}

/// Right-hand side aligned with the system rows: the coordinates of a
/// deformation in (phi coords ++ psi coords) order grouped per key.
fn deformation_rhs(
    trunc: &Truncation,
    nvars: usize,
    d: &FirstOrderDeformation,
    phi_coords: &SpotCoords,
    psi_coords: &SpotCoords,
) -> Vec<Rat> {
    let mut rhs = Vec::new();
    let keys2 = &trunc.keys(Spot::C2).keys;
    let mut per_key: BTreeMap<usize, Vec<&Mono>> = BTreeMap::new();
    for (ki, m) in &phi_coords.coords {
        per_key.entry(*ki).or_default().push(m);
    }
    for (ki, monos) in per_key {
        let v = d.phi.value(&keys2[ki], nvars);
        for m in monos {
            rhs.push(v.coeff(m));
        }
    }
    let keys11 = &trunc.keys(Spot::C11).keys;
    let mut per_key11: BTreeMap<usize, Vec<&Mono>> = BTreeMap::new();
    for (ki, m) in &psi_coords.coords {
        per_key11.entry(*ki).or_default().push(m);
    }
    for (ki, monos) in per_key11 {
        let v = d.psi.value(&keys11[ki], nvars);
        for m in monos {
            rhs.push(v.coeff(m));
        }
    }
    rhs
}

/// Solves `(φ₂−φ₁, ψ₂−ψ₁) = (−d f, −δ f)` for a witness `f`, or reports
/// that the truncated linear system is inconsistent.
pub fn equivalence_witness(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d1: &FirstOrderDeformation,
    d2: &FirstOrderDeformation,
    d_eff: i64,
) -> Result<Option<Cochain>, DeformError> {
    let kappa = if d1.is_zero() { d2.kappa } else { d1.kappa };
    if !d1.is_zero() && !d2.is_zero() && d1.kappa != d2.kappa {
        return Err(DeformError::SliceMismatch(d1.kappa, d2.kappa));
    }
    let nvars = ps.nvars();
    let slice = TotalSlice::build(ps, trunc, kappa, d_eff);
    let phi_coords = &slice.spaces[1][0];
    let psi_coords = &slice.spaces[1][1];
    debug_assert_eq!(phi_coords.spot, Spot::C2);
    debug_assert_eq!(psi_coords.spot, Spot::C11);
    let fcoords = FCoords::build(ps, trunc, kappa, d_eff);
    let sys = build_equivalence_system(ps, trunc, &fcoords, phi_coords, psi_coords);
    let diff = d2.sub(d1)?;
    let rhs = deformation_rhs(trunc, nvars, &diff, phi_coords, psi_coords);
    // M·f = −rhs
    let mut m = SparseIntMat::new(sys.ncols + 1);
    for (row, b) in sys.rows.iter().zip(&rhs) {
        let mut r = row.clone();
        if !b.is_zero() {
            r.push((sys.ncols, b.clone()));
        }
        m.push_rat_row(&r);
    }
    let rref = m.rref();
    let mut x = vec![Rat::zero(); sys.ncols];
    for row in &rref.rows {
        if row.pivot == sys.ncols {
            return Ok(None);
        }
        let rhs_v = row
            .entries
            .iter()
            .find(|(c, _)| *c == sys.ncols)
            .map(|(_, v)| -v.clone())
            .unwrap_or_else(Rat::zero);
        x[row.pivot] = rhs_v;
    }
    // assemble the witness cochain
    let mut f = Cochain::zero(Spot::C1);
    for (col, val) in x.iter().enumerate() {
        if val.is_zero() {
            continue;
        }
        let (id, mono) = &fcoords.coords[col];
        let key: Key = vec![(1, *id)];
        let mut v = f.value(&key, nvars);
        v.add_term(mono.clone(), val.clone());
        f.set(key, v);
    }
    Ok(Some(f))
}

/// Checks the transport identities for an equivalence witness `f` on all
/// monomial pairs of total weight ≤ `d_eff`:
/// `(φ₂−φ₁)(a,b) = f(ab) − a·f(b) − b·f(a)` and
/// `(ψ₂−ψ₁)(a,b) = −({a,f(b)} + {f(a),b} − f({a,b}))`.
pub fn verify_witness(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d1: &FirstOrderDeformation,
    d2: &FirstOrderDeformation,
    f: &Cochain,
    d_eff: i64,
) -> Result<bool, DeformError> {
    let ctx = ps.ctx();
    let monos = monomials_to(ctx, ps, d_eff);
    let weights: Vec<i64> = monos.iter().map(|m| ctx.mono_weight(m)).collect();
    let diff = d2.sub(d1)?;
    for i in 0..monos.len() {
        for j in i..monos.len() {
            if weights[i] + weights[j] > d_eff {
                continue;
            }
            let (a, b) = (
                Polynomial::monomial(&monos[i]),
                Polynomial::monomial(&monos[j]),
            );
            let ab = ps.nf(&a.mul(&b));
            let lhs_phi = eval_c2(ps, trunc, &diff.phi, &a, &b)?;
            let rhs_phi = eval_c1(ps, trunc, f, &ab)?
                .sub(&a.mul(&eval_c1(ps, trunc, f, &b)?))
                .sub(&b.mul(&eval_c1(ps, trunc, f, &a)?));
            if lhs_phi != ps.nf(&rhs_phi) {
                return Ok(false);
            }
            if i < j {
                let lhs_psi = eval_c11(ps, trunc, &diff.psi, &a, &b)?;
                let delta_f = ps
                    .bracket(&a, &eval_c1(ps, trunc, f, &b)?)
                    .sub(&ps.bracket(&b, &eval_c1(ps, trunc, f, &a)?))
                    .sub(&eval_c1(ps, trunc, f, &ps.bracket(&a, &b))?);
                if lhs_psi != ps.nf(&delta_f.neg()) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// enumeration of deformation classes
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct EnumerateReport {
    pub classes: Vec<FirstOrderDeformation>,
    pub dim: usize,
    pub prev_dim: usize,
    pub stable: bool,
    pub kappa: i64,
}

/// Enumerates a basis of first-order deformation classes in the weight-`w`
/// HP² slice.  Over smooth algebras the workflow forces `φ = 0` and
/// computes with bivectors in the Lichnerowicz–Poisson slice; with a
/// quotient present, the full `(φ, ψ)` constraint system `d²φ = 0`, `(⋆)`,
/// `(⋆⋆)` is solved on monomial triples and reduced modulo the `χ_f`
/// equivalences.
pub fn enumerate_first_order(
    ps: &PoissonStructure,
    trunc: &Truncation,
    w: i64,
    d_eff: i64,
) -> Result<EnumerateReport, DeformError> {
    let l = ps.ctx().bracket_weight_l();
    let kappa = w + 2 * l;
    if ps.quotient().is_none() {
        let classes = enumerate_smooth(ps, trunc, w)?;
        let dim = classes.len();
        return Ok(EnumerateReport {
            classes,
            dim,
            prev_dim: dim,
            stable: true,
            kappa,
        });
    }
    let (classes, dim) = enumerate_singular(ps, trunc, kappa, d_eff)?;
    let (_, prev_dim) = enumerate_singular(ps, trunc, kappa, d_eff - 1)?;
    Ok(EnumerateReport {
        classes,
        dim,
        prev_dim,
        stable: dim == prev_dim,
        kappa,
    })
}

fn enumerate_smooth(
    ps: &PoissonStructure,
    trunc: &Truncation,
    w: i64,
) -> Result<Vec<FirstOrderDeformation>, DeformError> {
    let l = ps.ctx().bracket_weight_l();
    let invariant = w + 2 * l;
    let slice = build_slice(ps, invariant, 1..=3)?;
    let deg2 = slice.basis_for_degree(2).unwrap();
    let ncols = deg2.len();
    if ncols == 0 {
        return Ok(Vec::new());
    }
    let delta2 = &slice.diffs[1];
    let (_, kernel) = delta2.rank_and_kernel();
    // image of δ¹: columns of diffs[0]
    let delta1 = &slice.diffs[0];
    let mut span = Rref { cols: ncols, rows: vec![] };
    for c in 0..delta1.cols() {
        let col: Vec<(usize, Rat)> = (0..delta1.rows())
            .filter(|&r| !delta1.get(r, c).is_zero())
            .map(|r| (r, delta1.get(r, c).clone()))
            .collect();
        span.insert(&SparseVec::from_entries(col));
    }
    let n = ps.nvars();
    let mut out = Vec::new();
    for v in kernel {
        let sv = SparseVec::from_entries(
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        );
        if !span.insert(&sv) {
            continue;
        }
        // representative bivector
        let mut z = Polyvector::zero(n, 2);
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (subset, mono) = &deg2.elems[i];
            z = z.add(&Polyvector::from_components(
                n,
                2,
                vec![(subset.clone(), Polynomial::from_term(mono.clone(), c.clone()))],
            ));
        }
        out.push(FirstOrderDeformation::from_bivector(ps, trunc, &z)?);
    }
    Ok(out)
}

fn enumerate_singular(
    ps: &PoissonStructure,
    trunc: &Truncation,
    kappa: i64,
    d_eff: i64,
) -> Result<(Vec<FirstOrderDeformation>, usize), DeformError> {
    let ctx = ps.ctx();
    let nvars = ps.nvars();
    let slice = TotalSlice::build(ps, trunc, kappa, d_eff);
    let phi_coords = &slice.spaces[1][0];
    let psi_coords = &slice.spaces[1][1];
    let nphi = phi_coords.len();
    let ncols = nphi + psi_coords.len();
    if ncols == 0 {
        return Ok((Vec::new(), 0));
    }
    // constraint rows over (φ, ψ) coordinates from the three identities
    let monos = monomials_to(ctx, ps, d_eff);
    let weights: Vec<i64> = monos.iter().map(|m| ctx.mono_weight(m)).collect();
    let mut mat = SparseIntMat::new(ncols);
    let one = Polynomial::one(nvars);
    let scatter_pair = |acc: &mut RowAcc,
                        spot: Spot,
                        coords: &SpotCoords,
                        offset: usize,
                        x: &Polynomial,
                        y: &Polynomial,
                        xf: &Xform,
                        sign: i64|
     -> Result<(), TruncationError> {
        for (mx, cx) in x.terms() {
            for (my, cy) in y.terms() {
                let pairs: Vec<(usize, Rat)> = match spot {
                    Spot::C2 => trunc
                        .bases
                        .reduce_tensor(ps, &[mx.clone(), my.clone()])?
                        .into_iter()
                        .map(|(id, c)| (trunc.keys(Spot::C2).position(&vec![(2, id)]).unwrap(), c))
                        .collect(),
                    Spot::C11 => {
                        if mx == my {
                            vec![]
                        } else {
                            let (ia, ib) = (ch1_id(trunc, mx), ch1_id(trunc, my));
                            let (key, s) = canonicalize(vec![(1, ia), (1, ib)]).unwrap();
                            match trunc.keys(Spot::C11).position(&key) {
                                Some(p) => vec![(p, Rat::from_integer(s.into()))],
                                None => vec![],
                            }
                        }
                    }
                    _ => unreachable!(),
                };
                for (ki, kc) in pairs {
                    // all value monomials of this key in the slice
                    for (local, (cki, nu)) in coords.coords.iter().enumerate() {
                        if *cki != ki {
                            continue;
                        }
                        let base = Polynomial::monomial(nu)
                            .scale(&(cx * cy * &kc * Rat::from_integer(sign.into())));
                        let poly = match xf {
                            Xform::Mult(p) => ps.nf(&base.mul(p)),
                            Xform::Bracket(p) => ps.bracket(p, &base),
                        };
                        acc.scatter(offset + local, &poly);
                    }
                }
            }
        }
        Ok(())
    };
    for ia in 0..monos.len() {
        for ib in 0..monos.len() {
            let wab = weights[ia] + weights[ib];
            if wab > d_eff {
                continue;
            }
            for ic in 0..monos.len() {
                if wab + weights[ic] > d_eff {
                    continue;
                }
                let (a, b, c) = (
                    Polynomial::monomial(&monos[ia]),
                    Polynomial::monomial(&monos[ib]),
                    Polynomial::monomial(&monos[ic]),
                );
                if ia < ic {
                    // φ(ab,c) + cφ(a,b) − φ(a,bc) − aφ(b,c) = 0
                    let mut acc = RowAcc::new();
                    let ab = ps.nf(&a.mul(&b));
                    let bc = ps.nf(&b.mul(&c));
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &ab, &c, &Xform::Mult(one.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &a, &b, &Xform::Mult(c.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &a, &bc, &Xform::Mult(one.clone()), -1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &b, &c, &Xform::Mult(a.clone()), -1)?;
                    for (_, row) in acc.rows {
                        mat.push_rat_row(&row.into_iter().collect::<Vec<_>>());
                    }
                }
                if ib <= ic {
                    // (⋆)
                    let mut acc = RowAcc::new();
                    let bc = ps.nf(&b.mul(&c));
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &a, &bc, &Xform::Mult(one.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &a, &b, &Xform::Mult(c.clone()), -1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &a, &c, &Xform::Mult(b.clone()), -1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &ps.bracket(&a, &b), &c, &Xform::Mult(one.clone()), -1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &ps.bracket(&a, &c), &b, &Xform::Mult(one.clone()), -1)?;
                    scatter_pair(&mut acc, Spot::C2, phi_coords, 0, &b, &c, &Xform::Bracket(a.clone()), 1)?;
                    for (_, row) in acc.rows {
                        mat.push_rat_row(&row.into_iter().collect::<Vec<_>>());
                    }
                }
                if ia < ib && ib < ic {
                    // (⋆⋆)
                    let mut acc = RowAcc::new();
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &a, &ps.bracket(&b, &c), &Xform::Mult(one.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &b, &ps.bracket(&c, &a), &Xform::Mult(one.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &c, &ps.bracket(&a, &b), &Xform::Mult(one.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &b, &c, &Xform::Bracket(a.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &c, &a, &Xform::Bracket(b.clone()), 1)?;
                    scatter_pair(&mut acc, Spot::C11, psi_coords, nphi, &a, &b, &Xform::Bracket(c.clone()), 1)?;
                    for (_, row) in acc.rows {
                        mat.push_rat_row(&row.into_iter().collect::<Vec<_>>());
                    }
                }
            }
        }
    }
    let rref = mat.rref();
    let kernel = rref.kernel_basis();
    // span of the χ_f equivalences: columns of (−d¹f, −δf) per f-coordinate
    let fcoords = FCoords::build(ps, trunc, kappa, d_eff);
    let sys = build_equivalence_system(ps, trunc, &fcoords, phi_coords, psi_coords);
    let mut span = Rref { cols: ncols, rows: vec![] };
    // transpose the system rows into columns over the deformation space
    let mut cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); sys.ncols];
    for (r, row) in sys.rows.iter().enumerate() {
        for (c, v) in row {
            cols[*c].push((r, v.clone()));
        }
    }
    for col in cols {
        span.insert(&SparseVec::from_entries(col));
    }
    let mut classes = Vec::new();
    for v in kernel {
        if !span.insert(&v) {
            continue;
        }
        let dense = v.to_dense(ncols);
        let phi_part: Vec<(usize, Rat)> = dense[..nphi]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.clone()))
            .collect();
        let psi_part: Vec<(usize, Rat)> = dense[nphi..]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.clone()))
            .collect();
        classes.push(FirstOrderDeformation {
            kappa,
            phi: phi_coords.cochain_from_coords(trunc, nvars, &phi_part),
            psi: psi_coords.cochain_from_coords(trunc, nvars, &psi_part),
        });
    }
    let dim = classes.len();
    Ok((classes, dim))
}

// ---------------------------------------------------------------------------
// dual-number tables
// ---------------------------------------------------------------------------

/// Multiplication and bracket tables of `A ⊕ Aε` over the truncated
/// monomial basis, re-verified independently after construction.
#[derive(Debug)]
pub struct DualNumberTables {
    pub monomials: Vec<Mono>,
    /// unordered pair (i ≤ j) -> (A-part, ε-part) of `m_i * m_j`
    pub product: BTreeMap<(usize, usize), (Polynomial, Polynomial)>,
    /// ordered pair (i < j) -> (A-part, ε-part) of `{m_i, m_j}_ε`
    pub bracket: BTreeMap<(usize, usize), (Polynomial, Polynomial)>,
    pub identities_checked: usize,
}

/// A dual number `p + qε` with polynomial parts.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Dual(Polynomial, Polynomial);

impl DualNumberTables {
    fn index(&self, m: &Mono) -> usize {
        self.monomials.binary_search(m).expect("monomial outside table")
    }

    /// `Φ(p, r)` through the emitted table, extended bilinearly.
    fn table_eps(
        &self,
        table: &BTreeMap<(usize, usize), (Polynomial, Polynomial)>,
        ordered: bool,
        p: &Polynomial,
        r: &Polynomial,
        nvars: usize,
    ) -> Polynomial {
        let mut out = Polynomial::zero(nvars);
        for (mp, cp) in p.terms() {
            for (mr, cr) in r.terms() {
                let (i, j) = (self.index(mp), self.index(mr));
                let (key, sign) = if !ordered || i <= j {
                    ((i.min(j), i.max(j)), 1i64)
                } else {
                    ((j, i), -1)
                };
                if ordered && i == j {
                    continue;
                }
                if let Some((_, eps)) = table.get(&key) {
                    let c = cp * cr * Rat::from_integer(sign.into());
                    out = out.add(&eps.scale(&c));
                }
            }
        }
        out
    }

    fn mul(&self, ps: &PoissonStructure, a: &Dual, b: &Dual) -> Dual {
        let n = ps.nvars();
        let apart = ps.nf(&a.0.mul(&b.0));
        let eps = ps
            .nf(&a.0.mul(&b.1).add(&a.1.mul(&b.0)))
            .add(&self.table_eps(&self.product, false, &a.0, &b.0, n));
        Dual(apart, ps.nf(&eps))
    }

    fn brk(&self, ps: &PoissonStructure, a: &Dual, b: &Dual) -> Dual {
        let n = ps.nvars();
        let apart = ps.bracket(&a.0, &b.0);
        let eps = ps
            .bracket(&a.0, &b.1)
            .add(&ps.bracket(&a.1, &b.0))
            .add(&self.table_eps(&self.bracket, true, &a.0, &b.0, n));
        Dual(apart, ps.nf(&eps))
    }
}

/// Emits the product/bracket tables of the deformed algebra and re-verifies
/// associativity, commutativity, Leibniz and Jacobi on all monomial triples
/// of total weight ≤ `d_eff` through the tables themselves.
pub fn build_dual_number_algebra(
    ps: &PoissonStructure,
    trunc: &Truncation,
    d: &FirstOrderDeformation,
    d_eff: i64,
) -> Result<DualNumberTables, DeformError> {
    let ctx = ps.ctx();
    let mut monomials = monomials_to(ctx, ps, d_eff);
    monomials.sort();
    let weights: Vec<i64> = monomials.iter().map(|m| ctx.mono_weight(m)).collect();
    let mut product = BTreeMap::new();
    let mut bracket = BTreeMap::new();
    for i in 0..monomials.len() {
        for j in i..monomials.len() {
            if weights[i] + weights[j] > d_eff {
                continue;
            }
            let (a, b) = (
                Polynomial::monomial(&monomials[i]),
                Polynomial::monomial(&monomials[j]),
            );
            product.insert(
                (i, j),
                (ps.nf(&a.mul(&b)), eval_c2(ps, trunc, &d.phi, &a, &b)?),
            );
            if i < j {
                bracket.insert(
                    (i, j),
                    (ps.bracket(&a, &b), eval_c11(ps, trunc, &d.psi, &a, &b)?),
                );
            }
        }
    }
    let tables = DualNumberTables {
        monomials: monomials.clone(),
        product,
        bracket,
        identities_checked: 0,
    };
    // independent re-verification through the tables
    let mut checked = 0usize;
    let n = ps.nvars();
    for i in 0..monomials.len() {
        for j in 0..monomials.len() {
            let wij = weights[i] + weights[j];
            if wij > d_eff {
                continue;
            }
            for k in 0..monomials.len() {
                if wij + weights[k] > d_eff {
                    continue;
                }
                let a = Dual(Polynomial::monomial(&monomials[i]), Polynomial::zero(n));
                let b = Dual(Polynomial::monomial(&monomials[j]), Polynomial::zero(n));
                let c = Dual(Polynomial::monomial(&monomials[k]), Polynomial::zero(n));
                if i <= j && j <= k {
                    checked += 1;
                    let lhs = tables.mul(ps, &tables.mul(ps, &a, &b), &c);
                    let rhs = tables.mul(ps, &a, &tables.mul(ps, &b, &c));
                    if lhs != rhs {
                        return Err(DeformError::TableCheckFailed("associativity"));
                    }
                }
                if i < j && k == 0 {
                    checked += 1;
                    if tables.mul(ps, &a, &b) != tables.mul(ps, &b, &a) {
                        return Err(DeformError::TableCheckFailed("commutativity"));
                    }
                }
                if j <= k {
                    checked += 1;
                    // {a, b·c} = {a,b}·c + {a,c}·b
                    let lhs = tables.brk(ps, &a, &tables.mul(ps, &b, &c));
                    let rhs = tables
                        .mul(ps, &tables.brk(ps, &a, &b), &c)
                        .add(ps, &tables.mul(ps, &tables.brk(ps, &a, &c), &b));
                    if lhs != rhs {
                        return Err(DeformError::TableCheckFailed("Leibniz"));
                    }
                }
                if i < j && j < k {
                    checked += 1;
                    let s1 = tables.brk(ps, &a, &tables.brk(ps, &b, &c));
                    let s2 = tables.brk(ps, &b, &tables.brk(ps, &c, &a));
                    let s3 = tables.brk(ps, &c, &tables.brk(ps, &a, &b));
                    let total = s1.add(ps, &s2).add(ps, &s3);
                    if !total.0.is_zero() || !total.1.is_zero() {
                        return Err(DeformError::TableCheckFailed("Jacobi"));
                    }
                }
            }
        }
    }
    Ok(DualNumberTables {
        identities_checked: checked,
        ..tables
    })
}

impl Dual {
    fn add(&self, _ps: &PoissonStructure, other: &Dual) -> Dual {
        Dual(self.0.add(&other.0), self.1.add(&other.1))
    }
}
