//! Poisson structures: the bracket induced by a bivector, Jacobi
//! verification on coordinate triples, Hamiltonian vector fields and
//! weighted-homogeneity audits, optionally on a quotient algebra.

use crate::cartan::Polyvector;
use crate::gradedpoly::{Polynomial, QuotientPresentation, WeightedContext};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PoissonError {
    #[error("bivector must have degree 2, got {0}")]
    NotABivector(usize),
    #[error("bivector is over {0} variables but the context has {1}")]
    ArityMismatch(usize, usize),
    #[error("Jacobi identity fails on coordinates ({0}, {1}, {2})")]
    JacobiFailure(String, String, String),
    #[error("bracket does not preserve the relation ideal: {{relation, {0}}} is not in the ideal")]
    IdealNotPreserved(String),
}

/// Outcome of checking the jacobiator on all coordinate triples.
///
/// The jacobiator of a biderivation is itself a triderivation, so vanishing
/// on coordinate triples implies vanishing identically; the randomized
/// property tests cross-check that reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobiReport {
    Pass { triples_checked: usize },
    Counterexample { triple: (usize, usize, usize), jacobiator: Polynomial },
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        matches!(self, JacobiReport::Pass { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairWeightReport {
    pub i: usize,
    pub j: usize,
    pub bracket: Polynomial,
    pub homogeneous: bool,
    /// `w_i + w_j − weight({x_i,x_j})` when the bracket is nonzero homogeneous.
    pub inferred_l: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAudit {
    pub pairs: Vec<PairWeightReport>,
    /// Common inferred `l`, when all nonzero brackets agree.
    pub inferred_l: Option<i64>,
    pub declared_l: i64,
    /// Every coordinate bracket homogeneous with the declared `l`.
    pub homogeneous: bool,
}

/// A Poisson bivector over a weighted context, with an optional quotient
/// presentation.  All operations return normal forms when a quotient is
/// present.
#[derive(Debug, Clone)]
pub struct PoissonStructure {
    ctx: WeightedContext,
    theta: Polyvector,
    quotient: Option<QuotientPresentation>,
}

impl PoissonStructure {
    /// Builds and verifies the structure: Jacobi on coordinate triples, and
    /// ideal preservation on generators in the quotient case.
    pub fn new(
        ctx: WeightedContext,
        theta: Polyvector,
        quotient: Option<QuotientPresentation>,
    ) -> Result<Self, PoissonError> {
        let ps = Self::new_deferred(ctx, theta, quotient)?;
        if let JacobiReport::Counterexample { triple: (i, j, k), .. } = ps.jacobi_check() {
            return Err(PoissonError::JacobiFailure(
                ps.ctx.var_name(i).to_string(),
                ps.ctx.var_name(j).to_string(),
                ps.ctx.var_name(k).to_string(),
            ));
        }
        ps.check_ideal_preserved()?;
        Ok(ps)
    }

    /// Builds without running the Jacobi and ideal checks.
    pub fn new_deferred(
        ctx: WeightedContext,
        theta: Polyvector,
        quotient: Option<QuotientPresentation>,
    ) -> Result<Self, PoissonError> {
        if theta.degree() != 2 {
            return Err(PoissonError::NotABivector(theta.degree()));
        }
        if theta.nvars() != ctx.nvars() {
            return Err(PoissonError::ArityMismatch(theta.nvars(), ctx.nvars()));
        }
        let theta = match &quotient {
            Some(q) => theta.map_coeffs(|c| q.normal_form(c)),
            None => theta,
        };
        Ok(PoissonStructure { ctx, theta, quotient })
    }

    pub fn ctx(&self) -> &WeightedContext {
        &self.ctx
    }

    pub fn theta(&self) -> &Polyvector {
        &self.theta
    }

    pub fn quotient(&self) -> Option<&QuotientPresentation> {
        self.quotient.as_ref()
    }

    pub fn nvars(&self) -> usize {
        self.ctx.nvars()
    }

    /// Normal form with respect to the quotient, identity without one.
    pub fn nf(&self, p: &Polynomial) -> Polynomial {
        match &self.quotient {
            Some(q) => q.normal_form(p),
            None => p.clone(),
        }
    }

    /// `{f, g} = Θ(df ∧ dg)`, in normal form.
    pub fn bracket(&self, f: &Polynomial, g: &Polynomial) -> Polynomial {
        self.nf(&self.theta.evaluate_on_exacts(&[f.clone(), g.clone()]).unwrap())
    }

    pub fn bracket_vars(&self, i: usize, j: usize) -> Polynomial {
        let n = self.nvars();
        self.bracket(&Polynomial::variable(n, i), &Polynomial::variable(n, j))
    }

    fn jacobiator_vars(&self, i: usize, j: usize, k: usize) -> Polynomial {
        let n = self.nvars();
        let (xi, xj, xk) = (
            Polynomial::variable(n, i),
            Polynomial::variable(n, j),
            Polynomial::variable(n, k),
        );
        self.jacobiator(&xi, &xj, &xk)
    }

    pub fn jacobiator(&self, a: &Polynomial, b: &Polynomial, c: &Polynomial) -> Polynomial {
        let s1 = self.bracket(a, &self.bracket(b, c));
        let s2 = self.bracket(b, &self.bracket(c, a));
        let s3 = self.bracket(c, &self.bracket(a, b));
        self.nf(&s1.add(&s2).add(&s3))
    }

    /// Checks the jacobiator on all coordinate triples.
    pub fn jacobi_check(&self) -> JacobiReport {
        let n = self.nvars();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    count += 1;
                    let jac = self.jacobiator_vars(i, j, k);
                    if !jac.is_zero() {
                        return JacobiReport::Counterexample {
                            triple: (i, j, k),
                            jacobiator: jac,
                        };
                    }
                }
            }
        }
        JacobiReport::Pass { triples_checked: count }
    }

    /// In the quotient case, every `{relation, x_i}` must reduce to zero:
    /// normal forms are canonical, so that is exactly membership in the ideal.
    pub fn check_ideal_preserved(&self) -> Result<(), PoissonError> {
        let q = match &self.quotient {
            Some(q) => q,
            None => return Ok(()),
        };
        let n = self.nvars();
        let rel = q.relation().clone();
        for i in 0..n {
            let br = self.bracket(&rel, &Polynomial::variable(n, i));
            if !br.is_zero() {
                return Err(PoissonError::IdealNotPreserved(
                    self.ctx.var_name(i).to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Hamiltonian vector field: `H_f = Σ_j {f, x_j} ∂_j`, so `H_f(g) = {f,g}`.
    pub fn hamiltonian_field(&self, f: &Polynomial) -> Polyvector {
        let n = self.nvars();
        let comps: Vec<(Vec<usize>, Polynomial)> = (0..n)
            .map(|j| (vec![j], self.bracket(f, &Polynomial::variable(n, j))))
            .collect();
        Polyvector::from_components(n, 1, comps)
    }

    /// Per-pair homogeneity report and inferred bracket weight.
    pub fn weight_audit(&self) -> WeightAudit {
        let n = self.nvars();
        let declared_l = self.ctx.bracket_weight_l();
        let mut pairs = Vec::new();
        let mut inferred: Option<i64> = None;
        let mut consistent = true;
        let mut homogeneous = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let br = self.bracket_vars(i, j);
                let hw = br.homogeneous_weight(&self.ctx);
                let is_hom = hw.is_some();
                let pair_l = if br.is_zero() {
                    None
                } else {
                    hw.map(|w| self.ctx.weight(i) + self.ctx.weight(j) - w)
                };
                if !is_hom {
                    homogeneous = false;
                }
                if let Some(l) = pair_l {
                    match inferred {
                        None => inferred = Some(l),
                        Some(prev) if prev != l => consistent = false,
                        _ => {}
                    }
                    if l != declared_l {
                        homogeneous = false;
                    }
                }
                pairs.push(PairWeightReport {
                    i,
                    j,
                    bracket: br,
                    homogeneous: is_hom,
                    inferred_l: pair_l,
                });
            }
        }
        WeightAudit {
            pairs,
            inferred_l: if consistent { inferred } else { None },
            declared_l,
            homogeneous,
        }
    }

    /// True when every coordinate bracket is homogeneous with the declared `l`.
    pub fn is_weighted_homogeneous(&self) -> bool {
        self.weight_audit().homogeneous
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::parse_polynomial;

    pub fn symplectic2() -> PoissonStructure {
        let ctx = WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap();
        let one = Polynomial::one(2);
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], one)]);
        PoissonStructure::new(ctx, theta, None).unwrap()
    }

    pub fn sl2star() -> PoissonStructure {
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
    fn bracket_examples() {
        let ps = symplectic2();
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        assert_eq!(ps.bracket(&p("x"), &p("y")), p("1"));
        assert_eq!(ps.bracket(&p("x^2"), &p("y")), p("2*x"));

        let sl2 = sl2star();
        let q = |s: &str| parse_polynomial(s, sl2.ctx()).unwrap();
        assert_eq!(sl2.bracket(&q("e"), &q("f")), q("h"));
        assert_eq!(sl2.bracket(&q("h"), &q("e")), q("2*e"));
        assert!(sl2.bracket(&q("h"), &q("e*f")).is_zero());
    }

    #[test]
    fn jacobi_examples() {
        assert!(symplectic2().jacobi_check().passed());
        assert!(sl2star().jacobi_check().passed());

        // Θ = ∂x∧∂y + x·∂x∧∂z fails Jacobi with jacobiator 1 on (x,y,z)
        let ctx = WeightedContext::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![1, 1, 1],
            2,
        )
        .unwrap();
        let ctx2 = ctx.clone();
        let p = move |s: &str| parse_polynomial(s, &ctx2).unwrap();
        let theta = Polyvector::from_components(
            3,
            2,
            vec![(vec![0, 1], p("1")), (vec![0, 2], p("x"))],
        );
        let ps = PoissonStructure::new_deferred(ctx, theta, None).unwrap();
        match ps.jacobi_check() {
            JacobiReport::Counterexample { triple, jacobiator } => {
                assert_eq!(triple, (0, 1, 2));
                assert_eq!(jacobiator, p("1"));
            }
            _ => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let ps = symplectic2();
        let p = |s: &str| parse_polynomial(s, ps.ctx()).unwrap();
        let hx = ps.hamiltonian_field(&p("x"));
        assert_eq!(hx.component(&[1]), p("1"));
        assert!(hx.component(&[0]).is_zero());
        let hy = ps.hamiltonian_field(&p("y"));
        assert_eq!(hy.component(&[0]), p("-1"));

        let sl2 = sl2star();
        let q = |s: &str| parse_polynomial(s, sl2.ctx()).unwrap();
        assert!(sl2.hamiltonian_field(&q("h^2 + 4*e*f")).is_zero());
    }

    #[test]
    fn weight_audit_examples() {
        let ps = symplectic2();
        let audit = ps.weight_audit();
        assert!(audit.homogeneous);
        assert_eq!(audit.inferred_l, Some(2));

        let sl2 = sl2star();
        let audit = sl2.weight_audit();
        assert!(audit.homogeneous);
        assert_eq!(audit.inferred_l, Some(2));

        // (1+x)∂x∧∂y is not weighted-homogeneous
        let ctx = WeightedContext::new(vec!["x".into(), "y".into()], vec![1, 1], 2).unwrap();
        let p = |s: &str| parse_polynomial(s, &ctx).unwrap();
        let theta = Polyvector::from_components(2, 2, vec![(vec![0, 1], p("1 + x"))]);
        let ps = PoissonStructure::new(ctx, theta, None).unwrap();
        assert!(!ps.weight_audit().homogeneous);
    }
}
