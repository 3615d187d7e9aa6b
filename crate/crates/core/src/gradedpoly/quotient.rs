//! Normal forms modulo a single weighted-homogeneous relation whose leading
//! monomial is a pure power of one variable.
//!
//! With a pure-power head `x_i^d`, homogeneity forces every other term of the
//! relation to have `x_i`-degree strictly below `d`, so the single rewrite
//! rule `x_i^d -> -(rest)/c` terminates and the normal form is the remainder
//! of division by the relation viewed as a monic polynomial in `x_i`.  That
//! makes normal forms canonical: `nf(p) = 0` iff `p` lies in the ideal.

use super::{Mono, Polynomial, Rat, WeightedContext};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuotientError {
    #[error("relation must be weighted-homogeneous")]
    NotHomogeneous,
    #[error("relation is zero")]
    ZeroRelation,
    #[error("relation has no pure-power term to use as a leading monomial")]
    NoPurePowerTerm,
    #[error("requested leading variable `{0}` does not occur as a pure power")]
    BadLeadingVariable(String),
}

/// A quotient presentation `A = k[vars]/(relation)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientPresentation {
    relation: Polynomial,
    lead_var: usize,
    lead_deg: u32,
    /// `x_lead^lead_deg` rewrites to this polynomial.
    reducer: Polynomial,
}

impl QuotientPresentation {
    /// Picks the pure-power term of the highest-indexed variable as the
    /// leading monomial.
    pub fn new(relation: Polynomial, ctx: &WeightedContext) -> Result<Self, QuotientError> {
        let candidates = pure_power_terms(&relation);
        match candidates.last() {
            Some(&(var, _)) => Self::with_leading_variable(relation, var, ctx),
            None => {
                if relation.is_zero() {
                    Err(QuotientError::ZeroRelation)
                } else {
                    Err(QuotientError::NoPurePowerTerm)
                }
            }
        }
    }

    /// Uses the pure-power term in the given variable as the leading monomial.
    pub fn with_leading_variable(
        relation: Polynomial,
        lead_var: usize,
        ctx: &WeightedContext,
    ) -> Result<Self, QuotientError> {
        if relation.is_zero() {
            return Err(QuotientError::ZeroRelation);
        }
        if relation.homogeneous_weight(ctx).is_none() {
            return Err(QuotientError::NotHomogeneous);
        }
        let found = pure_power_terms(&relation)
            .into_iter()
            .find(|&(v, _)| v == lead_var);
        let (_, lead_deg) = found.ok_or_else(|| {
            QuotientError::BadLeadingVariable(ctx.var_name(lead_var).to_string())
        })?;
        let mut lead_mono = vec![0u32; relation.nvars()];
        lead_mono[lead_var] = lead_deg;
        let lead_coeff = relation.coeff(&lead_mono);
        // reducer = -(relation - c*lead)/c, so that lead ≡ reducer mod relation
        let rest = relation.sub(&Polynomial::from_term(lead_mono, lead_coeff.clone()));
        let reducer = rest.scale(&(-lead_coeff.recip()));
        Ok(QuotientPresentation {
            relation,
            lead_var,
            lead_deg,
            reducer,
        })
    }

    pub fn relation(&self) -> &Polynomial {
        &self.relation
    }

    pub fn leading_monomial(&self) -> Mono {
        let mut m = vec![0u32; self.relation.nvars()];
        m[self.lead_var] = self.lead_deg;
        m
    }

    pub fn is_reducible(&self, mono: &[u32]) -> bool {
        mono[self.lead_var] >= self.lead_deg
    }

    /// Canonical representative of `p` modulo the relation: no monomial of
    /// the result is divisible by the leading monomial.
    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(p.nvars());
        let mut work: Vec<(Mono, Rat)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            if !self.is_reducible(&m) {
                out.add_term(m, c);
                continue;
            }
            // m = lead * m̂ ; substitute lead -> reducer
            let mut hat = m.clone();
            hat[self.lead_var] -= self.lead_deg;
            for (rm, rc) in self.reducer.terms() {
                let prod: Mono = rm.iter().zip(&hat).map(|(&a, &b)| a + b).collect();
                work.push((prod, rc * &c));
            }
        }
        out
    }
}

fn pure_power_terms(p: &Polynomial) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for (m, _) in p.terms() {
        let nz: Vec<usize> = (0..m.len()).filter(|&i| m[i] > 0).collect();
        if nz.len() == 1 {
            out.push((nz[0], m[nz[0]]));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_polynomial, WeightedContext};
    use super::*;

    fn sl2_ctx() -> WeightedContext {
        WeightedContext::new(vec!["e".into(), "f".into(), "h".into()], vec![2, 2, 2], 2).unwrap()
    }

    fn a1_quotient(ctx: &WeightedContext) -> QuotientPresentation {
        let rel = parse_polynomial("h^2 + 4*e*f", ctx).unwrap();
        QuotientPresentation::new(rel, ctx).unwrap()
    }

    #[test]
    fn one_step_rewrite() {
        let ctx = sl2_ctx();
        let q = a1_quotient(&ctx);
        assert_eq!(q.leading_monomial(), vec![0, 0, 2]);
        let h2 = parse_polynomial("h^2", &ctx).unwrap();
        assert_eq!(q.normal_form(&h2), parse_polynomial("-4*e*f", &ctx).unwrap());
    }

    #[test]
    fn two_step_reduction() {
        let ctx = sl2_ctx();
        let q = a1_quotient(&ctx);
        let p = parse_polynomial("e*h^2 + e", &ctx).unwrap();
        assert_eq!(
            q.normal_form(&p),
            parse_polynomial("-4*e^2*f + e", &ctx).unwrap()
        );
    }

    #[test]
    fn already_reduced() {
        let ctx = WeightedContext::new(vec!["x".into(), "y".into()], vec![3, 2], 1).unwrap();
        // y^3 - x^2 is homogeneous of weight 6; leading variable y
        let rel = parse_polynomial("y^3 - x^2", &ctx).unwrap();
        let q = QuotientPresentation::with_leading_variable(rel, 1, &ctx).unwrap();
        let x = parse_polynomial("x", &ctx).unwrap();
        assert_eq!(q.normal_form(&x), x);
    }

    #[test]
    fn monomial_basis_with_quotient() {
        let ctx = sl2_ctx();
        let q = a1_quotient(&ctx);
        let basis = ctx.monomials_of_weight(4, Some(&q));
        // [e^2, e*f, e*h, f^2, f*h]; h^2 rewritten away
        assert_eq!(
            basis,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1]
            ]
        );
    }

    #[test]
    fn nf_is_idempotent_and_ring_compatible() {
        let ctx = sl2_ctx();
        let q = a1_quotient(&ctx);
        let p = parse_polynomial("h^3 + e*f*h + h", &ctx).unwrap();
        let r = parse_polynomial("e*h^2 - f", &ctx).unwrap();
        let nf_p = q.normal_form(&p);
        assert_eq!(q.normal_form(&nf_p), nf_p);
        let lhs = q.normal_form(&p.mul(&r));
        let rhs = q.normal_form(&q.normal_form(&p).mul(&q.normal_form(&r)));
        assert_eq!(lhs, rhs);
        // nf(relation * anything) = 0
        assert!(q.normal_form(&q.relation().mul(&r)).is_zero());
    }
}
