//! Shared fixtures and random generators for the integration suites.

use poisson_coh::cartan::Polyvector;
use poisson_coh::cli::builtin;
use poisson_coh::gradedpoly::{rat_int, Mono, Polynomial, Rat, WeightedContext};
use poisson_coh::lp_cohomology::PolyvectorBasis;
use poisson_coh::poisson::PoissonStructure;
use rand::rngs::StdRng;
use rand::Rng;

pub fn structure(name: &str) -> PoissonStructure {
    builtin(name)
        .unwrap_or_else(|| panic!("unknown builtin {name}"))
        .to_structure(false)
        .unwrap()
}

pub fn random_coeff(rng: &mut StdRng) -> Rat {
    let n = rng.random_range(-6i64..=6);
    let d = rng.random_range(1i64..=3);
    rat_int(n) / rat_int(d)
}

pub fn random_monomial(ctx: &WeightedContext, rng: &mut StdRng, max_weight: i64) -> Mono {
    loop {
        let w = rng.random_range(0..=max_weight);
        let all = ctx.monomials_of_weight(w, None);
        if !all.is_empty() {
            return all[rng.random_range(0..all.len())].clone();
        }
    }
}

pub fn random_poly(ctx: &WeightedContext, rng: &mut StdRng, terms: usize, max_weight: i64) -> Polynomial {
    let mut p = Polynomial::zero(ctx.nvars());
    for _ in 0..terms {
        p.add_term(random_monomial(ctx, rng, max_weight), random_coeff(rng));
    }
    p
}

/// Random weighted-homogeneous polyvector drawn from a graded basis spot.
pub fn random_homogeneous_polyvector(
    ps: &PoissonStructure,
    rng: &mut StdRng,
    degree: usize,
    weight: i64,
) -> Option<Polyvector> {
    let basis = PolyvectorBasis::build(ps, degree, weight);
    if basis.is_empty() {
        return None;
    }
    let n = ps.nvars();
    let mut p = Polyvector::zero(n, degree);
    for _ in 0..rng.random_range(1..=3usize) {
        let i = rng.random_range(0..basis.len());
        let c = random_coeff(rng);
        p = p.add(&basis.element(i, n).scale(&c));
    }
    Some(p)
}
