//! Python bindings: a `Structure` class wrapping a Poisson structure with
//! its truncated Harrison data, plus free functions mirroring the CLI.
//!
//! Usage from Python:
//!
//!     from poisson_coh import Structure
//!     s = Structure.example("sl2star")
//!     s.bracket("e", "f")            # -> "h"
//!     s.hp_dimension(0, 4)           # -> 1  (the Casimir)
//!     s.total_hp(2, -6, trunc=8)     # -> (1, True)

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::sync::Mutex;

use poisson_coh::cli::{builtin, builtin_names, DeformationFile, StructureDescription};
use poisson_coh::deform;
use poisson_coh::gradedpoly::parse_polynomial;
use poisson_coh::harrison::{total_hp, Truncation};
use poisson_coh::lp_cohomology::{
    chain_map_residual, derham_slice_dimension, hp_dimension, ComplexVariant,
};
use poisson_coh::poisson::{JacobiReport, PoissonStructure};
use poisson_coh::Polyvector;

fn value_err(msg: impl ToString) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

/// A weighted-homogeneous polynomial Poisson structure.
#[pyclass]
struct Structure {
    desc: StructureDescription,
    ps: PoissonStructure,
    /// lazily built truncated Harrison data, keyed by the truncation bound
    trunc: Mutex<Option<(i64, Truncation)>>,
}

impl Structure {
    fn with_trunc<T>(
        &self,
        d: i64,
        f: impl FnOnce(&PoissonStructure, &Truncation) -> PyResult<T>,
    ) -> PyResult<T> {
        let mut guard = self.trunc.lock().expect("truncation cache poisoned");
        let rebuild = match guard.as_ref() {
            Some((have, _)) => *have < d,
            None => true,
        };
        if rebuild {
            *guard = Some((d, Truncation::new(&self.ps, d)));
        }
        let (_, trunc) = guard.as_ref().unwrap();
        f(&self.ps, trunc)
    }
}

#[pymethods]
impl Structure {
    /// Load one of the built-in structures:
    /// symplectic2, symplectic4, sl2star, a1cone.
    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        let desc = builtin(name).ok_or_else(|| {
            value_err(format!(
                "unknown example `{name}`; available: {}",
                builtin_names().join(", ")
            ))
        })?;
        let ps = desc.to_structure(false).map_err(value_err)?;
        Ok(Structure {
            desc,
            ps,
            trunc: Mutex::new(None),
        })
    }

    /// Load a structure from its JSON description.
    #[staticmethod]
    #[pyo3(signature = (text, defer_jacobi=false))]
    fn from_json(text: &str, defer_jacobi: bool) -> PyResult<Self> {
        let desc: StructureDescription =
            serde_json::from_str(text).map_err(|e| value_err(format!("bad structure: {e}")))?;
        let ps = desc.to_structure(defer_jacobi).map_err(value_err)?;
        Ok(Structure {
            desc,
            ps,
            trunc: Mutex::new(None),
        })
    }

    fn name(&self) -> String {
        self.desc.display_name().to_string()
    }

    fn structure_hash(&self) -> String {
        self.desc.hash()
    }

    fn variables(&self) -> Vec<String> {
        self.ps.ctx().var_names().to_vec()
    }

    /// `{f, g}` in normal form, as polynomial text.
    fn bracket(&self, f: &str, g: &str) -> PyResult<String> {
        let ctx = self.ps.ctx();
        let pf = parse_polynomial(f, ctx).map_err(value_err)?;
        let pg = parse_polynomial(g, ctx).map_err(value_err)?;
        Ok(self.ps.bracket(&pf, &pg).to_text(ctx))
    }

    /// Checks the Jacobi identity on coordinate triples; returns the
    /// offending triple as a list, or None when the identity holds.
    fn jacobi_counterexample(&self) -> Option<Vec<String>> {
        match self.ps.jacobi_check() {
            JacobiReport::Pass { .. } => None,
            JacobiReport::Counterexample { triple, .. } => {
                let ctx = self.ps.ctx();
                Some(vec![
                    ctx.var_name(triple.0).to_string(),
                    ctx.var_name(triple.1).to_string(),
                    ctx.var_name(triple.2).to_string(),
                ])
            }
        }
    }

    /// Coefficients of the Hamiltonian vector field `H_f` per variable.
    fn hamiltonian_field(&self, f: &str) -> PyResult<Vec<String>> {
        let ctx = self.ps.ctx();
        let pf = parse_polynomial(f, ctx).map_err(value_err)?;
        let h = self.ps.hamiltonian_field(&pf);
        Ok((0..ctx.nvars())
            .map(|i| h.component(&[i]).to_text(ctx))
            .collect())
    }

    /// (homogeneous?, inferred l) from the per-pair weight audit.
    fn weight_audit(&self) -> (bool, Option<i64>) {
        let audit = self.ps.weight_audit();
        (audit.homogeneous, audit.inferred_l)
    }

    /// Lichnerowicz-Poisson cohomology dimension at (degree, weight).
    /// `extended=True` includes the degree-0 extension.
    #[pyo3(signature = (degree, weight, extended=true))]
    fn hp_dimension(&self, degree: usize, weight: i64, extended: bool) -> PyResult<usize> {
        let variant = if extended {
            ComplexVariant::Extended
        } else {
            ComplexVariant::Positive
        };
        hp_dimension(&self.ps, degree, weight, variant).map_err(value_err)
    }

    /// Truncated de Rham oracle dimension at the matching slice.
    fn derham_dimension(&self, degree: usize, weight: i64) -> PyResult<usize> {
        derham_slice_dimension(&self.ps, degree, weight).map_err(value_err)
    }

    /// Truncated Harrison total-complex dimension: returns (dim, stable).
    #[pyo3(signature = (degree, weight, trunc=6))]
    fn total_hp(&self, degree: usize, weight: i64, trunc: i64) -> PyResult<(usize, bool)> {
        if degree != 1 && degree != 2 {
            return Err(value_err("total_hp supports degrees 1 and 2"));
        }
        self.with_trunc(trunc, |ps, t| {
            let r = total_hp(ps, t, degree, weight, trunc)
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            Ok((r.dim, r.stable))
        })
    }

    /// Number of first-order deformation classes in the weight-`w` HP² slice.
    #[pyo3(signature = (weight, trunc=6))]
    fn deformation_classes(&self, weight: i64, trunc: i64) -> PyResult<usize> {
        self.with_trunc(trunc, |ps, t| {
            let rep = deform::enumerate_first_order(ps, t, weight, trunc)
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            Ok(rep.dim)
        })
    }

    /// Verifies a deformation given as JSON; returns (pass, detail).
    #[pyo3(signature = (deformation_json, trunc=6))]
    fn verify_deformation(&self, deformation_json: &str, trunc: i64) -> PyResult<(bool, String)> {
        let file: DeformationFile = serde_json::from_str(deformation_json)
            .map_err(|e| value_err(format!("bad deformation: {e}")))?;
        self.with_trunc(trunc, |ps, t| {
            let d = file.to_deformation(ps, t).map_err(value_err)?;
            let report = deform::verify_first_order(ps, t, &d, trunc)
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            let detail = match &report.violation {
                None => format!("{} triples checked", report.triples_checked),
                Some(v) => {
                    let ctx = ps.ctx();
                    let name = |m: &poisson_coh::gradedpoly::Mono| {
                        poisson_coh::Polynomial::monomial(m).to_text(ctx)
                    };
                    format!(
                        "{} fails at ({}, {}, {}) with discrepancy {}",
                        v.identity,
                        name(&v.triple.0),
                        name(&v.triple.1),
                        name(&v.triple.2),
                        v.discrepancy.to_text(ctx)
                    )
                }
            };
            Ok((report.pass, detail))
        })
    }

    /// Whether the musical chain-map residual `musical(δP) − d(musical(P))`
    /// vanishes for the polyvector with a single given component.
    fn chain_map_residual_is_zero(
        &self,
        subset: Vec<usize>,
        coefficient: &str,
    ) -> PyResult<bool> {
        let ctx = self.ps.ctx();
        let c = parse_polynomial(coefficient, ctx).map_err(value_err)?;
        let n = ctx.nvars();
        let deg = subset.len();
        let p = Polyvector::from_components(n, deg, vec![(subset, c)]);
        let r = chain_map_residual(&self.ps, &p).map_err(value_err)?;
        Ok(r.is_zero())
    }

    fn __repr__(&self) -> String {
        format!(
            "Structure({}, vars={:?}, l={})",
            self.desc.display_name(),
            self.ps.ctx().var_names(),
            self.ps.ctx().bracket_weight_l()
        )
    }
}

/// Names of the built-in example structures.
#[pyfunction]
fn examples() -> Vec<String> {
    builtin_names().iter().map(|s| s.to_string()).collect()
}

#[pymodule]
#[pyo3(name = "poisson_coh")]
fn poisson_coh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
