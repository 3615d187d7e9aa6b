//! Command-line front end: structure descriptions, the `hp` and `verify`
//! commands, machine-readable reports and certificates, and the built-in
//! example structures.
//!
//! Reports are byte-deterministic for fixed inputs: all orderings follow
//! the graded-lex conventions and every report embeds the tool version,
//! a structure hash and the truncation parameters.
//!
//! Exit codes: 0 ok, 1 verification counterexample, 2 input error,
//! 3 unstable truncation under `--require-stable`.

use crate::cartan::Polyvector;
use crate::deform::{self, FirstOrderDeformation};
use crate::gradedpoly::{parse_polynomial, Polynomial, QuotientPresentation, WeightedContext};
use crate::harrison::{self, Truncation};
use crate::lp_cohomology::{self, ComplexVariant, PolyvectorBasis};
use crate::poisson::{JacobiReport, PoissonStructure};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

/// Input schema for a Poisson structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureDescription {
    #[serde(default)]
    pub name: Option<String>,
    pub variables: Vec<String>,
    pub weights: Vec<i64>,
    pub l: i64,
    /// `"i,j"` (zero-based, i < j) -> polynomial text for the ∂_i∧∂_j component
    pub bivector: BTreeMap<String, String>,
    #[serde(default)]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl StructureDescription {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("unnamed")
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("serializable");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_structure(&self, defer_jacobi: bool) -> Result<PoissonStructure, String> {
        let ctx = WeightedContext::new(self.variables.clone(), self.weights.clone(), self.l)
            .map_err(|e| e.to_string())?;
        let n = ctx.nvars();
        let mut comps = Vec::new();
        for (key, text) in &self.bivector {
            let (i, j) = parse_pair(key)?;
            if i >= j || j >= n {
                return Err(format!("bivector key `{key}` is not a valid pair i<j"));
            }
            let poly = parse_polynomial(text, &ctx).map_err(|e| e.to_string())?;
            comps.push((vec![i, j], poly));
        }
        let theta = Polyvector::from_components(n, 2, comps);
        let quotient = match &self.relation {
            Some(text) => {
                let rel = parse_polynomial(text, &ctx).map_err(|e| e.to_string())?;
                Some(QuotientPresentation::new(rel, &ctx).map_err(|e| e.to_string())?)
            }
            None => None,
        };
        if defer_jacobi {
            PoissonStructure::new_deferred(ctx, theta, quotient).map_err(|e| e.to_string())
        } else {
            PoissonStructure::new(ctx, theta, quotient).map_err(|e| e.to_string())
        }
    }
}

fn parse_pair(key: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("bivector key `{key}` must be `i,j`"));
    }
    let i = parts[0].trim().parse().map_err(|_| format!("bad index in `{key}`"))?;
    let j = parts[1].trim().parse().map_err(|_| format!("bad index in `{key}`"))?;
    Ok((i, j))
}

/// The four built-in example structures used throughout the test suite.
pub fn builtin(name: &str) -> Option<StructureDescription> {
    let desc = |name: &str, vars: &[&str], w: i64, l: i64, biv: &[(&str, &str)], rel: Option<&str>| {
        StructureDescription {
            name: Some(name.to_string()),
            variables: vars.iter().map(|s| s.to_string()).collect(),
            weights: vec![w; vars.len()],
            l,
            bivector: biv
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            relation: rel.map(|s| s.to_string()),
            notes: None,
        }
    };
    match name {
        "symplectic2" => Some(desc("symplectic2", &["x", "y"], 1, 2, &[("0,1", "1")], None)),
        "symplectic4" => Some(desc(
            "symplectic4",
            &["x1", "x2", "x3", "x4"],
            1,
            2,
            &[("0,1", "1"), ("2,3", "1")],
            None,
        )),
        "sl2star" => Some(desc(
            "sl2star",
            &["e", "f", "h"],
            2,
            2,
            &[("0,1", "h"), ("0,2", "-2*e"), ("1,2", "2*f")],
            None,
        )),
        "a1cone" => Some(desc(
            "a1cone",
            &["e", "f", "h"],
            2,
            2,
            &[("0,1", "h"), ("0,2", "-2*e"), ("1,2", "2*f")],
            Some("h^2 + 4*e*f"),
        )),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["symplectic2", "symplectic4", "sl2star", "a1cone"]
}

// ---------------------------------------------------------------------------
// deformation files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairValue {
    pub a: String,
    pub b: String,
    pub value: String,
}

/// Input schema for a first-order deformation: either a bivector (`ψ`
/// components, smooth workflow) or explicit `φ`/`ψ` values on monomial
/// pairs, or both.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformationFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub psi_bivector: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub phi: Option<Vec<PairValue>>,
    #[serde(default)]
    pub psi: Option<Vec<PairValue>>,
}

impl DeformationFile {
    pub fn to_deformation(
        &self,
        ps: &PoissonStructure,
        trunc: &Truncation,
    ) -> Result<FirstOrderDeformation, String> {
        let ctx = ps.ctx();
        let l = ctx.bracket_weight_l();
        let n = ctx.nvars();
        let mut kappa: Option<i64> = None;
        let mut check_kappa = |k: i64| -> Result<(), String> {
            match kappa {
                None => {
                    kappa = Some(k);
                    Ok(())
                }
                Some(prev) if prev == k => Ok(()),
                Some(prev) => Err(format!(
                    "deformation is not weight-homogeneous: slice {prev} vs {k}"
                )),
            }
        };
        let mut d = FirstOrderDeformation::zero(0);
        if let Some(biv) = &self.psi_bivector {
            let mut comps = Vec::new();
            for (key, text) in biv {
                let (i, j) = parse_pair(key)?;
                if i >= j || j >= n {
                    return Err(format!("psi_bivector key `{key}` is not a valid pair i<j"));
                }
                comps.push((
                    vec![i, j],
                    parse_polynomial(text, ctx).map_err(|e| e.to_string())?,
                ));
            }
            let z = Polyvector::from_components(n, 2, comps);
            let w = z
                .homogeneous_weight(ctx)
                .ok_or("psi_bivector must be weighted-homogeneous")?;
            check_kappa(w + 2 * l)?;
            d = FirstOrderDeformation::from_bivector(ps, trunc, &z).map_err(|e| e.to_string())?;
        }
        for (entries, symmetric) in [(&self.phi, true), (&self.psi, false)] {
            let Some(entries) = entries else { continue };
            for e in entries {
                let a = parse_monomial(ctx, ps, &e.a)?;
                let b = parse_monomial(ctx, ps, &e.b)?;
                let v = ps.nf(&parse_polynomial(&e.value, ctx).map_err(|er| er.to_string())?);
                let wv = v
                    .homogeneous_weight(ctx)
                    .ok_or_else(|| format!("value `{}` is not weight-homogeneous", e.value))?;
                let win = ctx.mono_weight(&a) + ctx.mono_weight(&b);
                if symmetric {
                    check_kappa(wv - win + l)?;
                    let reduced = trunc
                        .bases
                        .reduce_tensor(ps, &[a.clone(), b.clone()])
                        .map_err(|er| er.to_string())?;
                    if reduced.len() != 1 {
                        return Err(format!("pair ({}, {}) is not a basis pair", e.a, e.b));
                    }
                    let (id, c) = reduced[0].clone();
                    let key = vec![(2usize, id)];
                    let mut cur = d.phi.value(&key, n);
                    cur = cur.add(&v.scale(&c));
                    d.phi.set(key, cur);
                } else {
                    check_kappa(wv - win + 2 * l)?;
                    let ia = ch1_basis_id(trunc, &a).ok_or("monomial outside truncation")?;
                    let ib = ch1_basis_id(trunc, &b).ok_or("monomial outside truncation")?;
                    let (key, sign) = harrison::canonicalize(vec![(1, ia), (1, ib)])
                        .ok_or_else(|| format!("psi pair ({}, {}) is degenerate", e.a, e.b))?;
                    let signed = if sign >= 0 { v.clone() } else { v.neg() };
                    let mut cur = d.psi.value(&key, n);
                    cur = cur.add(&signed);
                    d.psi.set(key, cur);
                }
            }
        }
        d.kappa = kappa.ok_or("deformation file defines no nonzero data")?;
        Ok(d)
    }
}

fn parse_monomial(
    ctx: &WeightedContext,
    ps: &PoissonStructure,
    text: &str,
) -> Result<crate::gradedpoly::Mono, String> {
    let p = ps.nf(&parse_polynomial(text, ctx).map_err(|e| e.to_string())?);
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if c == &crate::gradedpoly::rat_int(1) => Ok(m.clone()),
        _ => Err(format!("`{text}` is not a monic normal-form monomial")),
    }
}

fn ch1_basis_id(trunc: &Truncation, m: &crate::gradedpoly::Mono) -> Option<usize> {
    (0..trunc.bases.basis_len(1)).find(|&i| trunc.bases.basis_tensor(1, i)[0] == *m)
}

// ---------------------------------------------------------------------------
// hp command
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lp,
    Harrison,
}

#[derive(Debug, Clone)]
pub struct HpArgs {
    pub method: Method,
    pub degrees: (i64, i64),
    pub weights: Option<(i64, i64)>,
    pub hp: Option<usize>,
    pub trunc: i64,
    pub require_stable: bool,
    pub defer_jacobi: bool,
    pub csv: bool,
}

#[derive(Debug, Serialize)]
pub struct HpRow {
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<&'static str>,
    pub degree: usize,
    pub weight: i64,
    pub cochain_dim: usize,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct HpParams {
    pub method: &'static str,
    pub degrees: String,
    pub weights: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc: Option<i64>,
}

#[derive(Debug, Serialize)]
pub struct HpReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub structure_name: String,
    pub structure_hash: String,
    pub params: HpParams,
    pub rows: Vec<HpRow>,
}

pub fn cmd_hp(desc: &StructureDescription, args: &HpArgs) -> Result<(i32, String), String> {
    let ps = desc.to_structure(args.defer_jacobi)?;
    let l = ps.ctx().bracket_weight_l();
    let mut rows = Vec::new();
    let mut unstable = false;
    match args.method {
        Method::Lp => {
            let weights = args.weights.unwrap_or((0, 2 * l));
            for degree in args.degrees.0.max(0)..=args.degrees.1 {
                let degree = degree as usize;
                for weight in weights.0..=weights.1 {
                    let cochain_dim = PolyvectorBasis::build(&ps, degree, weight).len();
                    let extended =
                        lp_cohomology::hp_dimension(&ps, degree, weight, ComplexVariant::Extended)
                            .map_err(|e| e.to_string())?;
                    rows.push(HpRow {
                        method: "lp",
                        variant: Some("extended"),
                        degree,
                        weight,
                        cochain_dim,
                        dim: extended,
                        stable: None,
                    });
                    if degree >= 1 {
                        let positive = lp_cohomology::hp_dimension(
                            &ps,
                            degree,
                            weight,
                            ComplexVariant::Positive,
                        )
                        .map_err(|e| e.to_string())?;
                        rows.push(HpRow {
                            method: "lp",
                            variant: Some("positive"),
                            degree,
                            weight,
                            cochain_dim,
                            dim: positive,
                            stable: None,
                        });
                    }
                }
            }
        }
        Method::Harrison => {
            let hp = args.hp.ok_or("--method harrison requires --hp N (1 or 2)")?;
            if hp != 1 && hp != 2 {
                return Err("--hp must be 1 or 2".to_string());
            }
            let weights = args.weights.unwrap_or((-3 * l, l));
            let trunc = Truncation::new(&ps, args.trunc);
            for weight in weights.0..=weights.1 {
                let r = harrison::total_hp(&ps, &trunc, hp, weight, args.trunc)
                    .map_err(|e| e.to_string())?;
                if !r.stable {
                    unstable = true;
                }
                rows.push(HpRow {
                    method: "harrison",
                    variant: None,
                    degree: hp,
                    weight,
                    cochain_dim: r.cochain_dim,
                    dim: r.dim,
                    stable: Some(r.stable),
                });
            }
        }
    }
    let report = HpReport {
        tool: "poisson-coh",
        version: env!("CARGO_PKG_VERSION"),
        structure_name: desc.display_name().to_string(),
        structure_hash: desc.hash(),
        params: HpParams {
            method: match args.method {
                Method::Lp => "lp",
                Method::Harrison => "harrison",
            },
            degrees: format!("{}..{}", args.degrees.0, args.degrees.1),
            weights: match (args.weights, args.method) {
                (Some((a, b)), _) => format!("{a}..{b}"),
                (None, Method::Lp) => format!("0..{}", 2 * l),
                (None, Method::Harrison) => format!("{}..{}", -3 * l, l),
            },
            hp: args.hp,
            trunc: match args.method {
                Method::Harrison => Some(args.trunc),
                Method::Lp => None,
            },
        },
        rows,
    };
    let out = if args.csv {
        hp_csv(&report)
    } else {
        serde_json::to_string_pretty(&report).expect("serializable") + "\n"
    };
    let code = if unstable && args.require_stable {
        EXIT_UNSTABLE
    } else {
        EXIT_OK
    };
    Ok((code, out))
}

fn hp_csv(report: &HpReport) -> String {
    let mut s = String::from("method,variant,degree,weight,cochain_dim,dim,stable\n");
    for r in &report.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.variant.unwrap_or(""),
            r.degree,
            r.weight,
            r.cochain_dim,
            r.dim,
            r.stable.map(|b| b.to_string()).unwrap_or_default()
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// verify command
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub trunc: i64,
    pub deformation: Option<DeformationFile>,
}

#[derive(Debug, Serialize)]
pub struct JacobiCert {
    pub pass: bool,
    pub coordinate_triples_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<JacobiCounterexample>,
}

#[derive(Debug, Serialize)]
pub struct JacobiCounterexample {
    pub triple: Vec<String>,
    pub jacobiator: String,
}

#[derive(Debug, Serialize)]
pub struct WeightCert {
    pub homogeneous: bool,
    pub declared_l: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inferred_l: Option<i64>,
    pub pairs: Vec<PairCert>,
}

#[derive(Debug, Serialize)]
pub struct PairCert {
    pub pair: Vec<String>,
    pub bracket: String,
    pub homogeneous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inferred_l: Option<i64>,
}

#[derive(Debug, Serialize)]
pub struct DeformationCert {
    pub pass: bool,
    pub triples_checked: usize,
    pub trunc: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationCert>,
}

#[derive(Debug, Serialize)]
pub struct ViolationCert {
    pub identity: String,
    pub triple: Vec<String>,
    pub discrepancy: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReportDoc {
    pub tool: &'static str,
    pub version: &'static str,
    pub structure_name: String,
    pub structure_hash: String,
    pub pass: bool,
    pub jacobi: JacobiCert,
    pub weight_audit: WeightCert,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotient_compatible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationCert>,
}

pub fn cmd_verify(desc: &StructureDescription, args: &VerifyArgs) -> Result<(i32, String), String> {
    let ps = desc.to_structure(true)?;
    let ctx = ps.ctx().clone();
    let jacobi = match ps.jacobi_check() {
        JacobiReport::Pass { triples_checked } => JacobiCert {
            pass: true,
            coordinate_triples_checked: triples_checked,
            counterexample: None,
        },
        JacobiReport::Counterexample { triple, jacobiator } => JacobiCert {
            pass: false,
            coordinate_triples_checked: 0,
            counterexample: Some(JacobiCounterexample {
                triple: vec![
                    ctx.var_name(triple.0).to_string(),
                    ctx.var_name(triple.1).to_string(),
                    ctx.var_name(triple.2).to_string(),
                ],
                jacobiator: jacobiator.to_text(&ctx),
            }),
        },
    };
    let audit = ps.weight_audit();
    let weight_audit = WeightCert {
        homogeneous: audit.homogeneous,
        declared_l: audit.declared_l,
        inferred_l: audit.inferred_l,
        pairs: audit
            .pairs
            .iter()
            .map(|p| PairCert {
                pair: vec![
                    ctx.var_name(p.i).to_string(),
                    ctx.var_name(p.j).to_string(),
                ],
                bracket: p.bracket.to_text(&ctx),
                homogeneous: p.homogeneous,
                inferred_l: p.inferred_l,
            })
            .collect(),
    };
    let quotient_compatible = ps
        .quotient()
        .map(|_| ps.check_ideal_preserved().is_ok());
    let mut pass = jacobi.pass && quotient_compatible.unwrap_or(true);
    let deformation = match &args.deformation {
        Some(file) if jacobi.pass => {
            let trunc = Truncation::new(&ps, args.trunc);
            let d = file.to_deformation(&ps, &trunc)?;
            let report =
                deform::verify_first_order(&ps, &trunc, &d, args.trunc).map_err(|e| e.to_string())?;
            if !report.pass {
                pass = false;
            }
            Some(DeformationCert {
                pass: report.pass,
                triples_checked: report.triples_checked,
                trunc: args.trunc,
                violation: report.violation.map(|v| ViolationCert {
                    identity: v.identity.to_string(),
                    triple: vec![
                        Polynomial::monomial(&v.triple.0).to_text(&ctx),
                        Polynomial::monomial(&v.triple.1).to_text(&ctx),
                        Polynomial::monomial(&v.triple.2).to_text(&ctx),
                    ],
                    discrepancy: v.discrepancy.to_text(&ctx),
                }),
            })
        }
        _ => None,
    };
    let doc = VerifyReportDoc {
        tool: "poisson-coh",
        version: env!("CARGO_PKG_VERSION"),
        structure_name: desc.display_name().to_string(),
        structure_hash: desc.hash(),
        pass,
        jacobi,
        weight_audit,
        quotient_compatible,
        deformation,
    };
    let out = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    let code = if pass { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    Ok((code, out))
}

// ---------------------------------------------------------------------------
// argument plumbing shared with the binary
// ---------------------------------------------------------------------------

/// Parses an inclusive `A..B` range.
pub fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let parts: Vec<&str> = text.split("..").collect();
    if parts.len() != 2 {
        return Err(format!("range `{text}` must look like A..B"));
    }
    let a: i64 = parts[0].parse().map_err(|_| format!("bad range start `{}`", parts[0]))?;
    let b: i64 = parts[1].parse().map_err(|_| format!("bad range end `{}`", parts[1]))?;
    if a > b {
        return Err(format!("empty range `{text}`"));
    }
    Ok((a, b))
}

pub fn load_structure(
    example: Option<&str>,
    file: Option<&str>,
) -> Result<StructureDescription, String> {
    match (example, file) {
        (Some(name), None) => builtin(name).ok_or_else(|| {
            format!(
                "unknown example `{name}`; available: {}",
                builtin_names().join(", ")
            )
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read `{path}`: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("bad structure file `{path}`: {e}"))
        }
        _ => Err("exactly one of --example and --structure is required".to_string()),
    }
}

pub fn load_deformation(path: &str) -> Result<DeformationFile, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("bad deformation file `{path}`: {e}"))
}

/// Wraps an input error as a diagnostics document (exit code 2).
pub fn input_error(msg: &str) -> (i32, String) {
    let doc = serde_json::json!({
        "tool": "poisson-coh",
        "version": env!("CARGO_PKG_VERSION"),
        "error": msg,
    });
    (
        EXIT_INPUT,
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
    )
}
