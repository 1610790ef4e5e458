//! Benchmark oscillators with known cycle structure, used for regression
//! and cross-validation of the whole pipeline.
//!
//! Each entry bundles a canonical LLS form, where available the planar
//! kinetic system it comes from (with its closed-form fixed point), and a
//! record of the expected outcome: cycle count, radii where known in
//! closed form, stabilities, and the degree pair that feeds the parity
//! bound.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::averaging::wallis;
use crate::cycles::{OriginNature, Stability};
use crate::error::{Error, Result};
use crate::poly::{rat, rat_int, BiPoly, Rat, UniPoly};
use crate::reduction::{
    build_reduction_map, reduce_to_lls, FixedPointInfo, KineticSystem, LLSSystem, LlsClass,
    ReductionMap,
};

/// Expected analysis outcome, tagged with how the values are known.
#[derive(Debug, Clone)]
pub struct Expected {
    /// Number of limit cycles, when known.
    pub cycles: Option<usize>,
    /// Averaged radii in increasing order, when known in closed form.
    pub radii: Vec<f64>,
    /// Stabilities matching `radii` (innermost first).
    pub stabilities: Vec<Stability>,
    /// Degree pair `(N, M)` of the canonical LLS form.
    pub parity: (u32, u32),
    pub class: LlsClass,
    pub origin: Option<OriginNature>,
    /// `"literature"` for values quoted from the source models,
    /// `"derived"` for closed forms reproducible by hand,
    /// `"constructed"` when the model was built to have these radii.
    pub provenance: &'static str,
    pub notes: Vec<String>,
}

/// The kinetic realization of a model plus its closed-form fixed point.
#[derive(Debug, Clone)]
pub struct KineticPart {
    pub sys: KineticSystem,
    pub fixed_point: (Rat, Rat),
}

impl KineticPart {
    /// Run the standard reduction at the stored fixed point.
    pub fn reduce(&self) -> Result<(FixedPointInfo, ReductionMap, LLSSystem)> {
        let fp = FixedPointInfo::from_exact(
            &self.sys,
            self.fixed_point.0.clone(),
            self.fixed_point.1.clone(),
        )?;
        let map = build_reduction_map(&self.sys, &fp)?;
        let lls = reduce_to_lls(&self.sys, &fp, &map)?;
        Ok((fp, map, lls))
    }
}

#[derive(Debug, Clone)]
pub struct ModelEntry {
    pub name: String,
    /// Resolved parameter values in declaration order.
    pub params: Vec<(String, Rat)>,
    /// Canonical second-order form.
    pub lls: LLSSystem,
    pub kinetic: Option<KineticPart>,
    /// Whether reducing `kinetic` must reproduce `lls` coefficient for
    /// coefficient (false for models whose kinetic form is a different
    /// planar realization).
    pub reduction_matches_lls: bool,
    pub expected: Expected,
}

pub fn model_names() -> Vec<&'static str> {
    vec![
        "van_der_pol",
        "glycolytic",
        "modified_brusselator",
        "rychkov",
        "kaiser",
        "gaiko",
        "blows_lloyd",
        "lotka_volterra",
    ]
}

/// All models with their default parameters.
pub fn zoo() -> Vec<ModelEntry> {
    model_names()
        .into_iter()
        .map(|name| build(name, &BTreeMap::new()).expect("default build"))
        .collect()
}

/// Build a model by name, overriding defaults with `overrides`.
pub fn build(name: &str, overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    match name {
        "van_der_pol" => van_der_pol(overrides),
        "glycolytic" => glycolytic(overrides),
        "modified_brusselator" => modified_brusselator(overrides),
        "rychkov" => rychkov(overrides),
        "kaiser" => kaiser(overrides),
        "gaiko" => gaiko(overrides),
        "blows_lloyd" => blows_lloyd(overrides),
        "lotka_volterra" => lotka_volterra(overrides),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Resolve parameters against a declared list of `(name, default)`.
fn resolve_params(
    declared: &[(&str, Rat)],
    overrides: &BTreeMap<String, Rat>,
) -> Result<Vec<(String, Rat)>> {
    for key in overrides.keys() {
        if !declared.iter().any(|(n, _)| n == key) {
            return Err(Error::InvalidInput(format!(
                "unknown parameter '{key}' (expected one of: {})",
                declared
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
    }
    Ok(declared
        .iter()
        .map(|(n, d)| {
            (
                n.to_string(),
                overrides.get(*n).cloned().unwrap_or_else(|| d.clone()),
            )
        })
        .collect())
}

fn require_positive(name: &str, v: &Rat) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: name.to_string(),
            constraint: format!("{name} > 0"),
        })
    }
}

fn require_nonnegative(name: &str, v: &Rat) -> Result<()> {
    if v.is_negative() {
        Err(Error::ParameterOutOfRange {
            name: name.to_string(),
            constraint: format!("{name} >= 0"),
        })
    } else {
        Ok(())
    }
}

fn small_positive_int(name: &str, v: &Rat, max: i64) -> Result<u32> {
    use num_traits::ToPrimitive;
    if v.denom().is_one() {
        if let Some(k) = v.numer().to_i64() {
            if k >= 1 && k <= max {
                return Ok(k as u32);
            }
        }
    }
    Err(Error::ParameterOutOfRange {
        name: name.to_string(),
        constraint: format!("{name} must be an integer in 1..={max}"),
    })
}

/// First-order planar realization of a second-order equation:
/// `ẋ = y`, `ẏ = Σ A_nm x^n y^m`, fixed point at the origin. The
/// nonlinearity sits entirely in the second equation (`f ≡ 0`).
fn first_order_kinetic(lls: &LLSSystem) -> Result<KineticPart> {
    let mut g = BiPoly::zero();
    let mut b1 = Rat::zero();
    let mut b2 = Rat::zero();
    for ((n, m), c) in lls.a_table() {
        match (n, m) {
            (1, 0) => b1 = c.clone(),
            (0, 1) => b2 = c.clone(),
            _ => g = g.add(&BiPoly::monomial(*n, *m, c.clone())),
        }
    }
    let sys = KineticSystem::with_g(
        [Rat::zero(), Rat::zero(), Rat::one()],
        [Rat::zero(), b1, b2],
        BiPoly::zero(),
        g,
    )?;
    Ok(KineticPart {
        sys,
        fixed_point: (Rat::zero(), Rat::zero()),
    })
}

/// Coefficients `c_0..c_k` of `Π_{j=1..k} (j² − ρ)` in powers of `ρ`.
fn target_radii_poly(k: u32) -> Vec<Rat> {
    let mut coeffs = vec![Rat::one()];
    for j in 1..=k as i64 {
        let mut next = vec![Rat::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c * rat_int(j * j);
            next[i + 1] -= c;
        }
        coeffs = next;
    }
    coeffs
}

fn van_der_pol(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(&[("eps", rat(1, 10))], overrides)?;
    let eps = params[0].1.clone();
    require_positive("eps", &eps)?;
    // F = eps (xi^2 - 1), G = xi
    let f = BiPoly::from_terms(vec![((2, 0), eps.clone()), ((0, 0), -eps.clone())]);
    let g = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let kinetic = first_order_kinetic(&lls)?;
    Ok(ModelEntry {
        name: "van_der_pol".into(),
        params,
        kinetic: Some(kinetic),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: Some(1),
            radii: vec![2.0],
            stabilities: vec![Stability::Stable],
            parity: (2, 1),
            class: LlsClass::Lienard,
            origin: Some(OriginNature::UnstableFocus),
            provenance: "derived",
            notes: vec!["averaged radius 2 independent of eps".into()],
        },
        lls,
    })
}

fn glycolytic(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(&[("a", rat(1, 10)), ("b", rat(1, 2))], overrides)?;
    let (a, b) = (params[0].1.clone(), params[1].1.clone());
    require_positive("a", &a)?;
    require_positive("b", &b)?;
    // xdot = -x + a y + x^2 y, ydot = b - a y - x^2 y
    let sys = KineticSystem::new(
        [Rat::zero(), -Rat::one(), a.clone()],
        [b.clone(), Rat::zero(), -a.clone()],
        BiPoly::monomial(2, 1, Rat::one()),
        -Rat::one(),
    )?;
    let denom = &a + &b * &b;
    let fixed_point = (b.clone(), &b / &denom);
    // canonical damping/restoring with k = b + b/(a + b^2)
    let k = &b + &b / &denom;
    let f = BiPoly::from_terms(vec![
        ((0, 0), Rat::one() + &a + rat_int(3) * &b * &b - rat_int(2) * &b * &k),
        ((1, 0), rat_int(-2) * &b),
        ((0, 1), &k - rat_int(3) * &b),
        ((1, 1), Rat::one()),
        ((0, 2), Rat::one()),
    ]);
    let g = UniPoly::from_coeffs(vec![Rat::zero(), denom.clone()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let f00 = lls.f00();
    let mut notes = Vec::new();
    let origin = if f00.is_negative() {
        OriginNature::UnstableFocus
    } else {
        notes.push("F(0,0) >= 0 at these parameters: no stable cycle expected".into());
        OriginNature::StableFocus
    };
    Ok(ModelEntry {
        name: "glycolytic".into(),
        params,
        kinetic: Some(KineticPart { sys, fixed_point }),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: Some(if f00.is_negative() { 1 } else { 0 }),
            radii: vec![],
            stabilities: vec![Stability::Stable],
            parity: (1, 3),
            class: LlsClass::GeneralLls,
            origin: Some(origin),
            provenance: "literature",
            notes,
        },
        lls,
    })
}

fn modified_brusselator(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(
        &[("a1", rat_int(1)), ("b", rat(11, 5)), ("alpha", rat_int(1))],
        overrides,
    )?;
    let (a1, b, alpha) = (
        params[0].1.clone(),
        params[1].1.clone(),
        params[2].1.clone(),
    );
    require_positive("a1", &a1)?;
    require_positive("b", &b)?;
    require_positive("alpha", &alpha)?;
    // xdot = a1 - (b + alpha) x + x^2 y, ydot = b x - x^2 y
    let sys = KineticSystem::new(
        [a1.clone(), -(&b + &alpha), Rat::zero()],
        [Rat::zero(), b.clone(), Rat::zero()],
        BiPoly::monomial(2, 1, Rat::one()),
        -Rat::one(),
    )?;
    let fixed_point = (&a1 / &alpha, &b * &alpha / &a1);
    // canonical damping/restoring printed for this model
    let a1_sq = &a1 * &a1;
    let al_sq = &alpha * &alpha;
    let f = BiPoly::from_terms(vec![
        ((0, 0), &a1_sq / &al_sq - &b + &alpha),
        ((1, 0), rat_int(-2) * &a1 / &alpha),
        ((0, 1), &b / &a1 - rat_int(2) * &a1 / &al_sq),
        ((1, 1), Rat::one() / &alpha),
        ((0, 2), Rat::one() / &al_sq),
    ]);
    let g = UniPoly::from_coeffs(vec![Rat::zero(), &a1_sq / &alpha]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let f00 = lls.f00();
    let mut notes = Vec::new();
    let origin = if f00.is_negative() {
        OriginNature::UnstableFocus
    } else {
        notes.push("F(0,0) >= 0 at these parameters: no stable cycle expected".into());
        OriginNature::StableFocus
    };
    Ok(ModelEntry {
        name: "modified_brusselator".into(),
        params,
        kinetic: Some(KineticPart { sys, fixed_point }),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: Some(if f00.is_negative() { 1 } else { 0 }),
            radii: vec![],
            stabilities: vec![Stability::Stable],
            parity: (1, 3),
            class: LlsClass::GeneralLls,
            origin: Some(origin),
            provenance: "literature",
            notes,
        },
        lls,
    })
}

fn rychkov(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(
        &[("a1", rat(4, 5)), ("a3", rat(-4, 3)), ("a5", rat(8, 25))],
        overrides,
    )?;
    let (a1, a3, a5) = (
        params[0].1.clone(),
        params[1].1.clone(),
        params[2].1.clone(),
    );
    // damping is d/dx of a1 x + a3 x^3 + a5 x^5
    let f = BiPoly::from_terms(vec![
        ((0, 0), a1.clone()),
        ((2, 0), rat_int(3) * &a3),
        ((4, 0), rat_int(5) * &a5),
    ]);
    let g = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let kinetic = first_order_kinetic(&lls)?;
    let default = overrides.is_empty();
    Ok(ModelEntry {
        name: "rychkov".into(),
        params,
        kinetic: Some(kinetic),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: default.then_some(2),
            radii: if default { vec![1.0, 2.0] } else { vec![] },
            stabilities: vec![Stability::Unstable, Stability::Stable],
            parity: (4, 1),
            class: LlsClass::Lienard,
            origin: Some(OriginNature::StableFocus),
            provenance: "literature",
            notes: vec!["at most two cycles for a degree-5 odd damping primitive".into()],
        },
        lls,
    })
}

fn kaiser(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(
        &[
            ("alpha", rat(18, 125)),
            ("beta", rat(1, 200)),
            ("mu", rat(1, 100)),
        ],
        overrides,
    )?;
    let (alpha, beta, mu) = (
        params[0].1.clone(),
        params[1].1.clone(),
        params[2].1.clone(),
    );
    require_positive("alpha", &alpha)?;
    require_nonnegative("beta", &beta)?;
    require_positive("mu", &mu)?;
    // -mu (1 - xi^2 + alpha xi^4 - beta xi^6) xi_dot damping
    let f = BiPoly::from_terms(vec![
        ((0, 0), -mu.clone()),
        ((2, 0), mu.clone()),
        ((4, 0), -(&mu * &alpha)),
        ((6, 0), &mu * &beta),
    ]);
    let g = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let kinetic = first_order_kinetic(&lls)?;
    let parity = (lls.n_max(), lls.m_max());
    let default = overrides.is_empty() || overrides.keys().all(|k| k == "mu");
    Ok(ModelEntry {
        name: "kaiser".into(),
        params,
        kinetic: Some(kinetic),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: default.then_some(3),
            radii: vec![],
            stabilities: vec![Stability::Stable, Stability::Unstable, Stability::Stable],
            parity,
            class: LlsClass::Lienard,
            origin: Some(OriginNature::UnstableFocus),
            provenance: "literature",
            notes: vec![
                "defaults sit in the birhythmic zone: two stable cycles split by an unstable one"
                    .into(),
            ],
        },
        lls,
    })
}

fn gaiko(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let k = small_positive_int("k", overrides.get("k").unwrap_or(&rat_int(2)), 8)?;
    // velocity-only damping -(mu1 + mu2 v + ... + mu_{2k+1} v^{2k}) v;
    // defaults put the averaged radii at 1..k exactly
    let target = target_radii_poly(k);
    let scale = Rat::one() / (rat_int(2) * &target[0]);
    let mut mus: Vec<Rat> = vec![Rat::zero(); 2 * k as usize + 1];
    for (i, c) in target.iter().enumerate() {
        mus[2 * i] = &scale * c / wallis(0, i as u32 + 1);
    }
    let mut declared: Vec<(&str, Rat)> = vec![("k", rat_int(k as i64))];
    let names: Vec<String> = (1..=2 * k as usize + 1).map(|j| format!("mu{j}")).collect();
    for (j, name) in names.iter().enumerate() {
        declared.push((name.as_str(), mus[j].clone()));
    }
    let params = resolve_params(&declared, overrides)?;
    let mus: Vec<Rat> = params[1..].iter().map(|(_, v)| v.clone()).collect();

    let mut f = BiPoly::zero();
    for (j, mu_j) in mus.iter().enumerate() {
        f = f.add(&BiPoly::monomial(0, j as u32, -mu_j.clone()));
    }
    let g = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let kinetic = first_order_kinetic(&lls)?;

    let mut notes = vec![format!("bound of {k} cycles is attained iff mu1 > 0")];
    let mu1_positive = mus[0].is_positive();
    if !mu1_positive {
        notes.push("mu1 <= 0 here: the k-cycle bound is not attainable".into());
    }
    let default = overrides.keys().all(|p| p == "k");
    Ok(ModelEntry {
        name: "gaiko".into(),
        params,
        kinetic: Some(kinetic),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: default.then_some(k as usize),
            radii: if default {
                (1..=k).map(f64::from).collect()
            } else {
                vec![]
            },
            stabilities: (0..k)
                .map(|i| {
                    if i % 2 == 0 {
                        Stability::Stable
                    } else {
                        Stability::Unstable
                    }
                })
                .collect(),
            parity: (1, 2 * k + 1),
            class: LlsClass::Rayleigh,
            origin: Some(if mu1_positive {
                OriginNature::UnstableFocus
            } else {
                OriginNature::StableFocus
            }),
            provenance: "constructed",
            notes,
        },
        lls,
    })
}

fn blows_lloyd(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let k = small_positive_int("k", overrides.get("k").unwrap_or(&rat_int(3)), 8)?;
    let declared = [("k", rat_int(k as i64)), ("eps", rat(1, 100))];
    let params = resolve_params(&declared, overrides)?;
    let eps = params[1].1.clone();
    require_positive("eps", &eps)?;
    // position-only damping built so the averaged radii are 1..k exactly;
    // at k = 3 this is the classic -eps(72 - 392 x^2 + 224 x^4 - 128/5 x^6)
    let target = target_radii_poly(k);
    let scale = Rat::one() / (rat_int(2) * &target[0]);
    let mut f = BiPoly::zero();
    let sigma = &eps / &scale; // makes F(0,0) = -sigma = -2 eps prod j^2
    for (i, c) in target.iter().enumerate() {
        let a_coeff = &sigma * &scale * c / wallis(i as u32, 1);
        f = f.add(&BiPoly::monomial(2 * i as u32, 0, -a_coeff));
    }
    let g = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
    let lls = LLSSystem::from_damping_restoring(&f, &g)?;
    let kinetic = first_order_kinetic(&lls)?;
    Ok(ModelEntry {
        name: "blows_lloyd".into(),
        params,
        kinetic: Some(kinetic),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: Some(k as usize),
            radii: (1..=k).map(f64::from).collect(),
            stabilities: (0..k)
                .map(|i| {
                    if i % 2 == 0 {
                        Stability::Stable
                    } else {
                        Stability::Unstable
                    }
                })
                .collect(),
            parity: (2 * k, 1),
            class: LlsClass::Lienard,
            origin: Some(OriginNature::UnstableFocus),
            provenance: "constructed",
            notes: vec![format!("circles of radii 1..{k} in the small-eps limit")],
        },
        lls,
    })
}

fn lotka_volterra(overrides: &BTreeMap<String, Rat>) -> Result<ModelEntry> {
    let params = resolve_params(
        &[
            ("alpha", rat_int(2)),
            ("beta", rat_int(1)),
            ("delta", rat_int(1)),
            ("gamma", rat_int(1)),
        ],
        overrides,
    )?;
    let (alpha, beta, delta, gamma) = (
        params[0].1.clone(),
        params[1].1.clone(),
        params[2].1.clone(),
        params[3].1.clone(),
    );
    for (n, v) in [
        ("alpha", &alpha),
        ("beta", &beta),
        ("delta", &delta),
        ("gamma", &gamma),
    ] {
        require_positive(n, v)?;
    }
    // xdot = alpha x - beta x y, ydot = delta x y - gamma y
    let sys = KineticSystem::with_g(
        [Rat::zero(), alpha.clone(), Rat::zero()],
        [Rat::zero(), Rat::zero(), -gamma.clone()],
        BiPoly::monomial(1, 1, -beta.clone()),
        BiPoly::monomial(1, 1, delta.clone()),
    )?;
    let fixed_point = (&gamma / &delta, &alpha / &beta);
    // the canonical form is the exact reduction at the interior point (the
    // origin is a saddle and is skipped); with beta = delta = 1 it reads
    // F = (alpha-gamma)/(alpha+gamma) xi - xi_dot/(alpha+gamma),
    // G = alpha gamma xi + alpha gamma/(alpha+gamma) xi^2
    let part = KineticPart {
        sys,
        fixed_point,
    };
    let (_, _, lls) = part.reduce()?;
    Ok(ModelEntry {
        name: "lotka_volterra".into(),
        params,
        kinetic: Some(part),
        reduction_matches_lls: true,
        expected: Expected {
            cycles: Some(0),
            radii: vec![],
            stabilities: vec![],
            parity: (2, 2),
            class: LlsClass::GeneralLls,
            origin: Some(OriginNature::CenterType),
            provenance: "derived",
            notes: vec![
                "conservative: closed orbit family, no isolated cycles".into(),
                "the origin is a saddle and is skipped by the reduction".into(),
            ],
        },
        lls,
    })
}
