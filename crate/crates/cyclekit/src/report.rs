//! File formats: JSON system descriptions (input) and analysis reports
//! (output).
//!
//! Exact rationals are serialized as `"p/q"` strings so they survive
//! round-trips; every numeric leaf in a report carries a provenance tag
//! (`"exact"`, `"float"`, or `"simulated"`). A report embeds the reduced
//! system as a self-contained `{"kind": "lls", ...}` object, so a report
//! file is itself accepted wherever a system file is.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::averaging::{AveragedDynamics, RescaledOscillator};
use crate::cycles::CycleReport;
use crate::error::{Error, Result};
use crate::odeverify::{Detection, KbComparison};
use crate::poly::{parse_rat, rat_from_f64, rat_str, rat_to_f64, BiPoly, CoeffKind, Rat};
use crate::reduction::{ClassReport, FixedPointInfo, KineticSystem, LLSSystem, ReductionMap};

/// A coefficient in an input file: `"p/q"` / decimal string (exact) or a
/// JSON number (converted to its exact dyadic value, tagged as float
/// unless integral).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffIn {
    Str(String),
    Num(f64),
}

impl CoeffIn {
    pub fn to_rat(&self) -> Result<(Rat, CoeffKind)> {
        match self {
            CoeffIn::Str(s) => Ok((parse_rat(s)?, CoeffKind::Exact)),
            CoeffIn::Num(v) => {
                let r = rat_from_f64(*v)
                    .ok_or_else(|| Error::InvalidInput(format!("non-finite number {v}")))?;
                let kind = if v.fract() == 0.0 {
                    CoeffKind::Exact
                } else {
                    CoeffKind::Float
                };
                Ok((r, kind))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermIn {
    pub i: u32,
    pub j: u32,
    pub c: CoeffIn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyIn {
    pub terms: Vec<TermIn>,
}

impl PolyIn {
    fn to_bipoly(&self) -> Result<BiPoly> {
        let mut kind = CoeffKind::Exact;
        let mut terms = Vec::new();
        for t in &self.terms {
            let (c, k) = t.c.to_rat()?;
            kind = kind.combine(k);
            terms.push(((t.i, t.j), c));
        }
        Ok(BiPoly::from_terms(terms).with_kind(kind))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ATermIn {
    pub n: u32,
    pub m: u32,
    pub c: CoeffIn,
}

/// A system description file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SystemFile {
    #[serde(rename = "kinetic")]
    Kinetic {
        a: [CoeffIn; 3],
        b: [CoeffIn; 3],
        #[serde(skip_serializing_if = "Option::is_none")]
        mu: Option<CoeffIn>,
        f: PolyIn,
        /// Explicit nonlinear part of the second equation; defaults to
        /// `mu * f`.
        #[serde(skip_serializing_if = "Option::is_none")]
        g: Option<PolyIn>,
        /// Accept constant/linear terms inside `f` instead of rejecting.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        allow_affine_f: bool,
    },
    #[serde(rename = "lls")]
    Lls {
        #[serde(rename = "A")]
        a: Vec<ATermIn>,
    },
}

/// A parsed input system.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum LoadedSystem {
    Kinetic(KineticSystem),
    Lls(LLSSystem),
}

impl SystemFile {
    pub fn load(&self) -> Result<LoadedSystem> {
        match self {
            SystemFile::Kinetic {
                a,
                b,
                mu,
                f,
                g,
                allow_affine_f,
            } => {
                let mut kind = CoeffKind::Exact;
                let mut conv3 = |arr: &[CoeffIn; 3]| -> Result<[Rat; 3]> {
                    let mut out = [Rat::default(), Rat::default(), Rat::default()];
                    for (slot, c) in out.iter_mut().zip(arr.iter()) {
                        let (r, k) = c.to_rat()?;
                        kind = kind.combine(k);
                        *slot = r;
                    }
                    Ok(out)
                };
                let a = conv3(a)?;
                let b = conv3(b)?;
                let f = f.to_bipoly()?;
                let fk = f.kind().combine(kind);
                let f = f.with_kind(fk);
                let sys = match (g, mu) {
                    (Some(g), _) => KineticSystem::with_g(a, b, f, g.to_bipoly()?),
                    (None, Some(mu)) => {
                        let (mu, _) = mu.to_rat()?;
                        if *allow_affine_f {
                            Ok(KineticSystem::new_with_affine_f(a, b, f, mu))
                        } else {
                            KineticSystem::new(a, b, f, mu)
                        }
                    }
                    (None, None) => Err(Error::InvalidInput(
                        "kinetic system needs 'mu' (with g = mu*f) or an explicit 'g'".into(),
                    )),
                }?;
                Ok(LoadedSystem::Kinetic(sys))
            }
            SystemFile::Lls { a } => {
                let mut kind = CoeffKind::Exact;
                let mut table = BTreeMap::new();
                for t in a {
                    let (c, k) = t.c.to_rat()?;
                    kind = kind.combine(k);
                    table.insert((t.n, t.m), c);
                }
                Ok(LoadedSystem::Lls(LLSSystem::from_a_table(
                    table, kind, None,
                )?))
            }
        }
    }

    /// Serialize an LLS system as a system file.
    pub fn from_lls(lls: &LLSSystem) -> SystemFile {
        SystemFile::Lls {
            a: lls
                .a_table()
                .iter()
                .map(|((n, m), c)| ATermIn {
                    n: *n,
                    m: *m,
                    c: CoeffIn::Str(rat_str(c)),
                })
                .collect(),
        }
    }
}

/// Parse a system (or a previously written report, whose embedded `lls`
/// block is then used) from JSON text.
pub fn parse_system_json(text: &str) -> Result<SystemFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!(
            "malformed JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let candidate = if value.get("kind").is_some() {
        value
    } else if let Some(embedded) = value.get("lls") {
        embedded.clone()
    } else {
        return Err(Error::InvalidInput(
            "expected a {\"kind\": ...} system file or a report with an embedded 'lls' block"
                .into(),
        ));
    };
    serde_json::from_value(candidate)
        .map_err(|e| Error::InvalidInput(format!("system file does not match the schema: {e}")))
}

/// A numeric report leaf: either an exact `"p/q"` string or a float, plus
/// where it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Num {
    pub value: serde_json::Value,
    pub provenance: String,
}

impl Num {
    pub fn rat(r: &Rat, kind: CoeffKind) -> Num {
        Num {
            value: serde_json::Value::String(rat_str(r)),
            provenance: kind.provenance().to_string(),
        }
    }

    pub fn float(v: f64) -> Num {
        Num {
            value: serde_json::json!(v),
            provenance: "float".to_string(),
        }
    }

    pub fn simulated(v: f64) -> Num {
        Num {
            value: serde_json::json!(v),
            provenance: "simulated".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionSection {
    pub fixed_point: [Num; 2],
    pub beta: Vec<Num>,
    pub alpha: Vec<Num>,
    /// `c1, c2, cL, c3, c4, cK` of the inverse transform.
    pub inverse: Vec<Num>,
    pub det: Num,
    pub eigenvalues: Vec<[Num; 2]>,
    pub scale_note: String,
}

pub fn reduction_section(fp: &FixedPointInfo, map: &ReductionMap) -> ReductionSection {
    let k = map.kind;
    let eig = |c: num_complex::Complex64| [Num::float(c.re), Num::float(c.im)];
    ReductionSection {
        fixed_point: [Num::float(fp.x), Num::float(fp.y)],
        beta: map.beta.iter().map(|r| Num::rat(r, k)).collect(),
        alpha: map.alpha.iter().map(|r| Num::rat(r, k)).collect(),
        inverse: [&map.c1, &map.c2, &map.cl, &map.c3, &map.c4, &map.ck]
            .iter()
            .map(|r| Num::rat(r, k))
            .collect(),
        det: Num::rat(&map.det, k),
        eigenvalues: vec![eig(fp.eigenvalues.0), eig(fp.eigenvalues.1)],
        scale_note: "weights normalized to beta2 = 1 (or beta = (1,0)); \
                     amplitudes rescale linearly under any other choice"
            .to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSection {
    pub class: String,
    pub n: u32,
    pub m: u32,
    pub f00: Num,
    pub f00_sign: i8,
    /// `F(0,0) < 0`: a locally stable cycle is admissible.
    pub stable_cycle_condition: bool,
    pub re_lambda: Num,
    /// Residual of `F(0,0) + 2 Re(lambda)`.
    pub eigen_check_residual: Num,
}

pub fn class_section(rep: &ClassReport, kind: CoeffKind) -> ClassSection {
    ClassSection {
        class: rep.class.name().to_string(),
        n: rep.n_max,
        m: rep.m_max,
        f00: Num::rat(&rep.f00, kind),
        f00_sign: match rep.f00_f64.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Less) => -1,
            Some(std::cmp::Ordering::Greater) => 1,
            _ => 0,
        },
        stable_cycle_condition: rep.stable_cycle_condition,
        re_lambda: Num::float(rep.re_lambda),
        eigen_check_residual: Num::float(rep.eigen_residual),
    }
}

/// One `p/q · ω^k · ρ^p` term of an averaged polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaTerm {
    pub rho_pow: u32,
    pub omega_pow: u32,
    pub coeff: Num,
}

fn omega_terms(p: &BiPoly, kind: CoeffKind) -> Vec<OmegaTerm> {
    p.terms()
        .map(|((i, j), c)| OmegaTerm {
            rho_pow: *i,
            omega_pow: *j,
            coeff: Num::rat(c, kind),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedSection {
    pub sigma: Num,
    pub omega2: Num,
    pub omega: Num,
    pub eps: Num,
    pub b01_sign: i8,
    /// Time scale of the reported rates: `"tau"` (default) or `"t"`.
    pub time_scale: String,
    /// `R(ρ)` terms; `dr/dτ = ε r R(r²)`.
    pub radial: Vec<OmegaTerm>,
    /// `Φ(ρ)` terms; `dφ/dτ = ε Φ(r²)`.
    pub phase: Vec<OmegaTerm>,
    /// `R/ω` with `ω²` substituted: rational coefficients by power of ρ.
    pub radial_rho: Vec<Num>,
    pub phase_rho: Vec<Num>,
}

pub fn averaged_section(
    osc: &RescaledOscillator,
    avg: &AveragedDynamics,
    t_time: bool,
) -> AveragedSection {
    let kind = osc.kind();
    let (radial, phase) = if t_time {
        // rates in original time pick up one extra factor of omega
        let bump = |p: &BiPoly| {
            BiPoly::from_terms(p.terms().map(|((i, j), c)| ((*i, j + 1), c.clone())))
        };
        (bump(avg.radial()), bump(avg.phase()))
    } else {
        (avg.radial().clone(), avg.phase().clone())
    };
    AveragedSection {
        sigma: Num::rat(osc.sigma(), kind),
        omega2: Num::rat(osc.omega2(), kind),
        omega: Num::float(osc.omega()),
        eps: Num::rat(osc.eps(), kind),
        b01_sign: osc.b01_sign(),
        time_scale: if t_time { "t" } else { "tau" }.to_string(),
        radial: omega_terms(&radial, kind),
        phase: omega_terms(&phase, kind),
        radial_rho: avg
            .radial_rho()
            .coeffs()
            .iter()
            .map(|c| Num::rat(c, kind))
            .collect(),
        phase_rho: avg
            .phase_rho()
            .coeffs()
            .iter()
            .map(|c| Num::rat(c, kind))
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleOut {
    pub radius: Num,
    pub rho: Num,
    pub multiplicity: usize,
    pub stability: String,
    pub freq_correction: Num,
    pub corrected_omega: Num,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundOut {
    pub n: u32,
    pub m: u32,
    pub parity_class: String,
    pub max_real_roots: u32,
    pub max_cycles: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleSection {
    pub origin: String,
    pub cycles: Vec<CycleOut>,
    pub bound: BoundOut,
    pub saturated: bool,
    pub complex_pairs: usize,
}

pub fn cycle_section(report: &CycleReport, kind: CoeffKind) -> CycleSection {
    CycleSection {
        origin: report.origin.name().to_string(),
        cycles: report
            .cycles
            .iter()
            .map(|c| CycleOut {
                radius: Num::float(c.radius),
                rho: match &c.rho_exact {
                    Some(r) => Num::rat(r, kind),
                    None => Num::float(c.rho),
                },
                multiplicity: c.multiplicity,
                stability: c.stability.name().to_string(),
                freq_correction: Num::float(c.freq_correction),
                corrected_omega: Num::float(c.corrected_omega),
            })
            .collect(),
        bound: BoundOut {
            n: report.bound.n,
            m: report.bound.m,
            parity_class: report.bound.parity_class.name().to_string(),
            max_real_roots: report.bound.max_real_roots,
            max_cycles: report.bound.max_cycles,
        },
        saturated: report.saturated,
        complex_pairs: report.complex_pairs,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectedOut {
    pub amplitude: Num,
    pub radius_mean: Num,
    pub period: Num,
    pub stability: String,
    pub direction: String,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeOut {
    pub seed: Num,
    pub direction: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Num>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionSection {
    pub cycles: Vec<DetectedOut>,
    pub outcomes: Vec<OutcomeOut>,
}

pub fn detection_section(det: &Detection) -> DetectionSection {
    DetectionSection {
        cycles: det
            .cycles
            .iter()
            .map(|c| DetectedOut {
                amplitude: Num::simulated(c.amplitude),
                radius_mean: Num::simulated(c.radius_mean),
                period: Num::simulated(c.period),
                stability: c.stability.name().to_string(),
                direction: c.direction_found.name().to_string(),
                converged: c.converged,
            })
            .collect(),
        outcomes: det
            .outcomes
            .iter()
            .map(|o| OutcomeOut {
                seed: Num::float(o.seed),
                direction: o.direction.name().to_string(),
                status: o.status.name().to_string(),
                amplitude: o.amplitude.map(Num::simulated),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchOut {
    pub predicted_radius: Num,
    pub detected_amplitude: Num,
    pub rel_err: Num,
    pub agreed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonSection {
    pub tolerance: Num,
    pub matches: Vec<MatchOut>,
    pub unmatched_predicted: Vec<Num>,
    pub unmatched_detected: Vec<Num>,
    pub all_agreed: bool,
}

pub fn comparison_section(cmp: &KbComparison) -> ComparisonSection {
    ComparisonSection {
        tolerance: Num::float(cmp.tolerance),
        matches: cmp
            .matches
            .iter()
            .map(|m| MatchOut {
                predicted_radius: Num::float(m.predicted_radius),
                detected_amplitude: Num::simulated(m.detected_amplitude),
                rel_err: Num::float(m.rel_err),
                agreed: m.agreed,
            })
            .collect(),
        unmatched_predicted: cmp.unmatched_predicted.iter().copied().map(Num::float).collect(),
        unmatched_detected: cmp
            .unmatched_detected
            .iter()
            .copied()
            .map(Num::simulated)
            .collect(),
        all_agreed: cmp.all_agreed,
    }
}

/// The full analysis report.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ReportFile {
    pub schema: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSection>,
    /// The reduced system, itself a valid system file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lls: Option<SystemFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub averaged: Option<AveragedSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<CycleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSection>,
    pub warnings: Vec<String>,
}

impl ReportFile {
    pub fn new() -> Self {
        ReportFile {
            schema: "cyclekit-report/1".to_string(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub params: Vec<(String, String)>,
}

/// Write trajectory samples as CSV with the given header columns.
pub fn trajectory_csv(header: (&str, &str, &str), rows: &[(f64, [f64; 2])]) -> String {
    let mut out = format!("{},{},{}\n", header.0, header.1, header.2);
    for (t, y) in rows {
        out.push_str(&format!("{t:.12e},{:.12e},{:.12e}\n", y[0], y[1]));
    }
    out
}

/// CSV of the cycle-count grid: one row per `(N, M)` cell.
pub fn table_csv(grid: &[Vec<(u32, u32)>]) -> String {
    let mut out = String::from("N,M,degree_sum,max_real_roots\n");
    for (i, row) in grid.iter().enumerate() {
        for (j, (oplus, r)) in row.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", i + 1, j + 1, oplus, r));
        }
    }
    out
}

/// Aligned text rendering of the cycle-count grid with `⊕,R` cells.
pub fn table_text(grid: &[Vec<(u32, u32)>]) -> String {
    let m_max = grid.first().map(|r| r.len()).unwrap_or(0);
    let mut out = String::new();
    out.push_str("        ");
    for m in 1..=m_max {
        out.push_str(&format!("M={m:<6}"));
    }
    out.push('\n');
    for (i, row) in grid.iter().enumerate() {
        out.push_str(&format!("N={:<3}   ", i + 1));
        for (oplus, r) in row {
            out.push_str(&format!("{oplus},{r:<5}"));
        }
        out.push('\n');
    }
    out
}

/// Sampled radial flow `dr/dτ` for plotting, as CSV.
pub fn radial_flow_csv(avg: &AveragedDynamics, r_max: f64, samples: usize) -> String {
    let mut out = String::from("r,dr_dtau\n");
    let eps = rat_to_f64(avg.eps());
    let omega = avg.omega();
    for k in 0..=samples {
        let r = r_max * k as f64 / samples as f64;
        let v = eps * omega * r * avg.radial_rho().eval_f64(r * r);
        out.push_str(&format!("{r:.8e},{v:.8e}\n"));
    }
    out
}
