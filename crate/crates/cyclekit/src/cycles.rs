//! Counting, locating and classifying limit cycles from the averaged
//! radial polynomial, plus the parity bound on the maximum cycle count.
//!
//! Each positive root `ρ*` of `R(ρ)` is a steady amplitude `r̄ = √ρ*` of
//! the averaged flow `dr̄/dτ = ε r̄ R(r̄²)`; its stability follows from the
//! sign of the flow's derivative across the root, and the origin's nature
//! from the sign of `R(0)`. The parity classes of `(N, M)` give the closed
//! form for the maximum number of nonzero real amplitude roots, checked
//! constructively against the generic symbolic table.

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use crate::averaging::{kb_symbolic, AveragedDynamics};
use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, Rat, UniPoly};

/// Roots with `ρ` at or below this threshold count as the origin (always
/// an equilibrium of the radial flow), not as cycles.
pub const ORIGIN_RHO_TOL: f64 = 1e-9;

/// Root condition numbers above this trigger an ill-conditioning warning.
pub const CONDITION_WARN: f64 = 1e8;

/// One positive root of the radial polynomial.
#[derive(Debug, Clone)]
pub struct RadialRoot {
    pub rho: f64,
    /// Set when the root was certified exactly (rational root).
    pub rho_exact: Option<Rat>,
    pub multiplicity: usize,
    /// Condition number estimate of the root of the square-free factor.
    pub condition: f64,
}

impl RadialRoot {
    pub fn radius(&self) -> f64 {
        self.rho.sqrt()
    }
}

/// All positive radial roots plus root-finding metadata.
#[derive(Debug, Clone)]
pub struct RadialRoots {
    pub roots: Vec<RadialRoot>,
    /// Number of complex-conjugate root pairs of `R` (counted with
    /// multiplicity); these shed no cycles.
    pub complex_pairs: usize,
    /// Real roots at or below the origin threshold or negative (counted
    /// with multiplicity); not cycles either.
    pub nonpositive_real: usize,
    pub warnings: Vec<String>,
}

/// Find all roots of `R(ρ)` with `ρ > tol`.
///
/// The polynomial is split into square-free factors exactly (so
/// multiplicities are certain), each factor's roots come from the
/// companion-matrix eigenvalues of the float projection, are polished by
/// Newton steps evaluated on the exact polynomial, and are certified
/// exactly when a small rational matches.
pub fn radial_roots(avg: &AveragedDynamics, tol: f64) -> Result<RadialRoots> {
    let p = avg.radial_rho();
    if p.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    let mut out = RadialRoots {
        roots: Vec::new(),
        complex_pairs: 0,
        nonpositive_real: 0,
        warnings: Vec::new(),
    };
    if p.degree() == Some(0) {
        return Ok(out);
    }
    for (factor, mult) in p.square_free() {
        let deg = factor.degree().unwrap_or(0);
        let (reals, complex_pairs) = factor_real_roots(&factor);
        out.complex_pairs += complex_pairs * mult;
        for (rho, rho_exact) in reals {
            if rho <= tol {
                out.nonpositive_real += mult;
                continue;
            }
            let condition = root_condition(&factor, rho);
            if condition > CONDITION_WARN {
                out.warnings.push(format!(
                    "root rho = {rho:.6} is ill-conditioned (condition ~ {condition:.2e})"
                ));
            }
            out.roots.push(RadialRoot {
                rho,
                rho_exact,
                multiplicity: mult,
                condition,
            });
        }
        debug_assert!(deg >= complex_pairs * 2);
    }
    out.roots
        .sort_by(|a, b| a.rho.partial_cmp(&b.rho).unwrap());
    Ok(out)
}

/// Real roots of a square-free factor, with exact certificates where
/// possible; also returns the number of complex-conjugate pairs.
fn factor_real_roots(q: &UniPoly) -> (Vec<(f64, Option<Rat>)>, usize) {
    match q.degree() {
        None | Some(0) => (Vec::new(), 0),
        Some(1) => {
            let root = -q.coeff(0) / q.coeff(1);
            (vec![(rat_to_f64(&root), Some(root))], 0)
        }
        Some(2) => {
            let (c0, c1, c2) = (q.coeff(0), q.coeff(1), q.coeff(2));
            let disc = &c1 * &c1 - Rat::from_integer(4.into()) * &c0 * &c2;
            if disc.is_negative() {
                return (Vec::new(), 1);
            }
            if let Some(s) = rat_sqrt_exact(&disc) {
                let two_c2 = Rat::from_integer(2.into()) * &c2;
                let r1 = (-&c1 - &s) / &two_c2;
                let r2 = (-&c1 + &s) / &two_c2;
                return (
                    vec![
                        (rat_to_f64(&r1), Some(r1)),
                        (rat_to_f64(&r2), Some(r2)),
                    ],
                    0,
                );
            }
            let (c0, c1, c2) = (rat_to_f64(&c0), rat_to_f64(&c1), rat_to_f64(&c2));
            let s = rat_to_f64(&disc).sqrt();
            // the numerically stable pairing (avoid cancellation)
            let qq = -0.5 * (c1 + c1.signum() * s);
            let (r1, r2) = if qq != 0.0 {
                (qq / c2, c0 / qq)
            } else {
                ((-c1 + s) / (2.0 * c2), (-c1 - s) / (2.0 * c2))
            };
            let mut roots: Vec<(f64, Option<Rat>)> = [r1, r2]
                .into_iter()
                .map(|r| {
                    let r = newton_polish(q, r);
                    (r, rational_certificate(q, r))
                })
                .collect();
            roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            (roots, 0)
        }
        Some(deg) => {
            let eigen = companion_eigenvalues(q);
            let scale: f64 = eigen.iter().map(|e| e.norm()).fold(1.0, f64::max);
            let mut reals = Vec::new();
            let mut complex = 0usize;
            for e in &eigen {
                if e.im.abs() <= 1e-7 * scale {
                    let r = newton_polish(q, e.re);
                    reals.push(r);
                } else {
                    complex += 1;
                }
            }
            // eigenvalue pairs with tiny imaginary parts may polish onto the
            // same real root; companion eigenvalues of a square-free factor
            // are distinct, so deduplicate conservatively
            reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            reals.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));
            let roots = reals
                .into_iter()
                .map(|r| (r, rational_certificate(q, r)))
                .collect();
            debug_assert_eq!(complex % 2, 0);
            let _ = deg;
            (roots, complex / 2)
        }
    }
}

/// Eigenvalues of the companion matrix of the monic float projection.
fn companion_eigenvalues(q: &UniPoly) -> Vec<num_complex::Complex<f64>> {
    let monic = q.monic();
    let d = monic.degree().unwrap();
    let m = DMatrix::<f64>::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -rat_to_f64(&monic.coeff(i))
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    m.complex_eigenvalues().iter().copied().collect()
}

/// A few Newton steps with residual and derivative evaluated on the exact
/// polynomial; returns the input unchanged if Newton stalls.
fn newton_polish(p: &UniPoly, x0: f64) -> f64 {
    let dp = p.derivative();
    let mut x = x0;
    for _ in 0..40 {
        let fx = p.eval_f64(x);
        let dfx = dp.eval_f64(x);
        if dfx == 0.0 {
            break;
        }
        let step = fx / dfx;
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    if x.is_finite() {
        x
    } else {
        x0
    }
}

/// Try to certify a float root as an exact rational via its continued
/// fraction convergents (denominators up to 10^6) checked on the exact
/// polynomial.
fn rational_certificate(p: &UniPoly, x: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    convergents(x, 1_000_000, 1e-11)
        .into_iter()
        .find(|cand| p.eval_rat(cand).is_zero())
}

/// Continued-fraction convergents `p/q` of `x` with `q <= q_max`, keeping
/// only those within `tol` of `x`.
fn convergents(x: f64, q_max: i64, tol: f64) -> Vec<Rat> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    out.push(Rat::new(p1.into(), q1.into()));
    for _ in 0..24 {
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        if !(0.0..9e17).contains(&a) {
            break;
        }
        frac = inv - a;
        let a = a as i64;
        let (p2, q2) = match (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) {
            (Some(p2), Some(q2)) => (p2, q2),
            _ => break,
        };
        if q2 > q_max {
            break;
        }
        out.push(Rat::new(p2.into(), q2.into()));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out.retain(|r| (rat_to_f64(r) - x).abs() <= tol * (1.0 + x.abs()));
    out
}

/// Exact square root of a nonnegative rational, when it is one.
fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// First-order condition number of `x` as a root of `p`:
/// `Σ|c_k x^k| / (|x| |p'(x)|)`.
fn root_condition(p: &UniPoly, x: f64) -> f64 {
    let num: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| (rat_to_f64(c) * x.powi(k as i32)).abs())
        .sum();
    let den = x.abs() * p.derivative().eval_f64(x).abs();
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Even multiplicity: semi-stable cycle (attracting on one side,
    /// repelling on the other).
    Degenerate,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginNature {
    StableFocus,
    UnstableFocus,
    CenterType,
}

impl OriginNature {
    pub fn name(self) -> &'static str {
        match self {
            OriginNature::StableFocus => "stable-focus",
            OriginNature::UnstableFocus => "unstable-focus",
            OriginNature::CenterType => "center-type",
        }
    }
}

/// One predicted cycle.
#[derive(Debug, Clone)]
pub struct CycleEstimate {
    pub radius: f64,
    pub rho: f64,
    pub rho_exact: Option<Rat>,
    pub multiplicity: usize,
    pub stability: Stability,
    /// `dφ̄/dτ` at the root: the first-order phase drift.
    pub freq_correction: f64,
    /// Corrected angular frequency in original time, `ω (1 + ε Φ(ρ*))`.
    pub corrected_omega: f64,
}

/// Parity class of the degree pair `(N, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    EvenEven,
    EvenOdd,
    OddEven,
    OddOdd,
}

impl ParityClass {
    #[allow(clippy::manual_is_multiple_of)] // parity, not divisibility
    pub fn of(n: u32, m: u32) -> ParityClass {
        match (n % 2 == 0, m % 2 == 0) {
            (true, true) => ParityClass::EvenEven,
            (true, false) => ParityClass::EvenOdd,
            (false, true) => ParityClass::OddEven,
            (false, false) => ParityClass::OddOdd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParityClass::EvenEven => "even-even",
            ParityClass::EvenOdd => "even-odd",
            ParityClass::OddEven => "odd-even",
            ParityClass::OddOdd => "odd-odd",
        }
    }
}

/// Closed-form maximum number of nonzero real amplitude roots (and hence
/// cycles) for damping degree `N` and restoring degree `M`.
#[derive(Debug, Clone, Copy)]
pub struct ParityBound {
    pub n: u32,
    pub m: u32,
    pub parity_class: ParityClass,
    pub max_real_roots: u32,
    pub max_cycles: u32,
}

/// The parity bound: conjugate `±r̄` roots come in pairs, so the cycle
/// count is half the maximum number of nonzero real roots, which depends
/// only on the parities of `(N, M)`.
pub fn parity_bound(n: u32, m: u32) -> ParityBound {
    assert!(n >= 1 && m >= 1, "parity bound needs N, M >= 1");
    let parity_class = ParityClass::of(n, m);
    let max_real_roots = match parity_class {
        ParityClass::EvenEven | ParityClass::OddOdd => n + m - 2,
        ParityClass::EvenOdd => n + m - 1,
        ParityClass::OddEven => n + m - 3,
    };
    ParityBound {
        n,
        m,
        parity_class,
        max_real_roots,
        max_cycles: max_real_roots / 2,
    }
}

/// Constructive counterpart of [`parity_bound`]: run the averaging rule on
/// the generic symbolic table of shape `(N, M)` and report
/// `(⊕, R) = (N + M, 2 · deg R(ρ))`.
pub fn generic_degree_bound(n: u32, m: u32) -> (u32, u32) {
    assert!(n >= 1 && m >= 1);
    let sym = kb_symbolic(n, m);
    (n + m, 2 * sym.radial_degree().unwrap_or(0))
}

/// The `(⊕, R)` grid for `1 ≤ N ≤ n_max`, `1 ≤ M ≤ m_max` (row-major in
/// `N`).
pub fn render_table_ii(n_max: u32, m_max: u32) -> Vec<Vec<(u32, u32)>> {
    assert!(n_max >= 1 && m_max >= 1);
    (1..=n_max)
        .map(|n| (1..=m_max).map(|m| generic_degree_bound(n, m)).collect())
        .collect()
}

/// Full cycle classification for one system.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub origin: OriginNature,
    /// Ordered by radius, innermost first.
    pub cycles: Vec<CycleEstimate>,
    pub bound: ParityBound,
    /// Cycle count reached the parity bound.
    pub saturated: bool,
    pub complex_pairs: usize,
    pub warnings: Vec<String>,
}

/// Stabilities and the origin's nature from the signs of the radial flow.
///
/// At a root of odd multiplicity `k` the flow derivative across the root
/// has the sign of `P^(k)(ρ*)` (computed exactly for certified roots);
/// even multiplicity is reported as a degenerate (semi-stable) cycle.
pub fn classify_cycles(avg: &AveragedDynamics, roots: &RadialRoots) -> CycleReport {
    let p = avg.radial_rho();
    let origin = {
        let p0 = p.coeff(0);
        if p0.is_zero() {
            OriginNature::CenterType
        } else if p0.is_positive() {
            OriginNature::UnstableFocus
        } else {
            OriginNature::StableFocus
        }
    };
    let omega = avg.omega();
    let eps = avg.eps_f64();
    let cycles: Vec<CycleEstimate> = roots
        .roots
        .iter()
        .map(|root| {
            let stability = if root.multiplicity % 2 == 0 {
                Stability::Degenerate
            } else {
                let mut d = p.clone();
                for _ in 0..root.multiplicity {
                    d = d.derivative();
                }
                let sign = match &root.rho_exact {
                    Some(rho) => {
                        let v = d.eval_rat(rho);
                        if v.is_positive() {
                            1
                        } else if v.is_negative() {
                            -1
                        } else {
                            0
                        }
                    }
                    None => {
                        let v = d.eval_f64(root.rho);
                        if v > 0.0 {
                            1
                        } else if v < 0.0 {
                            -1
                        } else {
                            0
                        }
                    }
                };
                if sign < 0 {
                    Stability::Stable
                } else {
                    Stability::Unstable
                }
            };
            let freq_correction = eps * avg.phase_rho().eval_f64(root.rho);
            CycleEstimate {
                radius: root.rho.sqrt(),
                rho: root.rho,
                rho_exact: root.rho_exact.clone(),
                multiplicity: root.multiplicity,
                stability,
                freq_correction,
                corrected_omega: omega * (1.0 + freq_correction),
            }
        })
        .collect();
    let bound = parity_bound(avg.n_max().max(1), avg.m_max().max(1));
    let saturated = cycles.len() as u32 == bound.max_cycles;
    CycleReport {
        origin,
        saturated,
        bound,
        complex_pairs: roots.complex_pairs,
        warnings: roots.warnings.clone(),
        cycles,
    }
}
