//! First-order Krylov-Bogoliubov averaging of the LLS oscillator.
//!
//! The reduced equation is rescaled with `ω² = −A10` and `σ = |F(0,0)|`
//! into the weakly nonlinear normal form
//!
//! ```text
//! Z̈(τ) + ε h(Z, Ż) + Z = 0,   ε = σ/ω²,   τ = ω t,
//! ```
//!
//! whose slowly varying amplitude and phase obey, to first order,
//!
//! ```text
//! dr̄/dτ = ε r̄ R(r̄²),      dφ̄/dτ = ε Φ(r̄²).
//! ```
//!
//! The averages of the damping monomials reduce to the Wallis integrals
//! `W(a,b) = ⟨cos^{2a}θ sin^{2b}θ⟩`, which are exact rationals, so `R` and
//! `Φ` come out with coefficients of the form `p/q · ω^k`. Only damping
//! monomials `B_nm Z^n (ωŻ)^m` with `n` even and `m` odd survive in `R`;
//! only those with `n` odd and `m` even, together with odd restoring
//! monomials `B_n0 Z^n`, survive in `Φ`. The parity selection is what
//! bounds the number of positive roots of `R`, and with it the number of
//! limit cycles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{rat_from_f64, rat_to_f64, BiPoly, CoeffKind, Rat, UniPoly};
use crate::reduction::LLSSystem;

/// Above this value of `ε = σ/ω²` the first-order averaging is heuristic
/// and results are flagged with a warning (never an error).
pub const EPS_WARN_THRESHOLD: f64 = 0.3;

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    acc
}

/// Wallis average `W(a, b) = (1/2π) ∫₀^{2π} cos^{2a}θ sin^{2b}θ dθ`
/// `= (2a)! (2b)! / (4^{a+b} a! b! (a+b)!)`, exactly.
pub fn wallis(a: u32, b: u32) -> Rat {
    let num = factorial(2 * a) * factorial(2 * b);
    let den = BigInt::from(4).pow(a + b) * factorial(a) * factorial(b) * factorial(a + b);
    Rat::new(num, den)
}

/// Destination of an averaged monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbTarget {
    Radial,
    Phase,
}

/// First-order average of one table entry `B_nm` (damping for `m ≥ 1`,
/// restoring for `m = 0`). Returns `(target, ρ-power, rational weight,
/// ω-power)` — the entry contributes `weight · B_nm · ω^k · ρ^p` — or
/// `None` when the angular average vanishes. This single function is the
/// averaging rule; everything else folds over it.
#[allow(clippy::manual_is_multiple_of, clippy::manual_div_ceil)] // keep the index arithmetic in the derivation's form
pub fn kb_contribution(n: u32, m: u32) -> Option<(KbTarget, u32, Rat, u32)> {
    if m == 0 {
        // restoring monomial B_n0 Z^n (n >= 2): only odd powers average
        // into the phase through <cos^{n+1}>
        if n < 2 || n % 2 == 0 {
            return None;
        }
        return Some((KbTarget::Phase, (n - 1) / 2, -wallis((n + 1) / 2, 0), 0));
    }
    if n % 2 == 0 && m % 2 == 1 {
        // <cos^n sin^{m+1}> with the (-sin)^m sign flip
        Some((
            KbTarget::Radial,
            (n + m - 1) / 2,
            wallis(n / 2, (m + 1) / 2),
            m,
        ))
    } else if n % 2 == 1 && m % 2 == 0 {
        // <cos^{n+1} sin^m>
        Some((
            KbTarget::Phase,
            (n + m - 1) / 2,
            -wallis((n + 1) / 2, m / 2),
            m,
        ))
    } else {
        None
    }
}

/// The oscillator of the rescaled normal form: `ε`, `ω`, the normalized
/// coefficient table `B = A/σ`, and the nonlinearity `h(Z, Ż)`.
#[derive(Debug, Clone)]
pub struct RescaledOscillator {
    sigma: Rat,
    omega2: Rat,
    eps: Rat,
    b: BTreeMap<(u32, u32), Rat>,
    b01_sign: i8,
    h: BiPoly,
    kind: CoeffKind,
    n_max: u32,
    m_max: u32,
    warnings: Vec<String>,
}

impl RescaledOscillator {
    /// Maximal `ξ` power of the source equation.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Maximal `ξ̇` power of the source equation.
    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn sigma(&self) -> &Rat {
        &self.sigma
    }

    pub fn omega2(&self) -> &Rat {
        &self.omega2
    }

    pub fn omega(&self) -> f64 {
        rat_to_f64(&self.omega2).sqrt()
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn eps_f64(&self) -> f64 {
        rat_to_f64(&self.eps)
    }

    /// Normalized table `B_nm = A_nm / σ` (no `(0,0)` or `(1,0)` entries:
    /// the former vanishes, the latter is absorbed into the linear term).
    pub fn b_table(&self) -> &BTreeMap<(u32, u32), Rat> {
        &self.b
    }

    pub fn b_coeff(&self, n: u32, m: u32) -> Rat {
        self.b.get(&(n, m)).cloned().unwrap_or_else(Rat::zero)
    }

    /// `sign(B01) ∈ {−1, 0, +1}`: stable focus, center-type, or unstable
    /// focus (cycle-shedding) origin.
    pub fn b01_sign(&self) -> i8 {
        self.b01_sign
    }

    /// The nonlinearity `h(Z, Ż)` with the `ω^m` weights folded into the
    /// coefficients (floating point, tagged as such).
    pub fn h(&self) -> &BiPoly {
        &self.h
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `h` as a flat `(n, m, coeff)` list with the `ω^m` weights applied,
    /// for fast repeated evaluation.
    pub fn h_terms_f64(&self) -> Vec<(i32, i32, f64)> {
        let omega = self.omega();
        self.b
            .iter()
            .map(|((n, m), b)| {
                (
                    *n as i32,
                    *m as i32,
                    -(rat_to_f64(b) * omega.powi(*m as i32)),
                )
            })
            .collect()
    }

    /// Evaluate `h(Z, Ż)` from the exact table (double precision result).
    pub fn h_eval(&self, z: f64, zdot: f64) -> f64 {
        self.h_terms_f64()
            .iter()
            .map(|(n, m, c)| c * z.powi(*n) * zdot.powi(*m))
            .sum()
    }
}

/// Rescale an LLS system into the weakly nonlinear normal form.
///
/// `σ = |A01|` with a fallback of 1 when `A01 = 0` (the center-type
/// branch, where normalizing by the local damping degenerates). Fails
/// with [`Error::NotOscillatory`] when `−A10 ≤ 0`.
pub fn rescale(lls: &LLSSystem) -> Result<RescaledOscillator> {
    let omega2 = lls.omega_squared();
    if !omega2.is_positive() {
        return Err(Error::NotOscillatory {
            minus_a10: rat_to_f64(&omega2),
        });
    }
    let a01 = lls.a_coeff(0, 1);
    let sigma = if a01.is_zero() { Rat::one() } else { a01.abs() };
    let b01_sign = match a01.cmp(&Rat::zero()) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    };
    let eps = &sigma / &omega2;

    let mut b = BTreeMap::new();
    for ((n, m), a) in lls.a_table() {
        if (*n, *m) == (1, 0) {
            continue; // linear restoring: absorbed into the unit frequency
        }
        b.insert((*n, *m), a / &sigma);
    }

    let omega = rat_to_f64(&omega2).sqrt();
    let mut h = BiPoly::zero().with_kind(CoeffKind::Float);
    for ((n, m), bc) in &b {
        let coeff = -(rat_to_f64(bc) * omega.powi(*m as i32));
        if let Some(c) = rat_from_f64(coeff) {
            h = h.add(&BiPoly::monomial(*n, *m, c).with_kind(CoeffKind::Float));
        }
    }

    let mut warnings = Vec::new();
    let eps_f = rat_to_f64(&eps);
    if eps_f >= EPS_WARN_THRESHOLD {
        warnings.push(format!(
            "eps = {eps_f:.4} >= {EPS_WARN_THRESHOLD}: first-order averaging is heuristic here"
        ));
    }

    Ok(RescaledOscillator {
        sigma,
        omega2,
        eps,
        b,
        b01_sign,
        h,
        kind: lls.kind(),
        n_max: lls.n_max(),
        m_max: lls.m_max(),
        warnings,
    })
}

/// The averaged amplitude/phase dynamics.
///
/// `radial` and `phase` are polynomials in `(ρ, ω)` with exact rational
/// coefficients: `dr̄/dτ = ε r̄ R(r̄²)` and `dφ̄/dτ = ε Φ(r̄²)` where `ρ = r̄²`
/// and `ω` is evaluated at the oscillator's frequency. `R` carries only odd
/// powers of `ω` and `Φ` only even ones, so substituting the exact `ω²`
/// yields rational univariate polynomials: `R(ρ) = ω · radial_rho(ρ)` and
/// `Φ(ρ) = phase_rho(ρ)`.
#[derive(Debug, Clone)]
pub struct AveragedDynamics {
    radial: BiPoly,
    phase: BiPoly,
    radial_rho: UniPoly,
    phase_rho: UniPoly,
    eps: Rat,
    omega2: Rat,
    n_max: u32,
    m_max: u32,
    warnings: Vec<String>,
}

impl AveragedDynamics {
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// `R(ρ)` as a polynomial in `(ρ, ω)`.
    pub fn radial(&self) -> &BiPoly {
        &self.radial
    }

    /// `Φ(ρ)` as a polynomial in `(ρ, ω)`.
    pub fn phase(&self) -> &BiPoly {
        &self.phase
    }

    /// `P(ρ)` with `R(ρ) = ω P(ρ)` and `ω²` substituted exactly; the
    /// radial roots and stability signs live here.
    pub fn radial_rho(&self) -> &UniPoly {
        &self.radial_rho
    }

    /// `Φ(ρ)` with `ω²` substituted exactly.
    pub fn phase_rho(&self) -> &UniPoly {
        &self.phase_rho
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn eps_f64(&self) -> f64 {
        rat_to_f64(&self.eps)
    }

    pub fn omega2(&self) -> &Rat {
        &self.omega2
    }

    pub fn omega(&self) -> f64 {
        rat_to_f64(&self.omega2).sqrt()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `dr̄/dτ` at amplitude `r̄ = r`.
    pub fn radial_rate(&self, r: f64) -> f64 {
        self.eps_f64() * r * self.omega() * self.radial_rho.eval_f64(r * r)
    }

    /// `dφ̄/dτ` at amplitude `r̄ = r`.
    pub fn phase_rate(&self, r: f64) -> f64 {
        self.eps_f64() * self.phase_rho.eval_f64(r * r)
    }
}

/// Fold the oscillator's table through the averaging rule.
pub fn kb_average(osc: &RescaledOscillator) -> AveragedDynamics {
    let mut radial = BiPoly::zero();
    let mut phase = BiPoly::zero();
    for ((n, m), bc) in osc.b_table() {
        if let Some((target, rho_pow, weight, omega_pow)) = kb_contribution(*n, *m) {
            let term = BiPoly::monomial(rho_pow, omega_pow, weight * bc);
            match target {
                KbTarget::Radial => radial = radial.add(&term),
                KbTarget::Phase => phase = phase.add(&term),
            }
        }
    }
    debug_assert!(radial.terms().all(|((_, k), _)| k % 2 == 1));
    debug_assert!(phase.terms().all(|((_, k), _)| k % 2 == 0));

    let radial_rho = substitute_omega(&radial, osc.omega2(), 1);
    let phase_rho = substitute_omega(&phase, osc.omega2(), 0);

    AveragedDynamics {
        radial,
        phase,
        radial_rho,
        phase_rho,
        eps: osc.eps().clone(),
        omega2: osc.omega2().clone(),
        n_max: osc.n_max(),
        m_max: osc.m_max(),
        warnings: osc.warnings().to_vec(),
    }
}

/// Substitute `ω² -> omega2` after factoring out `ω^parity`; panics if a
/// term's ω-power has the wrong parity.
fn substitute_omega(p: &BiPoly, omega2: &Rat, parity: u32) -> UniPoly {
    let mut coeffs = vec![Rat::zero(); p.degree().0 as usize + 1];
    for ((rho_pow, omega_pow), c) in p.terms() {
        assert!(
            omega_pow % 2 == parity,
            "omega power {omega_pow} has unexpected parity"
        );
        let mut t = c.clone();
        for _ in 0..(omega_pow - parity) / 2 {
            t *= omega2;
        }
        coeffs[*rho_pow as usize] += t;
    }
    UniPoly::from_coeffs(coeffs)
}

/// One term of the symbolic averaged dynamics: table entry `B_nm`
/// contributes `weight · ω^omega_pow · ρ^rho_pow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicTerm {
    pub n: u32,
    pub m: u32,
    pub rho_pow: u32,
    pub weight: Rat,
    pub omega_pow: u32,
}

/// Averaging of the fully generic table with maximal powers `(N, M)`:
/// every damping entry `B_nm` (`0 ≤ n ≤ N`, `1 ≤ m ≤ M`) and every
/// restoring entry `B_n0` (`2 ≤ n ≤ N`) is passed through the rule and the
/// survivors recorded per target.
#[derive(Debug, Clone)]
pub struct SymbolicAveraged {
    pub n_max: u32,
    pub m_max: u32,
    pub radial: Vec<SymbolicTerm>,
    pub phase: Vec<SymbolicTerm>,
}

impl SymbolicAveraged {
    /// Degree of the generic radial polynomial `R(ρ)`; `None` when no term
    /// survives (first-order center for every table of this shape).
    pub fn radial_degree(&self) -> Option<u32> {
        self.radial.iter().map(|t| t.rho_pow).max()
    }
}

pub fn kb_symbolic(n_max: u32, m_max: u32) -> SymbolicAveraged {
    let mut radial = Vec::new();
    let mut phase = Vec::new();
    let mut push = |n: u32, m: u32| {
        if let Some((target, rho_pow, weight, omega_pow)) = kb_contribution(n, m) {
            let term = SymbolicTerm {
                n,
                m,
                rho_pow,
                weight,
                omega_pow,
            };
            match target {
                KbTarget::Radial => radial.push(term),
                KbTarget::Phase => phase.push(term),
            }
        }
    };
    for n in 0..=n_max {
        for m in 1..=m_max {
            push(n, m);
        }
    }
    for n in 2..=n_max {
        push(n, 0);
    }
    SymbolicAveraged {
        n_max,
        m_max,
        radial,
        phase,
    }
}

/// Brute-force check of the averaging rule: evaluate
/// `⟨ε h sinθ⟩` and `⟨(ε h / r) cosθ⟩` at fixed amplitude `r` by a
/// 4096-point trapezoid rule over one period (spectrally accurate for the
/// smooth periodic integrand). Returns `(dr_avg, dphi_avg)`.
pub fn numeric_average_oracle(osc: &RescaledOscillator, r: f64) -> (f64, f64) {
    debug_assert!(r > 0.0);
    const N: usize = 4096;
    let eps = osc.eps_f64();
    let terms = osc.h_terms_f64();
    let mut dr = 0.0;
    let mut dphi = 0.0;
    for k in 0..N {
        let theta = 2.0 * PI * k as f64 / N as f64;
        let (s, c) = theta.sin_cos();
        let (z, zd) = (r * c, -r * s);
        let h: f64 = terms.iter().map(|(n, m, w)| w * z.powi(*n) * zd.powi(*m)).sum();
        dr += h * s;
        dphi += h * c / r;
    }
    (eps * dr / N as f64, eps * dphi / N as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use crate::reduction::LLSSystem;
    use std::collections::BTreeMap;

    fn lls_from_table(entries: &[((u32, u32), Rat)]) -> LLSSystem {
        let table: BTreeMap<(u32, u32), Rat> = entries.iter().cloned().collect();
        LLSSystem::from_a_table(table, CoeffKind::Exact, None).unwrap()
    }

    fn vdp_lls(eps: Rat) -> LLSSystem {
        lls_from_table(&[
            ((0, 1), eps.clone()),
            ((2, 1), -eps),
            ((1, 0), rat_int(-1)),
        ])
    }

    #[test]
    fn wallis_small_values() {
        assert_eq!(wallis(0, 0), rat_int(1));
        assert_eq!(wallis(0, 1), rat(1, 2));
        assert_eq!(wallis(1, 0), rat(1, 2));
        assert_eq!(wallis(1, 1), rat(1, 8));
        assert_eq!(wallis(0, 2), rat(3, 8));
        assert_eq!(wallis(2, 1), rat(1, 16));
        assert_eq!(wallis(1, 2), rat(1, 16));
        assert_eq!(wallis(3, 1), rat(5, 128));
        assert_eq!(wallis(0, 3), rat(5, 16));
    }

    #[test]
    fn wallis_matches_quadrature() {
        const N: usize = 8192;
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                let mut acc = 0.0;
                for k in 0..N {
                    let theta = 2.0 * PI * k as f64 / N as f64;
                    acc += theta.cos().powi(2 * a as i32) * theta.sin().powi(2 * b as i32);
                }
                let got = acc / N as f64;
                let want = rat_to_f64(&wallis(a, b));
                assert!((got - want).abs() < 1e-12, "W({a},{b}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn vdp_rescaling() {
        let osc = rescale(&vdp_lls(rat(1, 10))).unwrap();
        assert_eq!(osc.sigma(), &rat(1, 10));
        assert_eq!(osc.omega2(), &rat_int(1));
        assert_eq!(osc.eps(), &rat(1, 10));
        assert_eq!(osc.b01_sign(), 1);
        assert_eq!(osc.b_coeff(0, 1), rat_int(1));
        assert_eq!(osc.b_coeff(2, 1), rat_int(-1));
        assert_eq!(osc.b_table().len(), 2);
        assert!(osc.warnings().is_empty());
    }

    #[test]
    fn rychkov_rescaling_and_warning() {
        // damping row A01=-4/5, A21=4, A41=-8/5 from F' = 0.8 - 4x^2 + 1.6x^4
        let lls = lls_from_table(&[
            ((0, 1), rat(-4, 5)),
            ((2, 1), rat_int(4)),
            ((4, 1), rat(-8, 5)),
            ((1, 0), rat_int(-1)),
        ]);
        let osc = rescale(&lls).unwrap();
        assert_eq!(osc.sigma(), &rat(4, 5));
        assert_eq!(osc.b_coeff(0, 1), rat_int(-1));
        assert_eq!(osc.b_coeff(2, 1), rat_int(5));
        assert_eq!(osc.b_coeff(4, 1), rat_int(-2));
        assert_eq!(osc.b01_sign(), -1);
        assert_eq!(osc.eps(), &rat(4, 5));
        assert_eq!(osc.warnings().len(), 1); // eps = 0.8 >= 0.3
    }

    #[test]
    fn center_case_fallback() {
        let lls = lls_from_table(&[((1, 0), rat_int(-2)), ((0, 2), rat(1, 3))]);
        let osc = rescale(&lls).unwrap();
        assert_eq!(osc.sigma(), &rat_int(1));
        assert_eq!(osc.b01_sign(), 0);
        assert!(osc.b_coeff(0, 1).is_zero());
    }

    #[test]
    fn not_oscillatory_rejected() {
        let lls = lls_from_table(&[((1, 0), rat_int(1)), ((0, 1), rat_int(1))]);
        assert!(matches!(
            rescale(&lls),
            Err(Error::NotOscillatory { .. })
        ));
    }

    #[test]
    fn vdp_radial_polynomial() {
        let avg = kb_average(&rescale(&vdp_lls(rat(1, 10))).unwrap());
        // R(rho) = 1/2 - rho/8 at omega = 1
        let want = UniPoly::from_coeffs(vec![rat(1, 2), rat(-1, 8)]);
        assert_eq!(avg.radial_rho(), &want);
        assert!(avg.phase_rho().is_zero());
        // root of R at rho = 4: radius 2
        assert_eq!(avg.radial_rho().eval_rat(&rat_int(4)), rat_int(0));
    }

    #[test]
    fn generic_3x3_matches_closed_form() {
        // dr/dtau = (eps w r/16) [r^2 (B23 r^2 w^2 + 6 B03 w^2 + 2 B21) + 8 B01]
        // dphi/dtau = -(eps r^2/16) (B32 r^2 w^2 + 2 B12 w^2 + 6 B30)
        let sym = kb_symbolic(3, 3);
        let radial: BTreeMap<(u32, u32), (u32, u32, Rat)> = sym
            .radial
            .iter()
            .map(|t| ((t.n, t.m), (t.rho_pow, t.omega_pow, t.weight.clone())))
            .collect();
        assert_eq!(radial.len(), 4);
        assert_eq!(radial[&(0, 1)], (0, 1, rat(1, 2)));
        assert_eq!(radial[&(2, 1)], (1, 1, rat(1, 8)));
        assert_eq!(radial[&(0, 3)], (1, 3, rat(3, 8)));
        assert_eq!(radial[&(2, 3)], (2, 3, rat(1, 16)));
        let phase: BTreeMap<(u32, u32), (u32, u32, Rat)> = sym
            .phase
            .iter()
            .map(|t| ((t.n, t.m), (t.rho_pow, t.omega_pow, t.weight.clone())))
            .collect();
        assert_eq!(phase.len(), 3);
        assert_eq!(phase[&(1, 2)], (1, 2, rat(-1, 8)));
        assert_eq!(phase[&(3, 2)], (2, 2, rat(-1, 16)));
        assert_eq!(phase[&(3, 0)], (1, 0, rat(-3, 8)));
    }

    #[test]
    fn parity_selection_invariance() {
        // perturbing entries with n odd or m even leaves R unchanged;
        // perturbing any restoring entry leaves R unchanged
        let base = lls_from_table(&[
            ((0, 1), rat(1, 2)),
            ((2, 1), rat(-1, 3)),
            ((1, 0), rat_int(-1)),
        ]);
        let r0 = kb_average(&rescale(&base).unwrap()).radial().clone();
        let phase0 = kb_average(&rescale(&base).unwrap()).phase().clone();
        // radial untouched by these:
        for (n, m) in [(1u32, 1u32), (3, 1), (1, 2), (0, 2), (2, 2), (2, 0), (3, 0)] {
            let mut entries = vec![
                ((0, 1), rat(1, 2)),
                ((2, 1), rat(-1, 3)),
                ((1, 0), rat_int(-1)),
            ];
            entries.push(((n, m), rat(7, 5)));
            let avg = kb_average(&rescale(&lls_from_table(&entries)).unwrap());
            assert!(
                avg.radial().same_terms(&r0),
                "radial changed when perturbing B{n}{m}"
            );
        }
        // phase untouched by n-even/m-odd damping and n-even restoring:
        for (n, m) in [(0u32, 3u32), (2, 3), (2, 0)] {
            let mut entries = vec![
                ((0, 1), rat(1, 2)),
                ((2, 1), rat(-1, 3)),
                ((1, 0), rat_int(-1)),
            ];
            entries.push(((n, m), rat(7, 5)));
            let avg = kb_average(&rescale(&lls_from_table(&entries)).unwrap());
            assert!(
                avg.phase().same_terms(&phase0),
                "phase changed when perturbing B{n}{m}"
            );
        }
    }

    #[test]
    fn oracle_agrees_on_vdp() {
        let osc = rescale(&vdp_lls(rat(1, 10))).unwrap();
        let avg = kb_average(&osc);
        // r = 2 is the averaged root
        let (dr, _) = numeric_average_oracle(&osc, 2.0);
        assert!(dr.abs() < 1e-10, "dr at the root: {dr}");
        for r in [0.3, 1.0, 1.7, 2.5] {
            let (dr, dphi) = numeric_average_oracle(&osc, r);
            assert!((dr - avg.radial_rate(r)).abs() < 1e-12);
            assert!((dphi - avg.phase_rate(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_vanishes_at_rychkov_roots() {
        let lls = lls_from_table(&[
            ((0, 1), rat(-4, 5)),
            ((2, 1), rat_int(4)),
            ((4, 1), rat(-8, 5)),
            ((1, 0), rat_int(-1)),
        ]);
        let osc = rescale(&lls).unwrap();
        for r in [1.0, 2.0] {
            let (dr, _) = numeric_average_oracle(&osc, r);
            assert!(dr.abs() < 1e-10, "dr({r}) = {dr}");
        }
    }

    #[test]
    fn oracle_small_radius_limit() {
        // as r -> 0 only the linear damping survives: dr -> eps*omega*B01*r/2
        let osc = rescale(&vdp_lls(rat(1, 10))).unwrap();
        let r = 1e-5;
        let (dr, _) = numeric_average_oracle(&osc, r);
        let want = osc.eps_f64() * osc.omega() * 1.0 * r / 2.0;
        assert!((dr - want).abs() < 1e-12 * (1.0 + want.abs()));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_rat() -> impl Strategy<Value = Rat> {
            (-8i64..=8, 1i64..=4).prop_map(|(n, d)| rat(n, d))
        }

        /// Random table with an oscillatory linear part.
        fn table() -> impl Strategy<Value = Vec<((u32, u32), Rat)>> {
            (
                proptest::collection::vec(((0u32..=5, 0u32..=5), small_rat()), 0..8),
                1i64..=4,
                -8i64..=8,
            )
                .prop_map(|(extra, w2, a01)| {
                    let mut entries: Vec<((u32, u32), Rat)> =
                        vec![((1, 0), rat_int(-w2)), ((0, 1), rat(a01, 2))];
                    for ((n, m), c) in extra {
                        if (n, m) != (0, 0) && (n, m) != (1, 0) && (n, m) != (0, 1) {
                            entries.push(((n, m), c));
                        }
                    }
                    entries
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // the radial equation only sees (n even, m odd) damping
            // entries; the phase only (n odd, m even) damping and odd
            // restoring entries
            #[test]
            fn averaging_respects_parity_selection(entries in table(),
                                                   n in 0u32..=5, m in 0u32..=5,
                                                   delta in small_rat()) {
                prop_assume!((n, m) != (0, 0) && (n, m) != (1, 0) && (n, m) != (0, 1));
                prop_assume!(!delta.is_zero());
                let base = kb_average(&rescale(&lls_from_table(&entries)).unwrap());
                let mut perturbed = entries.clone();
                perturbed.push(((n, m), delta));
                let moved = kb_average(&rescale(&lls_from_table(&perturbed)).unwrap());
                let feeds_radial = m % 2 == 1 && n % 2 == 0;
                let feeds_phase =
                    (m >= 1 && n % 2 == 1 && m % 2 == 0) || (m == 0 && n % 2 == 1);
                if !feeds_radial {
                    prop_assert!(moved.radial().same_terms(base.radial()));
                }
                if !feeds_phase {
                    prop_assert!(moved.phase().same_terms(base.phase()));
                }
            }

            // averaging is linear in the table at fixed normalization
            #[test]
            fn averaging_is_linear_in_the_table(entries in table(),
                                                n in 0u32..=5, m in 1u32..=5,
                                                delta in small_rat()) {
                prop_assume!((n, m) != (0, 1) && (n, m) != (1, 0));
                // the table collapses duplicate keys, so perturb a fresh one
                prop_assume!(!entries.iter().any(|(k, _)| *k == (n, m)));
                let base = kb_average(&rescale(&lls_from_table(&entries)).unwrap());
                let mut perturbed = entries.clone();
                perturbed.push(((n, m), delta.clone()));
                let moved = kb_average(&rescale(&lls_from_table(&perturbed)).unwrap());
                // reconstruct the expected change from the rule directly
                let sigma = rescale(&lls_from_table(&entries)).unwrap().sigma().clone();
                let mut want_radial = base.radial().clone();
                let mut want_phase = base.phase().clone();
                if let Some((target, rho_pow, weight, omega_pow)) = kb_contribution(n, m) {
                    let term = BiPoly::monomial(rho_pow, omega_pow, weight * &delta / &sigma);
                    match target {
                        KbTarget::Radial => want_radial = want_radial.add(&term),
                        KbTarget::Phase => want_phase = want_phase.add(&term),
                    }
                }
                prop_assert!(moved.radial().same_terms(&want_radial));
                prop_assert!(moved.phase().same_terms(&want_phase));
            }
        }
    }

    #[test]
    fn rescaled_equation_is_algebraically_identical() {
        // omega^2 * (-Z - eps h(Z, Zd)) == -F(xi, xid) xid - G(xi)
        // with xi = Z, xid = omega Zd
        let lls = lls_from_table(&[
            ((0, 1), rat(1, 5)),
            ((2, 1), rat(-2, 7)),
            ((1, 2), rat(3, 11)),
            ((0, 3), rat(-1, 3)),
            ((1, 0), rat_int(-3)),
            ((2, 0), rat(1, 2)),
            ((3, 0), rat(-1, 6)),
        ]);
        let osc = rescale(&lls).unwrap();
        let omega = osc.omega();
        let omega2 = omega * omega;
        let eps = osc.eps_f64();
        for (z, zd) in [(0.3, -0.7), (1.1, 0.4), (-0.9, 0.8), (0.05, -1.3)] {
            let lhs = omega2 * (-z - eps * osc.h_eval(z, zd));
            let xi = z;
            let xid = omega * zd;
            let rhs = -lls.f().eval_f64(xi, xid) * xid - lls.g().eval_f64(xi);
            assert!(
                (lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()),
                "mismatch at ({z}, {zd}): {lhs} vs {rhs}"
            );
        }
    }
}
