//! Independent numerical oracle: adaptive Runge-Kutta integration of the
//! original planar system (or its reduced second-order form), limit-cycle
//! detection through a Poincare section, and comparison against the
//! averaged predictions.
//!
//! The integrator is the Dormand-Prince 5(4) embedded pair with the
//! standard fourth-order dense output, which drives event location on the
//! section `{ξ̇ = 0, ξ > 0}` (every nontrivial periodic orbit of these
//! oscillators crosses it). Stable cycles are captured by forward
//! integration; unstable ones by time reversal, which flips their
//! stability in the plane. Neutral orbit families (centers) are screened
//! out by re-running a companion orbit displaced from the candidate
//! amplitude: a genuine attracting cycle pulls it back, a center does not.

use crate::cycles::{CycleReport, Stability};
use crate::error::{Error, Result};
use crate::poly::rat_to_f64;
use crate::reduction::{KineticSystem, LLSSystem, ReductionMap};

/// Time direction of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    TimeReversed,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::TimeReversed => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::TimeReversed => "time-reversed",
        }
    }
}

/// A planar vector field in evaluation-ready form, together with the
/// affine functionals `ξ(x, y)` and `u(x, y) = ξ̇` that define the
/// Poincare section in reduced coordinates. For a system already in LLS
/// form these are just the two state components.
#[derive(Debug, Clone)]
pub struct PlanarField {
    fx: Vec<(i32, i32, f64)>,
    fy: Vec<(i32, i32, f64)>,
    xi_fn: [f64; 3],
    u_fn: [f64; 3],
    seed_x: [f64; 2],
    seed_y: [f64; 2],
    omega: f64,
}

impl PlanarField {
    /// Second-order form integrated as `(ξ, v)` with `v = ξ̇`.
    pub fn from_lls(lls: &LLSSystem) -> Self {
        let fy = lls
            .a_table()
            .iter()
            .map(|((n, m), c)| (*n as i32, *m as i32, rat_to_f64(c)))
            .collect();
        let omega2 = rat_to_f64(&lls.omega_squared());
        PlanarField {
            fx: vec![(0, 1, 1.0)],
            fy,
            xi_fn: [0.0, 1.0, 0.0],
            u_fn: [0.0, 0.0, 1.0],
            seed_x: [0.0, 1.0],
            seed_y: [0.0, 0.0],
            omega: if omega2 > 0.0 { omega2.sqrt() } else { 1.0 },
        }
    }

    /// Original kinetic coordinates, with the section expressed through
    /// the reduction map's forward functionals.
    pub fn from_kinetic(sys: &KineticSystem, map: &ReductionMap, omega: f64) -> Self {
        let conv = |p: &crate::poly::BiPoly| {
            p.to_f64_terms()
                .into_iter()
                .map(|(i, j, c)| (i as i32, j as i32, c))
                .collect::<Vec<_>>()
        };
        let aff = |p: &crate::poly::BiPoly| {
            [
                p.coeff(0, 0),
                p.coeff(1, 0),
                p.coeff(0, 1),
            ]
            .map(|r| rat_to_f64(&r))
        };
        let l = map.l_poly();
        let k = map.k_poly();
        PlanarField {
            fx: conv(&sys.rhs_x()),
            fy: conv(&sys.rhs_y()),
            xi_fn: aff(&map.xi_poly()),
            u_fn: aff(&map.u_poly()),
            seed_x: [rat_to_f64(&l.coeff(0, 0)), rat_to_f64(&l.coeff(1, 0))],
            seed_y: [rat_to_f64(&k.coeff(0, 0)), rat_to_f64(&k.coeff(1, 0))],
            omega: if omega > 0.0 { omega } else { 1.0 },
        }
    }

    #[inline]
    pub fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let eval = |terms: &[(i32, i32, f64)]| -> f64 {
            terms
                .iter()
                .map(|(i, j, c)| c * y[0].powi(*i) * y[1].powi(*j))
                .sum()
        };
        [eval(&self.fx), eval(&self.fy)]
    }

    #[inline]
    pub fn xi(&self, y: [f64; 2]) -> f64 {
        self.xi_fn[0] + self.xi_fn[1] * y[0] + self.xi_fn[2] * y[1]
    }

    #[inline]
    pub fn u(&self, y: [f64; 2]) -> f64 {
        self.u_fn[0] + self.u_fn[1] * y[0] + self.u_fn[2] * y[1]
    }

    /// Initial state on the section at reduced amplitude `r`.
    pub fn seed_state(&self, r: f64) -> [f64; 2] {
        [
            self.seed_x[0] + self.seed_x[1] * r,
            self.seed_y[0] + self.seed_y[1] * r,
        ]
    }

    /// Instantaneous amplitude proxy `sqrt(ξ² + (ξ̇/ω)²)`.
    pub fn radius_proxy(&self, y: [f64; 2]) -> f64 {
        let xi = self.xi(y);
        let u = self.u(y) / self.omega;
        xi.hypot(u)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// One integration request.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub initial: [f64; 2],
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub direction: Direction,
}

impl SimSpec {
    pub fn new(initial: [f64; 2], t_max: f64) -> Self {
        SimSpec {
            initial,
            t_max,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            direction: Direction::Forward,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(Error::InvalidInput("t_max must be positive".into()));
        }
        for tol in [self.rel_tol, self.abs_tol] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidInput(
                    "tolerances must lie in (0, 1e-2]".into(),
                ));
            }
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau (FSAL); the fields here are autonomous, so
// the stage nodes are not needed.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; 2],
    pub y1: [f64; 2],
    cont: [[f64; 5]; 2],
}

impl DenseStep {
    /// Interpolate the state at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut out = [0.0; 2];
        for (i, c) in self.cont.iter().enumerate() {
            out[i] = c[0] + s * (c[1] + s1 * (c[2] + s * (c[3] + s1 * c[4])));
        }
        out
    }
}

/// Integrate `dy/dt = f(y)` with the embedded 5(4) pair, invoking
/// `on_step` after every accepted step; the callback returns `false` to
/// stop early. Integration is in internal time `s ∈ [0, t_max]`; time
/// reversal is applied to the vector field.
fn integrate_steps<F, CB>(
    f: F,
    y_start: [f64; 2],
    t_max: f64,
    rel_tol: f64,
    abs_tol: f64,
    mut on_step: CB,
) -> Result<()>
where
    F: Fn([f64; 2]) -> [f64; 2],
    CB: FnMut(&DenseStep) -> bool,
{
    let mut t = 0.0;
    let mut y = y_start;
    let mut k0 = f(y);
    // conservative initial step from the field scale at the start; the
    // controller adapts within a step or two
    let mut h = {
        let d0 = y[0].hypot(y[1]).max(1e-8);
        let d1 = k0[0].hypot(k0[1]).max(1e-8);
        (0.01 * d0 / d1).clamp(1e-8, (t_max / 10.0).min(0.1))
    };
    let mut facold: f64 = 1e-4;

    while t < t_max {
        if h < 1e-14 * t_max {
            return Err(Error::StepUnderflow { t, h });
        }
        h = h.min(t_max - t);
        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                ys[0] += h * A[stage][j] * kj[0];
                ys[1] += h * A[stage][j] * kj[1];
            }
            k[stage + 1] = f(ys);
        }
        // 5th-order solution is the 6th stage evaluation point (FSAL)
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y1[0] += h * A[5][j] * kj[0];
            y1[1] += h * A[5][j] * kj[1];
        }
        if !(y1[0].is_finite() && y1[1].is_finite()) {
            return Err(Error::NonFiniteState { t });
        }

        let mut err = 0.0;
        for i in 0..2 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum();
            let sc = abs_tol + rel_tol * y[i].abs().max(y1[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();

        // step controller with memory (Hairer's stabilized version)
        let fac11 = err.max(1e-16).powf(0.2);
        let fac = (fac11 / facold.powf(0.04) / 0.9).clamp(0.2, 10.0);
        let h_new = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            // dense output coefficients
            let mut cont = [[0.0; 5]; 2];
            for i in 0..2 {
                let ydiff = y1[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[i][0] = y[i];
                cont[i][1] = ydiff;
                cont[i][2] = bspl;
                cont[i][3] = ydiff - h * k[6][i] - bspl;
                cont[i][4] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            }
            let step = DenseStep {
                t0: t,
                h,
                y0: y,
                y1,
                cont,
            };
            t += h;
            y = y1;
            k0 = k[6]; // FSAL
            if !on_step(&step) {
                return Ok(());
            }
            h = h_new;
        } else {
            h /= fac.max(1.0); // shrink only after a rejection
        }
    }
    Ok(())
}

/// A computed orbit: accepted-step samples plus the dense interpolants.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `(t, state)` at accepted step endpoints, strictly increasing `t`.
    pub samples: Vec<(f64, [f64; 2])>,
    pub dense: Vec<DenseStep>,
}

impl Trajectory {
    pub fn final_state(&self) -> [f64; 2] {
        self.samples.last().map(|(_, y)| *y).unwrap_or([0.0; 2])
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|(t, _)| *t).unwrap_or(0.0)
    }

    /// Dense evaluation at any time in the integrated range.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        match self
            .dense
            .binary_search_by(|s| s.t0.partial_cmp(&t).unwrap())
        {
            Ok(i) => self.dense[i].eval(t),
            Err(0) => self.dense[0].eval(t),
            Err(i) => self.dense[i - 1].eval(t),
        }
    }
}

/// Integrate per `spec` and collect the trajectory.
pub fn integrate(field: &PlanarField, spec: &SimSpec) -> Result<Trajectory> {
    spec.validate()?;
    let sign = spec.direction.sign();
    let f = |y: [f64; 2]| {
        let v = field.rhs(y);
        [sign * v[0], sign * v[1]]
    };
    let mut traj = Trajectory {
        samples: vec![(0.0, spec.initial)],
        dense: Vec::new(),
    };
    integrate_steps(
        f,
        spec.initial,
        spec.t_max,
        spec.rel_tol,
        spec.abs_tol,
        |step| {
            traj.samples.push((step.t0 + step.h, step.y1));
            traj.dense.push(*step);
            true
        },
    )?;
    Ok(traj)
}

/// Detection configuration. Defaults follow the toolkit conventions:
/// convergence when 5 consecutive section crossings agree to `rel_tol`,
/// with a hard cap of 2000 crossings.
#[derive(Debug, Clone)]
pub struct DetectSettings {
    pub rel_tol: f64,
    pub consecutive: usize,
    pub max_crossings: usize,
    pub t_max: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// Amplitudes below this count as decay into the origin.
    pub origin_tol: f64,
    pub escape_radius: f64,
    /// Re-run a displaced companion orbit to reject neutral orbit families.
    pub validate_attracting: bool,
}

impl Default for DetectSettings {
    fn default() -> Self {
        DetectSettings {
            rel_tol: 1e-6,
            consecutive: 5,
            max_crossings: 2000,
            t_max: 3000.0,
            ode_rel_tol: 1e-6,
            ode_abs_tol: 1e-9,
            origin_tol: 1e-3,
            escape_radius: 1e6,
            validate_attracting: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStatus {
    Converged,
    NoConvergence,
    SpiraledToOrigin,
    Diverged,
    /// Crossing amplitudes settled but a displaced companion orbit did not
    /// return: a neutral (center-type) orbit family, not a cycle.
    NeutralOrbit,
}

impl SeedStatus {
    pub fn name(self) -> &'static str {
        match self {
            SeedStatus::Converged => "converged",
            SeedStatus::NoConvergence => "no-convergence",
            SeedStatus::SpiraledToOrigin => "spiraled-to-origin",
            SeedStatus::Diverged => "diverged",
            SeedStatus::NeutralOrbit => "neutral-orbit",
        }
    }
}

/// Outcome of one `(seed, direction)` run.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: f64,
    pub direction: Direction,
    pub status: SeedStatus,
    pub amplitude: Option<f64>,
}

/// A numerically confirmed limit cycle.
#[derive(Debug, Clone)]
pub struct DetectedCycle {
    /// `ξ` at the converged section crossing (the orbit's maximal `ξ`).
    pub amplitude: f64,
    /// Period-averaged amplitude proxy `sqrt(ξ² + (ξ̇/ω)²)`.
    pub radius_mean: f64,
    pub period: f64,
    pub stability: Stability,
    pub converged: bool,
    pub direction_found: Direction,
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub cycles: Vec<DetectedCycle>,
    pub outcomes: Vec<SeedOutcome>,
    pub warnings: Vec<String>,
}

struct OrbitRun {
    status: SeedStatus,
    amplitude: Option<f64>,
    period: Option<f64>,
    state_at_crossing: Option<[f64; 2]>,
}

struct Candidate {
    amplitude: f64,
    direction: Direction,
    period: Option<f64>,
    state: Option<[f64; 2]>,
}

/// Follow one orbit, recording downward crossings of `{u = 0, ξ > 0}` and
/// watching the amplitude sequence for convergence.
fn run_orbit(
    field: &PlanarField,
    start: [f64; 2],
    direction: Direction,
    settings: &DetectSettings,
) -> Result<OrbitRun> {
    let sign = direction.sign();
    let f = |y: [f64; 2]| {
        let v = field.rhs(y);
        [sign * v[0], sign * v[1]]
    };
    let mut amps: Vec<f64> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    let mut state_at: Option<[f64; 2]> = None;
    let mut status = SeedStatus::NoConvergence;
    let mut amplitude = None;
    let mut period = None;

    integrate_steps(
        f,
        start,
        settings.t_max,
        settings.ode_rel_tol,
        settings.ode_abs_tol,
        |step| {
            let y1 = step.y1;
            if y1[0].hypot(y1[1]) > settings.escape_radius {
                status = SeedStatus::Diverged;
                return false;
            }
            // in reduced coordinates the forward flow crosses the section
            // {u = 0, ξ > 0} downward (ξ̇ = u turns clockwise); a reversed
            // run traverses the same orbit the other way
            let u0 = field.u(step.y0);
            let u1 = field.u(y1);
            let crossing = match direction {
                Direction::Forward => u0 > 0.0 && u1 <= 0.0,
                Direction::TimeReversed => u0 < 0.0 && u1 >= 0.0,
            };
            if crossing {
                // bracketing bisection on the dense output, tolerance in t
                let mut lo = step.t0;
                let mut hi = step.t0 + step.h;
                for _ in 0..60 {
                    if hi - lo <= 1e-10 {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if (field.u(step.eval(mid)) > 0.0) == (u0 > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_star = 0.5 * (lo + hi);
                let y_star = step.eval(t_star);
                let xi = field.xi(y_star);
                if xi > 0.0 {
                    amps.push(xi);
                    times.push(t_star);
                    if xi < settings.origin_tol {
                        status = SeedStatus::SpiraledToOrigin;
                        return false;
                    }
                    if amps.len() >= settings.consecutive {
                        let window = &amps[amps.len() - settings.consecutive..];
                        let max = window.iter().cloned().fold(f64::MIN, f64::max);
                        let min = window.iter().cloned().fold(f64::MAX, f64::min);
                        if max - min <= settings.rel_tol * max.abs().max(1e-12) {
                            status = SeedStatus::Converged;
                            amplitude = Some(*amps.last().unwrap());
                            period = (times.len() >= 2)
                                .then(|| times[times.len() - 1] - times[times.len() - 2]);
                            state_at = Some(y_star);
                            return false;
                        }
                    }
                    if amps.len() >= settings.max_crossings {
                        status = SeedStatus::NoConvergence;
                        return false;
                    }
                }
            }
            true
        },
    )
    .or_else(|e| match e {
        // finite-time blow-up (overflow, or the step collapsing while
        // chasing it) is a divergence outcome, not a failure
        Error::NonFiniteState { .. } | Error::StepUnderflow { .. } => {
            status = SeedStatus::Diverged;
            Ok(())
        }
        other => Err(other),
    })?;

    Ok(OrbitRun {
        status,
        amplitude,
        period,
        state_at_crossing: state_at,
    })
}

/// Period-average of the amplitude proxy over one cycle starting at a
/// crossing state.
fn mean_radius(
    field: &PlanarField,
    start: [f64; 2],
    direction: Direction,
    period: f64,
    settings: &DetectSettings,
) -> Result<f64> {
    let spec = SimSpec {
        initial: start,
        t_max: period,
        rel_tol: settings.ode_rel_tol,
        abs_tol: settings.ode_abs_tol,
        direction,
    };
    let traj = integrate(field, &spec)?;
    const SAMPLES: usize = 256;
    let mut acc = 0.0;
    for k in 0..SAMPLES {
        let t = period * k as f64 / SAMPLES as f64;
        acc += field.radius_proxy(traj.eval(t));
    }
    Ok(acc / SAMPLES as f64)
}

/// Scan the seed amplitudes in both time directions, deduplicate the
/// converged crossings, and validate that each candidate actually
/// attracts (in its detection direction) before reporting it as a cycle.
pub fn detect_limit_cycles(
    field: &PlanarField,
    seed_radii: &[f64],
    settings: &DetectSettings,
) -> Result<Detection> {
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();

    for &seed in seed_radii {
        for direction in [Direction::Forward, Direction::TimeReversed] {
            let run = run_orbit(field, field.seed_state(seed), direction, settings)?;
            let mut status = run.status;
            if status == SeedStatus::Converged {
                let amp = run.amplitude.unwrap();
                if settings.validate_attracting {
                    let displaced = field.seed_state(amp * 1.05);
                    let companion = run_orbit(field, displaced, direction, settings)?;
                    match (companion.status, companion.amplitude) {
                        (SeedStatus::Converged, Some(a2))
                            if (a2 - amp).abs() > 0.02 * amp.abs() =>
                        {
                            status = SeedStatus::NeutralOrbit;
                        }
                        (SeedStatus::Converged, _) => {}
                        _ => {
                            warnings.push(format!(
                                "companion orbit from {:.4} did not settle; keeping cycle at \
                                 amplitude {:.4} unvalidated",
                                amp * 1.05,
                                amp
                            ));
                        }
                    }
                }
                if status == SeedStatus::Converged {
                    candidates.push(Candidate {
                        amplitude: amp,
                        direction,
                        period: run.period,
                        state: run.state_at_crossing,
                    });
                }
            }
            outcomes.push(SeedOutcome {
                seed,
                direction,
                status,
                amplitude: run.amplitude,
            });
        }
    }

    // deduplicate converged amplitudes (same cycle reached from several
    // seeds agrees to the convergence tolerance)
    candidates.sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).unwrap());
    let mut cycles: Vec<DetectedCycle> = Vec::new();
    for cand in candidates {
        let amp = cand.amplitude;
        let dup = cycles
            .iter()
            .any(|c| (c.amplitude - amp).abs() <= 1e-3 * amp.abs().max(1e-12));
        if dup {
            continue;
        }
        let period = cand.period.unwrap_or(0.0);
        let radius_mean = match cand.state {
            Some(y) if period > 0.0 => {
                mean_radius(field, y, cand.direction, period, settings).unwrap_or(amp)
            }
            _ => amp,
        };
        cycles.push(DetectedCycle {
            amplitude: amp,
            radius_mean,
            period,
            stability: match cand.direction {
                Direction::Forward => Stability::Stable,
                Direction::TimeReversed => Stability::Unstable,
            },
            converged: true,
            direction_found: cand.direction,
        });
    }

    Ok(Detection {
        cycles,
        outcomes,
        warnings,
    })
}

/// One predicted/detected pairing.
#[derive(Debug, Clone)]
pub struct CycleMatch {
    pub predicted_radius: f64,
    pub detected_amplitude: f64,
    pub rel_err: f64,
    pub agreed: bool,
}

/// Result of comparing the averaged prediction with the detector.
#[derive(Debug, Clone)]
pub struct KbComparison {
    pub tolerance: f64,
    pub matches: Vec<CycleMatch>,
    pub unmatched_predicted: Vec<f64>,
    pub unmatched_detected: Vec<f64>,
    pub all_agreed: bool,
}

/// Greedily pair predicted radii with detected amplitudes by relative
/// proximity; agreement within `max(5 ε, 5%)` (first-order averaging is
/// accurate to `O(ε)`).
pub fn compare_with_kb(
    report: &CycleReport,
    detected: &[DetectedCycle],
    eps: f64,
) -> KbComparison {
    let tolerance = (5.0 * eps).max(0.05);
    let mut pred: Vec<f64> = report.cycles.iter().map(|c| c.radius).collect();
    let mut det: Vec<f64> = detected.iter().map(|c| c.amplitude).collect();
    let mut matches = Vec::new();
    while !pred.is_empty() && !det.is_empty() {
        let mut best = (0usize, 0usize, f64::INFINITY);
        for (i, p) in pred.iter().enumerate() {
            for (j, d) in det.iter().enumerate() {
                let rel = (p - d).abs() / p.abs().max(1e-12);
                if rel < best.2 {
                    best = (i, j, rel);
                }
            }
        }
        let (i, j, rel) = best;
        matches.push(CycleMatch {
            predicted_radius: pred.remove(i),
            detected_amplitude: det.remove(j),
            rel_err: rel,
            agreed: rel < tolerance,
        });
        if rel >= tolerance {
            // remaining pairs can only be worse for this pairing strategy
        }
    }
    let all_agreed =
        pred.is_empty() && det.is_empty() && matches.iter().all(|m| m.agreed);
    KbComparison {
        tolerance,
        matches,
        unmatched_predicted: pred,
        unmatched_detected: det,
        all_agreed,
    }
}
