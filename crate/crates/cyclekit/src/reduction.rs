//! Reduction of a planar kinetic system
//!
//! ```text
//! dx/dt = a0 + a1 x + a2 y + f(x,y)
//! dy/dt = b0 + b1 x + b2 y + g(x,y)
//! ```
//!
//! to the generalized Lienard (LLS) form `ξ̈ + F(ξ,ξ̇)ξ̇ + G(ξ) = 0` via the
//! linear pair `ξ = β1(x−xs) + β2(y−ys)`, `u = ξ̇`. The construction needs
//! the nonlinear parts to be proportional (`g = μ·f`, or `f ≡ 0`), so that
//! a weight choice with `β1 f + β2 g = 0` keeps `u` affine in `(x, y)`.
//!
//! The reduced equation is assembled as a coefficient table `A[n][m]` of
//! `ξ̈ = Σ A_nm ξ^n ξ̇^m` from which the damping `F` and restoring `G`
//! polynomials are read off. Everything stays in exact rational arithmetic;
//! numerically located fixed points are converted to exact dyadic rationals
//! and only relax the `A00 = 0` consistency check to a tolerance.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{rat_from_f64, rat_to_f64, BiPoly, CoeffKind, Rat, UniPoly};

/// Absolute tolerance on the residual constant term `A00` when the fixed
/// point came through floating point.
pub const A00_FLOAT_TOL: f64 = 1e-12;

/// Planar autonomous kinetic system with proportional nonlinearities.
#[derive(Debug, Clone)]
pub struct KineticSystem {
    a: [Rat; 3],
    b: [Rat; 3],
    f: BiPoly,
    g: BiPoly,
    /// `g = mu * f`; `None` for the mirrored branch `f ≡ 0, g ≠ 0`.
    mu: Option<Rat>,
}

impl KineticSystem {
    /// Build from `f` and the proportionality constant, setting `g = mu*f`.
    /// Rejects constant/linear terms in `f` (fold those into `a`, `b`), use
    /// [`KineticSystem::new_with_affine_f`] to opt in.
    pub fn new(a: [Rat; 3], b: [Rat; 3], f: BiPoly, mu: Rat) -> Result<Self> {
        Self::check_affine_free(&f)?;
        Ok(Self::new_with_affine_f(a, b, f, mu))
    }

    pub fn new_with_affine_f(a: [Rat; 3], b: [Rat; 3], f: BiPoly, mu: Rat) -> Self {
        let g = f.scale(&mu);
        KineticSystem {
            a,
            b,
            f,
            g,
            mu: Some(mu),
        }
    }

    /// Build from both nonlinear parts, inferring `mu` from `g = mu*f`.
    /// Fails with [`Error::NotProportional`] when no such constant exists.
    pub fn with_g(a: [Rat; 3], b: [Rat; 3], f: BiPoly, g: BiPoly) -> Result<Self> {
        Self::check_affine_free(&f)?;
        Self::check_affine_free(&g)?;
        let mu = if f.is_zero() {
            if g.is_zero() {
                Some(Rat::zero())
            } else {
                None
            }
        } else {
            // mu = leading ratio, then verify g == mu*f exactly
            let ((i, j), fc) = f.terms().next().expect("nonzero");
            let gc = g.coeff(*i, *j);
            let mu = gc / fc;
            if !g.same_terms(&f.scale(&mu)) {
                return Err(Error::NotProportional);
            }
            Some(mu)
        };
        Ok(KineticSystem { a, b, f, g, mu })
    }

    fn check_affine_free(p: &BiPoly) -> Result<()> {
        let offenders: Vec<String> = p
            .terms()
            .filter(|((i, j), _)| i + j <= 1)
            .map(|((i, j), c)| format!("{}*x^{}*y^{}", c, i, j))
            .collect();
        if offenders.is_empty() {
            Ok(())
        } else {
            Err(Error::AffineTermsInF(offenders.join(", ")))
        }
    }

    pub fn a(&self) -> &[Rat; 3] {
        &self.a
    }

    pub fn b(&self) -> &[Rat; 3] {
        &self.b
    }

    pub fn f(&self) -> &BiPoly {
        &self.f
    }

    pub fn g(&self) -> &BiPoly {
        &self.g
    }

    pub fn mu(&self) -> Option<&Rat> {
        self.mu.as_ref()
    }

    pub fn kind(&self) -> CoeffKind {
        self.f.kind().combine(self.g.kind())
    }

    /// Full right-hand side of the `x` equation as a polynomial.
    pub fn rhs_x(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((0, 0), self.a[0].clone()),
            ((1, 0), self.a[1].clone()),
            ((0, 1), self.a[2].clone()),
        ])
        .add(&self.f)
    }

    /// Full right-hand side of the `y` equation as a polynomial.
    pub fn rhs_y(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((0, 0), self.b[0].clone()),
            ((1, 0), self.b[1].clone()),
            ((0, 1), self.b[2].clone()),
        ])
        .add(&self.g)
    }

    /// Jacobian matrix of the vector field as polynomials,
    /// row-major `[[∂ẋ/∂x, ∂ẋ/∂y], [∂ẏ/∂x, ∂ẏ/∂y]]`.
    pub fn jacobian_polys(&self) -> [[BiPoly; 2]; 2] {
        let rx = self.rhs_x();
        let ry = self.rhs_y();
        [[rx.dx(), rx.dy()], [ry.dx(), ry.dy()]]
    }
}

/// Rectangular search region for the fixed-point scan.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SearchBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidInput(
                "search box must have positive extent".into(),
            ));
        }
        Ok(SearchBox {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn centered(half: f64) -> Self {
        SearchBox {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
        }
    }
}

/// A located equilibrium with its local linearization.
#[derive(Debug, Clone)]
pub struct FixedPointInfo {
    pub x: f64,
    pub y: f64,
    /// Exact coordinates when known in closed form (zoo models, origin).
    pub exact: Option<(Rat, Rat)>,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: (Complex64, Complex64),
    pub trace: f64,
    pub determinant: f64,
    /// Max abs value of the two right-hand sides at the point.
    pub residual: f64,
    pub singular_jacobian: bool,
}

impl FixedPointInfo {
    /// Assemble the linearization data at `(x, y)`.
    pub fn at_point(sys: &KineticSystem, x: f64, y: f64, exact: Option<(Rat, Rat)>) -> Self {
        let jp = sys.jacobian_polys();
        let j = [
            [jp[0][0].eval_f64(x, y), jp[0][1].eval_f64(x, y)],
            [jp[1][0].eval_f64(x, y), jp[1][1].eval_f64(x, y)],
        ];
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = trace * trace - 4.0 * det;
        let eigenvalues = if disc >= 0.0 {
            let s = disc.sqrt();
            (
                Complex64::new((trace + s) / 2.0, 0.0),
                Complex64::new((trace - s) / 2.0, 0.0),
            )
        } else {
            let s = (-disc).sqrt();
            (
                Complex64::new(trace / 2.0, s / 2.0),
                Complex64::new(trace / 2.0, -s / 2.0),
            )
        };
        let scale = 1.0 + j.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        let residual = sys
            .rhs_x()
            .eval_f64(x, y)
            .abs()
            .max(sys.rhs_y().eval_f64(x, y).abs());
        FixedPointInfo {
            x,
            y,
            exact,
            jacobian: j,
            eigenvalues,
            trace,
            determinant: det,
            residual,
            singular_jacobian: det.abs() < 1e-12 * scale * scale,
        }
    }

    /// Fixed point given in closed form; verifies the residual vanishes
    /// exactly.
    pub fn from_exact(sys: &KineticSystem, xs: Rat, ys: Rat) -> Result<Self> {
        let rx = sys.rhs_x().eval_rat(&xs, &ys);
        let ry = sys.rhs_y().eval_rat(&xs, &ys);
        if !rx.is_zero() || !ry.is_zero() {
            return Err(Error::InvalidInput(format!(
                "({xs}, {ys}) is not a fixed point: residuals ({rx}, {ry})"
            )));
        }
        Ok(Self::at_point(
            sys,
            rat_to_f64(&xs),
            rat_to_f64(&ys),
            Some((xs, ys)),
        ))
    }

    /// A saddle has real eigenvalues of opposite sign (negative determinant).
    pub fn is_saddle(&self) -> bool {
        self.determinant < 0.0
    }

    /// Complex eigenvalue pair: the linearization rotates.
    pub fn is_oscillatory(&self) -> bool {
        self.eigenvalues.0.im != 0.0
    }

    /// Exact coordinates, falling back to the dyadic value of the floats.
    pub fn coords_rat(&self) -> (Rat, Rat) {
        match &self.exact {
            Some((xs, ys)) => (xs.clone(), ys.clone()),
            None => (
                rat_from_f64(self.x).expect("finite"),
                rat_from_f64(self.y).expect("finite"),
            ),
        }
    }

    pub fn kind(&self) -> CoeffKind {
        if self.exact.is_some() {
            CoeffKind::Exact
        } else {
            CoeffKind::Float
        }
    }
}

/// Locate fixed points by damped Newton iteration from a `seeds_per_axis`
/// square grid over `search_box` (plus a small deterministic jitter derived
/// from `seed`), deduplicated within tolerance.
pub fn find_fixed_points(
    sys: &KineticSystem,
    search_box: SearchBox,
    seeds_per_axis: usize,
    seed: u64,
) -> Result<Vec<FixedPointInfo>> {
    if seeds_per_axis < 2 {
        return Err(Error::InvalidInput("seeds_per_axis must be >= 2".into()));
    }
    let rx = sys.rhs_x().to_f64_terms();
    let ry = sys.rhs_y().to_f64_terms();
    let jp = sys.jacobian_polys();
    let jf: Vec<Vec<(u32, u32, f64)>> = jp.iter().flatten().map(|p| p.to_f64_terms()).collect();
    let eval = |terms: &[(u32, u32, f64)], x: f64, y: f64| -> f64 {
        terms
            .iter()
            .map(|(i, j, c)| c * x.powi(*i as i32) * y.powi(*j as i32))
            .sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dx = (search_box.x_max - search_box.x_min) / (seeds_per_axis - 1) as f64;
    let dy = (search_box.y_max - search_box.y_min) / (seeds_per_axis - 1) as f64;
    let mut found: Vec<(f64, f64)> = Vec::new();

    for ix in 0..seeds_per_axis {
        for iy in 0..seeds_per_axis {
            let jx: f64 = rng.gen_range(-0.25..0.25);
            let jy: f64 = rng.gen_range(-0.25..0.25);
            let mut x = search_box.x_min + ix as f64 * dx + jx * dx;
            let mut y = search_box.y_min + iy as f64 * dy + jy * dy;
            let mut converged = false;
            for _ in 0..60 {
                let r1 = eval(&rx, x, y);
                let r2 = eval(&ry, x, y);
                let rnorm = r1.hypot(r2);
                if rnorm < 1e-13 * (1.0 + x.abs() + y.abs()) {
                    converged = true;
                    break;
                }
                let j11 = eval(&jf[0], x, y);
                let j12 = eval(&jf[1], x, y);
                let j21 = eval(&jf[2], x, y);
                let j22 = eval(&jf[3], x, y);
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-14 * (1.0 + j11.abs() + j12.abs() + j21.abs() + j22.abs()) {
                    break; // singular Jacobian along the way: abandon seed
                }
                let sx = -(j22 * r1 - j12 * r2) / det;
                let sy = -(-j21 * r1 + j11 * r2) / det;
                // backtracking line search on the residual norm
                let mut t = 1.0;
                let mut accepted = false;
                for _ in 0..30 {
                    let nx = x + t * sx;
                    let ny = y + t * sy;
                    let nn = eval(&rx, nx, ny).hypot(eval(&ry, nx, ny));
                    if nn < rnorm || nn < 1e-13 {
                        x = nx;
                        y = ny;
                        accepted = true;
                        break;
                    }
                    t /= 2.0;
                }
                if !accepted || !x.is_finite() || !y.is_finite() {
                    break;
                }
            }
            if converged && x.is_finite() && y.is_finite() {
                let dup = found
                    .iter()
                    .any(|(px, py)| (px - x).hypot(py - y) < 1e-8 * (1.0 + x.abs() + y.abs()));
                if !dup {
                    found.push((x, y));
                }
            }
        }
    }

    if found.is_empty() {
        return Err(Error::NoFixedPointFound);
    }
    found.sort_by(|p, q| p.partial_cmp(q).unwrap());
    Ok(found
        .into_iter()
        .map(|(x, y)| {
            // snap tiny coordinates to exact zero (common case: origin)
            let xs = if x.abs() < 1e-13 { 0.0 } else { x };
            let ys = if y.abs() < 1e-13 { 0.0 } else { y };
            let exact = if xs == 0.0 && ys == 0.0 {
                let ok = sys.rhs_x().coeff(0, 0).is_zero() && sys.rhs_y().coeff(0, 0).is_zero();
                ok.then(|| (Rat::zero(), Rat::zero()))
            } else {
                None
            };
            FixedPointInfo::at_point(sys, xs, ys, exact)
        })
        .collect())
}

/// Coefficients of the affine transform pair and its inverse.
///
/// Forward: `ξ = β0 + β1 x + β2 y`, `u = α0 + α1 x + α2 y`.
/// Inverse: `x = c1 ξ + c2 u + cl = L(ξ,u)`, `y = c3 ξ + c4 u + ck = K(ξ,u)`.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    pub beta: [Rat; 3],
    pub alpha: [Rat; 3],
    pub c1: Rat,
    pub c2: Rat,
    pub cl: Rat,
    pub c3: Rat,
    pub c4: Rat,
    pub ck: Rat,
    pub det: Rat,
    pub kind: CoeffKind,
}

impl ReductionMap {
    /// `L(ξ, u)` as a polynomial in `(ξ, u)`.
    pub fn l_poly(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((1, 0), self.c1.clone()),
            ((0, 1), self.c2.clone()),
            ((0, 0), self.cl.clone()),
        ])
        .with_kind(self.kind)
    }

    /// `K(ξ, u)` as a polynomial in `(ξ, u)`.
    pub fn k_poly(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((1, 0), self.c3.clone()),
            ((0, 1), self.c4.clone()),
            ((0, 0), self.ck.clone()),
        ])
        .with_kind(self.kind)
    }

    /// `ξ(x, y)` as a polynomial in `(x, y)`.
    pub fn xi_poly(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((0, 0), self.beta[0].clone()),
            ((1, 0), self.beta[1].clone()),
            ((0, 1), self.beta[2].clone()),
        ])
        .with_kind(self.kind)
    }

    /// `u(x, y)` as a polynomial in `(x, y)`.
    pub fn u_poly(&self) -> BiPoly {
        BiPoly::from_terms(vec![
            ((0, 0), self.alpha[0].clone()),
            ((1, 0), self.alpha[1].clone()),
            ((0, 1), self.alpha[2].clone()),
        ])
        .with_kind(self.kind)
    }

    pub fn to_xi(&self, x: f64, y: f64) -> (f64, f64) {
        (self.xi_poly().eval_f64(x, y), self.u_poly().eval_f64(x, y))
    }

    pub fn from_xi(&self, xi: f64, u: f64) -> (f64, f64) {
        (self.l_poly().eval_f64(xi, u), self.k_poly().eval_f64(xi, u))
    }
}

/// Choose the weights `(β1, β2)` and assemble the transform around `fp`.
///
/// With `g = μ f` the normalization `β2 = 1, β1 = −μ` is the unique choice
/// (up to scale) with `β1 f + β2 g = 0`, so `u = ξ̇` stays affine. The
/// mirrored branch `f ≡ 0, g ≠ 0` forces `β = (1, 0)`. For purely linear
/// systems the default is tried first, then a few fallback weights.
pub fn build_reduction_map(sys: &KineticSystem, fp: &FixedPointInfo) -> Result<ReductionMap> {
    let is_nonlinear = !sys.f().is_zero() || !sys.g().is_zero();
    let default_beta: (Rat, Rat) = match sys.mu() {
        Some(mu) => (-mu.clone(), Rat::one()),
        None => (Rat::one(), Rat::zero()),
    };
    let mut candidates = vec![default_beta];
    if !is_nonlinear {
        candidates.push((Rat::one(), Rat::zero()));
        candidates.push((Rat::zero(), Rat::one()));
        candidates.push((Rat::one(), Rat::one()));
        candidates.push((Rat::one(), -Rat::one()));
    }

    let (xs, ys) = fp.coords_rat();
    let kind = sys.kind().combine(fp.kind());

    for (b1, b2) in candidates {
        let alpha1 = &b1 * &sys.a[1] + &b2 * &sys.b[1];
        let alpha2 = &b1 * &sys.a[2] + &b2 * &sys.b[2];
        let alpha0 = &b1 * &sys.a[0] + &b2 * &sys.b[0];
        let det = &alpha1 * &b2 - &alpha2 * &b1;
        if det.is_zero() {
            continue;
        }
        let beta0 = -(&b1 * &xs + &b2 * &ys);
        let c1 = -&alpha2 / &det;
        let c2 = &b2 / &det;
        let cl = (&alpha2 * &beta0 - &alpha0 * &b2) / &det;
        let c3 = &alpha1 / &det;
        let c4 = -&b1 / &det;
        let ck = (&alpha0 * &b1 - &alpha1 * &beta0) / &det;
        return Ok(ReductionMap {
            beta: [beta0, b1, b2],
            alpha: [alpha0, alpha1, alpha2],
            c1,
            c2,
            cl,
            c3,
            c4,
            ck,
            det,
            kind,
        });
    }

    if is_nonlinear {
        Err(Error::NotReducible(
            "the proportionality-compatible weights give a degenerate transform".into(),
        ))
    } else {
        Err(Error::DegenerateTransform)
    }
}

/// Structural class of an LLS system, decided by the zero-pattern of the
/// coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlsClass {
    /// Damping depends on both position and velocity (or restoring has
    /// velocity-coupled terms).
    GeneralLls,
    /// Velocity-only damping with linear restoring: nonzero entries are
    /// `A_0m` and `A_10` only.
    Rayleigh,
    /// Position-only damping: `A_nm = 0` for all `m ≥ 2`.
    Lienard,
}

impl LlsClass {
    pub fn name(self) -> &'static str {
        match self {
            LlsClass::GeneralLls => "general-lls",
            LlsClass::Rayleigh => "rayleigh",
            LlsClass::Lienard => "lienard",
        }
    }
}

/// The reduced second-order equation `ξ̈ + F(ξ,ξ̇)ξ̇ + G(ξ) = 0`, stored as
/// the coefficient table of `ξ̈ = Σ A_nm ξ^n ξ̇^m`.
#[derive(Debug, Clone)]
pub struct LLSSystem {
    a: BTreeMap<(u32, u32), Rat>,
    kind: CoeffKind,
    n_max: u32,
    m_max: u32,
    f: BiPoly,
    g: UniPoly,
    class: LlsClass,
    /// Eigenvalues of the linearization at the origin (inherited from the
    /// source fixed point when the system came out of a reduction).
    eigenvalues: (Complex64, Complex64),
}

impl LLSSystem {
    /// Build from the coefficient table of `ξ̈ = Σ A_nm ξ^n ξ̇^m`.
    /// The constant entry must vanish (exactly for exact input, within
    /// [`A00_FLOAT_TOL`] for float-derived input).
    pub fn from_a_table(
        table: BTreeMap<(u32, u32), Rat>,
        kind: CoeffKind,
        eigenvalues: Option<(Complex64, Complex64)>,
    ) -> Result<Self> {
        let mut a: BTreeMap<(u32, u32), Rat> =
            table.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if let Some(a00) = a.remove(&(0, 0)) {
            let resid = rat_to_f64(&a00).abs();
            let ok = match kind {
                CoeffKind::Exact => a00.is_zero(),
                CoeffKind::Float => resid <= A00_FLOAT_TOL,
            };
            if !ok {
                return Err(Error::FixedPointNotShifted {
                    residual: resid,
                    tol: if kind == CoeffKind::Exact {
                        0.0
                    } else {
                        A00_FLOAT_TOL
                    },
                });
            }
        }
        let n_max = a.keys().map(|(n, _)| *n).max().unwrap_or(0);
        let m_max = a.keys().map(|(_, m)| *m).max().unwrap_or(0);

        let mut f = BiPoly::zero().with_kind(kind);
        let mut g_coeffs = vec![Rat::zero(); n_max as usize + 1];
        for ((n, m), c) in &a {
            if *m >= 1 {
                f = f.add(&BiPoly::monomial(*n, m - 1, -c.clone()).with_kind(kind));
            } else {
                g_coeffs[*n as usize] = -c.clone();
            }
        }
        let g = UniPoly::from_coeffs(g_coeffs);

        let class = Self::classify_table(&a);
        let eigenvalues = eigenvalues.unwrap_or_else(|| {
            // linearization ξ̈ = A01 ξ̇ + A10 ξ
            let tr = a.get(&(0, 1)).map(rat_to_f64).unwrap_or(0.0);
            let det = -a.get(&(1, 0)).map(rat_to_f64).unwrap_or(0.0);
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                (
                    Complex64::new((tr + s) / 2.0, 0.0),
                    Complex64::new((tr - s) / 2.0, 0.0),
                )
            } else {
                let s = (-disc).sqrt();
                (
                    Complex64::new(tr / 2.0, s / 2.0),
                    Complex64::new(tr / 2.0, -s / 2.0),
                )
            }
        });

        Ok(LLSSystem {
            a,
            kind,
            n_max,
            m_max,
            f,
            g,
            class,
            eigenvalues,
        })
    }

    /// Build directly from a damping polynomial `F(ξ, ξ̇)` and restoring
    /// polynomial `G(ξ)` (inverting the sign convention of the table).
    pub fn from_damping_restoring(f: &BiPoly, g: &UniPoly) -> Result<Self> {
        let mut table = BTreeMap::new();
        for ((n, m), c) in f.terms() {
            table.insert((*n, m + 1), -c.clone());
        }
        for (k, c) in g.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let e = table.entry((k as u32, 0)).or_insert_with(Rat::zero);
                *e -= c;
            }
        }
        Self::from_a_table(table, f.kind(), None)
    }

    fn classify_table(a: &BTreeMap<(u32, u32), Rat>) -> LlsClass {
        let lienard = a.keys().all(|(_, m)| *m <= 1);
        if lienard {
            return LlsClass::Lienard;
        }
        let rayleigh = a.keys().all(|(n, m)| *n == 0 || (*n, *m) == (1, 0));
        if rayleigh {
            LlsClass::Rayleigh
        } else {
            LlsClass::GeneralLls
        }
    }

    pub fn a_table(&self) -> &BTreeMap<(u32, u32), Rat> {
        &self.a
    }

    pub fn a_coeff(&self, n: u32, m: u32) -> Rat {
        self.a.get(&(n, m)).cloned().unwrap_or_else(Rat::zero)
    }

    /// Maximal power of `ξ` appearing in the equation.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Maximal power of `ξ̇` appearing in the equation.
    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// Damping polynomial `F(ξ, ξ̇)`.
    pub fn f(&self) -> &BiPoly {
        &self.f
    }

    /// Restoring polynomial `G(ξ)`.
    pub fn g(&self) -> &UniPoly {
        &self.g
    }

    pub fn class(&self) -> LlsClass {
        self.class
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        self.eigenvalues
    }

    /// `F(0,0) = −A01`, the local damping whose sign decides whether the
    /// origin can shed a locally stable cycle.
    pub fn f00(&self) -> Rat {
        -self.a_coeff(0, 1)
    }

    /// `−A10`, the square of the angular frequency when positive.
    pub fn omega_squared(&self) -> Rat {
        -self.a_coeff(1, 0)
    }
}

/// Compose the inverse map into the vector field and expand, assembling the
/// coefficient table of `ξ̈ = Σ A_nm ξ^n ξ̇^m`.
pub fn reduce_to_lls(
    sys: &KineticSystem,
    fp: &FixedPointInfo,
    map: &ReductionMap,
) -> Result<LLSSystem> {
    let l = map.l_poly();
    let k = map.k_poly();
    let lin_x = BiPoly::constant(sys.a[0].clone())
        .add(&l.scale(&sys.a[1]))
        .add(&k.scale(&sys.a[2]));
    let lin_y = BiPoly::constant(sys.b[0].clone())
        .add(&l.scale(&sys.b[1]))
        .add(&k.scale(&sys.b[2]));
    let phi_f = sys.f().compose(&l, &k);
    let phi_g = sys.g().compose(&l, &k);
    let rhs = lin_x
        .add(&phi_f)
        .scale(&map.alpha[1])
        .add(&lin_y.add(&phi_g).scale(&map.alpha[2]));

    let kind = sys.kind().combine(map.kind);
    let table: BTreeMap<(u32, u32), Rat> = rhs.terms().map(|(k, c)| (*k, c.clone())).collect();
    LLSSystem::from_a_table(table, kind, Some(fp.eigenvalues))
}

/// Sign of `F(0,0)` alongside the linear-stability cross-check
/// `F(0,0) = −2 Re(λ±)`.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub class: LlsClass,
    pub f00: Rat,
    pub f00_f64: f64,
    /// `F(0,0) < 0` permits at least one locally stable limit cycle.
    pub stable_cycle_condition: bool,
    pub re_lambda: f64,
    /// `F(0,0) + 2 Re(λ±)`; zero up to roundoff for a consistent reduction.
    pub eigen_residual: f64,
    pub n_max: u32,
    pub m_max: u32,
}

/// Report the structural class together with the `F(0,0)` criterion.
pub fn classify_lls(lls: &LLSSystem) -> ClassReport {
    let f00 = lls.f00();
    let f00_f64 = rat_to_f64(&f00);
    let re_lambda = lls.eigenvalues().0.re;
    ClassReport {
        class: lls.class(),
        f00_f64,
        stable_cycle_condition: f00.is_negative(),
        re_lambda,
        eigen_residual: f00_f64 + 2.0 * re_lambda,
        n_max: lls.n_max(),
        m_max: lls.m_max(),
        f00,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use num_traits::One;

    fn vdp_kinetic(eps: Rat) -> KineticSystem {
        // xdot = y, ydot = -x - eps (x^2 - 1) y, nonlinearity in g only
        let g = BiPoly::monomial(2, 1, -eps.clone());
        KineticSystem::with_g(
            [Rat::zero(), Rat::zero(), Rat::one()],
            [Rat::zero(), -Rat::one(), eps],
            BiPoly::zero(),
            g,
        )
        .unwrap()
    }

    fn lv_kinetic() -> KineticSystem {
        // alpha=2, gamma=1, beta=delta=1
        KineticSystem::with_g(
            [Rat::zero(), rat_int(2), Rat::zero()],
            [Rat::zero(), Rat::zero(), rat_int(-1)],
            BiPoly::monomial(1, 1, rat_int(-1)),
            BiPoly::monomial(1, 1, rat_int(1)),
        )
        .unwrap()
    }

    fn glycolytic(a: Rat, b: Rat) -> KineticSystem {
        KineticSystem::new(
            [Rat::zero(), rat_int(-1), a.clone()],
            [b, Rat::zero(), -a],
            BiPoly::monomial(2, 1, Rat::one()),
            rat_int(-1),
        )
        .unwrap()
    }

    #[test]
    fn vdp_unique_fixed_point() {
        let sys = vdp_kinetic(rat(1, 10));
        let fps = find_fixed_points(&sys, SearchBox::centered(2.0), 5, 0).unwrap();
        assert_eq!(fps.len(), 1);
        assert!(fps[0].x.abs() < 1e-10 && fps[0].y.abs() < 1e-10);
        assert!(fps[0].is_oscillatory());
    }

    #[test]
    fn lotka_volterra_two_fixed_points() {
        let sys = lv_kinetic();
        let fps = find_fixed_points(&sys, SearchBox::new(-0.5, 2.5, -0.5, 3.0).unwrap(), 7, 0)
            .unwrap();
        assert_eq!(fps.len(), 2);
        let saddle = fps.iter().find(|fp| fp.is_saddle()).unwrap();
        assert!(saddle.x.abs() < 1e-9 && saddle.y.abs() < 1e-9);
        let center = fps.iter().find(|fp| !fp.is_saddle()).unwrap();
        assert!((center.x - 1.0).abs() < 1e-9 && (center.y - 2.0).abs() < 1e-9);
        assert!(center.is_oscillatory());
        assert!(center.eigenvalues.0.re.abs() < 1e-12);
    }

    #[test]
    fn glycolytic_fixed_point_closed_form() {
        let sys = glycolytic(rat(1, 10), rat(1, 2));
        let fps = find_fixed_points(&sys, SearchBox::new(0.0, 2.0, 0.0, 3.0).unwrap(), 6, 0)
            .unwrap();
        assert_eq!(fps.len(), 1);
        assert!((fps[0].x - 0.5).abs() < 1e-10);
        assert!((fps[0].y - 1.0 / 0.7).abs() < 1e-9);
    }

    #[test]
    fn linear_system_affine_roundtrip() {
        // f = 0, mu arbitrary: the maps L, K invert the forward pair exactly
        let sys = KineticSystem::new(
            [rat_int(1), rat_int(2), rat_int(1)],
            [rat_int(-1), rat_int(-1), rat_int(-3)],
            BiPoly::zero(),
            rat(1, 2),
        )
        .unwrap();
        let fp = {
            let fps =
                find_fixed_points(&sys, SearchBox::centered(5.0), 4, 0).unwrap();
            fps.into_iter().next().unwrap()
        };
        let map = build_reduction_map(&sys, &fp).unwrap();
        assert_eq!(map.beta[1], rat(-1, 2));
        assert_eq!(map.beta[2], Rat::one());
        // x == L(xi(x,y), u(x,y)) as an exact polynomial identity
        let xi = map.xi_poly();
        let u = map.u_poly();
        let x_back = map.l_poly().compose(&xi, &u);
        let y_back = map.k_poly().compose(&xi, &u);
        assert!(x_back.same_terms(&BiPoly::var_x()));
        assert!(y_back.same_terms(&BiPoly::var_y()));
    }

    #[test]
    fn lv_reduction_matches_closed_form() {
        // A-table at alpha=2 gamma=1: A20=-2/3, A11=-1/3, A10=-2, A02=1/3
        let sys = lv_kinetic();
        let fp = FixedPointInfo::from_exact(&sys, rat_int(1), rat_int(2)).unwrap();
        let map = build_reduction_map(&sys, &fp).unwrap();
        assert_eq!(map.beta[1], Rat::one()); // mu = -1 so beta = (1, 1)
        assert_eq!(map.beta[2], Rat::one());
        let lls = reduce_to_lls(&sys, &fp, &map).unwrap();
        assert_eq!(lls.a_coeff(2, 0), rat(-2, 3));
        assert_eq!(lls.a_coeff(1, 1), rat(-1, 3));
        assert_eq!(lls.a_coeff(1, 0), rat_int(-2));
        assert_eq!(lls.a_coeff(0, 2), rat(1, 3));
        assert_eq!(lls.a_table().len(), 4);
        assert_eq!(lls.omega_squared(), rat_int(2));
        // F = (1/3) xi - (1/3) xidot, G = 2 xi + (2/3) xi^2
        let f_want = BiPoly::from_terms(vec![((1, 0), rat(1, 3)), ((0, 1), rat(-1, 3))]);
        assert!(lls.f().same_terms(&f_want));
        let g_want = UniPoly::from_coeffs(vec![Rat::zero(), rat_int(2), rat(2, 3)]);
        assert_eq!(lls.g(), &g_want);
        assert_eq!(lls.class(), LlsClass::GeneralLls);
        assert!(lls.f00().is_zero()); // center-type
    }

    #[test]
    fn lv_symbolic_coefficients_at_random_rationals() {
        // a1 = (alpha-gamma)/(alpha+gamma), a2 = -1/(alpha+gamma),
        // omega^2 = alpha*gamma, a3 = alpha*gamma/(alpha+gamma),
        // verified exactly at a spread of rational parameter values
        let samples = [
            (rat_int(2), rat_int(1)),
            (rat(3, 2), rat(5, 7)),
            (rat(7, 3), rat(11, 5)),
            (rat_int(5), rat(1, 4)),
            (rat(13, 11), rat(17, 13)),
        ];
        for (alpha, gamma) in samples {
            let sys = KineticSystem::with_g(
                [Rat::zero(), alpha.clone(), Rat::zero()],
                [Rat::zero(), Rat::zero(), -gamma.clone()],
                BiPoly::monomial(1, 1, rat_int(-1)),
                BiPoly::monomial(1, 1, rat_int(1)),
            )
            .unwrap();
            let fp = FixedPointInfo::from_exact(&sys, gamma.clone(), alpha.clone()).unwrap();
            let map = build_reduction_map(&sys, &fp).unwrap();
            let lls = reduce_to_lls(&sys, &fp, &map).unwrap();
            let sum = &alpha + &gamma;
            assert_eq!(lls.f().coeff(1, 0), (&alpha - &gamma) / &sum);
            assert_eq!(lls.f().coeff(0, 1), -Rat::one() / &sum);
            assert_eq!(lls.omega_squared(), &alpha * &gamma);
            assert_eq!(lls.g().coeff(2), &alpha * &gamma / &sum);
        }
    }

    #[test]
    fn glycolytic_reduction_matches_printed_form() {
        // frozen CAS check at a=1/10, b=1/2:
        // A01=11/140, A02=-3/7, A03=-1, A10=-7/20, A11=1, A12=-1
        let sys = glycolytic(rat(1, 10), rat(1, 2));
        let xs = rat(1, 2);
        let ys = rat(1, 2) / rat(7, 20);
        let fp = FixedPointInfo::from_exact(&sys, xs, ys).unwrap();
        let map = build_reduction_map(&sys, &fp).unwrap();
        let lls = reduce_to_lls(&sys, &fp, &map).unwrap();
        assert_eq!(lls.a_coeff(0, 1), rat(11, 140));
        assert_eq!(lls.a_coeff(0, 2), rat(-3, 7));
        assert_eq!(lls.a_coeff(0, 3), rat_int(-1));
        assert_eq!(lls.a_coeff(1, 0), rat(-7, 20));
        assert_eq!(lls.a_coeff(1, 1), rat_int(1));
        assert_eq!(lls.a_coeff(1, 2), rat_int(-1));
        assert_eq!(lls.a_table().len(), 6);
        assert_eq!((lls.n_max(), lls.m_max()), (1, 3));
        assert_eq!(lls.class(), LlsClass::GeneralLls);
    }

    #[test]
    fn glycolytic_symbolic_form_random_rationals() {
        // F == (1+a+3b^2) - 2b xi - 2bk - 3b xidot + xi xidot + k xidot
        //      + xidot^2  with k = b + b/(a+b^2);  G == (a+b^2) xi
        let samples = [
            (rat(1, 10), rat(1, 2)),
            (rat(2, 7), rat(3, 5)),
            (rat(1, 3), rat(5, 4)),
            (rat(9, 11), rat(2, 9)),
        ];
        for (a, b) in samples {
            let sys = glycolytic(a.clone(), b.clone());
            let denom = &a + &b * &b;
            let xs = b.clone();
            let ys = &b / &denom;
            let fp = FixedPointInfo::from_exact(&sys, xs, ys).unwrap();
            let map = build_reduction_map(&sys, &fp).unwrap();
            let lls = reduce_to_lls(&sys, &fp, &map).unwrap();
            let k = &b + &b / &denom;
            let three_b2 = rat_int(3) * &b * &b;
            let f_want = BiPoly::from_terms(vec![
                ((0, 0), Rat::one() + &a + three_b2 - rat_int(2) * &b * &k),
                ((1, 0), rat_int(-2) * &b),
                ((0, 1), &k - rat_int(3) * &b),
                ((1, 1), Rat::one()),
                ((0, 2), Rat::one()),
            ]);
            assert!(lls.f().same_terms(&f_want), "a={a} b={b}");
            let g_want = UniPoly::from_coeffs(vec![Rat::zero(), denom.clone()]);
            assert_eq!(lls.g(), &g_want);
        }
    }

    #[test]
    fn vdp_first_order_reduces_to_lienard() {
        let eps = rat(1, 10);
        let sys = vdp_kinetic(eps.clone());
        let fp = FixedPointInfo::from_exact(&sys, Rat::zero(), Rat::zero()).unwrap();
        let map = build_reduction_map(&sys, &fp).unwrap();
        // f == 0, g != 0 forces beta = (1, 0): xi = x, u = xdot = y
        assert_eq!(map.beta[1], Rat::one());
        assert_eq!(map.beta[2], Rat::zero());
        let lls = reduce_to_lls(&sys, &fp, &map).unwrap();
        assert_eq!(lls.a_coeff(0, 1), eps.clone());
        assert_eq!(lls.a_coeff(2, 1), -eps.clone());
        assert_eq!(lls.a_coeff(1, 0), rat_int(-1));
        assert_eq!(lls.a_table().len(), 3);
        assert_eq!(lls.class(), LlsClass::Lienard);
        let report = classify_lls(&lls);
        assert_eq!(report.f00, -eps);
        assert!(report.stable_cycle_condition);
        assert!(report.eigen_residual.abs() < 1e-10);
        assert_eq!((report.n_max, report.m_max), (2, 1));
    }

    #[test]
    fn rayleigh_pattern_classifies() {
        // only A_0m damping entries plus linear restoring
        let mut table = BTreeMap::new();
        table.insert((1, 0), rat_int(-1));
        table.insert((0, 1), rat_int(1));
        table.insert((0, 3), rat(-1, 3));
        let lls = LLSSystem::from_a_table(table, CoeffKind::Exact, None).unwrap();
        assert_eq!(lls.class(), LlsClass::Rayleigh);
    }

    #[test]
    fn class_tags_are_exclusive() {
        // a purely linear equation fits both special patterns; the tag is
        // deterministic (constant damping counts as position-only)
        let mut table = BTreeMap::new();
        table.insert((1, 0), rat_int(-1));
        table.insert((0, 1), rat(-1, 2));
        let lls = LLSSystem::from_a_table(table, CoeffKind::Exact, None).unwrap();
        assert_eq!(lls.class(), LlsClass::Lienard);
        // mixed-term damping is neither
        let mut table = BTreeMap::new();
        table.insert((1, 0), rat_int(-1));
        table.insert((0, 1), rat_int(1));
        table.insert((1, 2), rat_int(1));
        let lls = LLSSystem::from_a_table(table, CoeffKind::Exact, None).unwrap();
        assert_eq!(lls.class(), LlsClass::GeneralLls);
    }

    #[test]
    fn eigen_consistency_between_jacobian_and_lls() {
        // trace == A01 and det == -A10 within float tolerance
        for sys in [vdp_kinetic(rat(1, 10)), glycolytic(rat(1, 10), rat(1, 2))] {
            let fps = find_fixed_points(&sys, SearchBox::centered(3.0), 6, 1).unwrap();
            for fp in &fps {
                let map = build_reduction_map(&sys, fp).unwrap();
                let lls = reduce_to_lls(&sys, fp, &map).unwrap();
                assert!((rat_to_f64(&lls.a_coeff(0, 1)) - fp.trace).abs() < 1e-10);
                assert!((rat_to_f64(&lls.omega_squared()) - fp.determinant).abs() < 1e-10);
                let rep = classify_lls(&lls);
                assert!(rep.eigen_residual.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inconsistent_fixed_point_rejected() {
        let sys = vdp_kinetic(rat(1, 10));
        let bogus = FixedPointInfo::at_point(&sys, 0.3, 0.1, None);
        let map = build_reduction_map(&sys, &bogus).unwrap();
        match reduce_to_lls(&sys, &bogus, &map) {
            Err(Error::FixedPointNotShifted { .. }) => {}
            other => panic!("expected FixedPointNotShifted, got {other:?}"),
        }
    }

    #[test]
    fn non_proportional_nonlinearities_rejected() {
        let err = KineticSystem::with_g(
            std::array::from_fn(|_| Rat::zero()),
            std::array::from_fn(|_| Rat::zero()),
            BiPoly::monomial(1, 1, Rat::one()),
            BiPoly::monomial(2, 0, Rat::one()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotProportional));
    }

    #[test]
    fn affine_terms_in_f_rejected_without_opt_in() {
        let f = BiPoly::from_terms(vec![((0, 0), Rat::one()), ((2, 1), Rat::one())]);
        let err = KineticSystem::new(
            std::array::from_fn(|_| Rat::zero()),
            std::array::from_fn(|_| Rat::zero()),
            f,
            Rat::one(),
        )
            .unwrap_err();
        assert!(matches!(err, Error::AffineTermsInF(_)));
    }

    #[test]
    fn lv_beta_matches_weighted_combination() {
        // mu = -delta/beta gives beta proportional to (delta, beta)
        let beta_p = rat_int(3);
        let delta = rat_int(2);
        let sys = KineticSystem::with_g(
            [Rat::zero(), rat_int(2), Rat::zero()],
            [Rat::zero(), Rat::zero(), rat_int(-1)],
            BiPoly::monomial(1, 1, -beta_p.clone()),
            BiPoly::monomial(1, 1, delta.clone()),
        )
        .unwrap();
        assert_eq!(sys.mu().unwrap(), &(-&delta / &beta_p));
        let xs = Rat::one() / &delta; // gamma/delta with gamma=1... gamma=1: xs=1/2
        let ys = rat_int(2) / &beta_p;
        let fp = FixedPointInfo::from_exact(&sys, xs, ys).unwrap();
        let map = build_reduction_map(&sys, &fp).unwrap();
        // (beta1, beta2) = (delta/beta, 1) ∝ (delta, beta)
        assert_eq!(&map.beta[1] * &beta_p, delta);
        assert_eq!(map.beta[2], Rat::one());
    }
}
