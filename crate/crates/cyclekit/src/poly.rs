//! Exact arithmetic foundation: arbitrary-precision rationals plus
//! univariate and bivariate polynomials kept in canonical form.
//!
//! Every operation re-normalizes eagerly (no stored zero coefficients,
//! unique exponents), so structural equality is semantic equality.
//! Coefficients are rationals throughout; a polynomial built from
//! floating-point input carries the [`CoeffKind::Float`] tag, which is
//! contagious through arithmetic and drives tolerance/provenance choices
//! downstream.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar used throughout the symbolic pipeline.
pub type Rat = BigRational;

/// Shorthand for `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite double (every finite `f64` is a dyadic
/// rational). Returns `None` for NaN/infinite input.
pub fn rat_from_f64(v: f64) -> Option<Rat> {
    Rat::from_float(v)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse a rational from `"p/q"`, an integer literal, or a decimal literal
/// with optional exponent (`"0.144"` means exactly 144/1000).
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in '{s}'")));
        }
        return Ok(Rat::new(n, d));
    }
    // [sign] digits [. digits] [e [sign] digits]
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    } else {
        digits
    };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rat::from_integer(n * ten.pow(scale as u32))
    } else {
        Rat::new(n, ten.pow((-scale) as u32))
    })
}

/// Render as `"p/q"` (or `"p"` when the denominator is one); round-trips
/// through [`parse_rat`].
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Provenance of a polynomial's coefficients: `Exact` values came from
/// rational input, `Float` values passed through floating point at least
/// once (e.g. a numerically located fixed point).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffKind {
    Exact,
    Float,
}

impl CoeffKind {
    pub fn combine(self, other: CoeffKind) -> CoeffKind {
        if self == CoeffKind::Exact && other == CoeffKind::Exact {
            CoeffKind::Exact
        } else {
            CoeffKind::Float
        }
    }

    pub fn provenance(self) -> &'static str {
        match self {
            CoeffKind::Exact => "exact",
            CoeffKind::Float => "float",
        }
    }
}

/// Bivariate polynomial with exact rational coefficients in canonical
/// (sparse, sorted, zero-free) form. The two variables are positional;
/// callers decide whether they mean `(x, y)`, `(ξ, ξ̇)`, `(Z, Ż)` or
/// `(ρ, ω)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rat>,
    kind: CoeffKind,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly {
            terms: BTreeMap::new(),
            kind: CoeffKind::Exact,
        }
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = BiPoly::zero();
        if !c.is_zero() {
            p.terms.insert((0, 0), c);
        }
        p
    }

    /// The first variable as a polynomial.
    pub fn var_x() -> Self {
        BiPoly::monomial(1, 0, Rat::one())
    }

    /// The second variable as a polynomial.
    pub fn var_y() -> Self {
        BiPoly::monomial(0, 1, Rat::one())
    }

    pub fn monomial(i: u32, j: u32, c: Rat) -> Self {
        let mut p = BiPoly::zero();
        if !c.is_zero() {
            p.terms.insert((i, j), c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rat)>>(iter: I) -> Self {
        let mut p = BiPoly::zero();
        for ((i, j), c) in iter {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: CoeffKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structural equality up to the provenance tag.
    pub fn same_terms(&self, other: &BiPoly) -> bool {
        self.terms == other.terms
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    /// Degree pair `(max i, max j)`; `(0, 0)` for the zero polynomial.
    pub fn degree(&self) -> (u32, u32) {
        let mut di = 0;
        let mut dj = 0;
        for (i, j) in self.terms.keys() {
            di = di.max(*i);
            dj = dj.max(*j);
        }
        (di, dj)
    }

    /// Total degree (max of i + j); 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    fn add_term(&mut self, i: u32, j: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        out.kind = self.kind.combine(other.kind);
        for ((i, j), c) in &other.terms {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
            kind: self.kind,
        }
    }

    pub fn sub(&self, other: &BiPoly) -> BiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        out.kind = self.kind.combine(other.kind);
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> BiPoly {
        if s.is_zero() {
            return BiPoly::zero().with_kind(self.kind);
        }
        BiPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
            kind: self.kind,
        }
    }

    pub fn pow(&self, n: u32) -> BiPoly {
        let mut out = BiPoly::constant(Rat::one()).with_kind(self.kind);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative in the first variable.
    pub fn dx(&self) -> BiPoly {
        let mut out = BiPoly::zero().with_kind(self.kind);
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                out.add_term(i - 1, *j, c * Rat::from_integer(BigInt::from(*i)));
            }
        }
        out
    }

    /// Partial derivative in the second variable.
    pub fn dy(&self) -> BiPoly {
        let mut out = BiPoly::zero().with_kind(self.kind);
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                out.add_term(*i, j - 1, c * Rat::from_integer(BigInt::from(*j)));
            }
        }
        out
    }

    /// Substitute `x -> x_sub`, `y -> y_sub` and expand to canonical form.
    /// Exact when the inputs are exact. Powers of the substituents are
    /// cached, so cost is quadratic in the degree rather than exponential.
    pub fn compose(&self, x_sub: &BiPoly, y_sub: &BiPoly) -> BiPoly {
        let (di, dj) = self.degree();
        let mut x_pows: Vec<BiPoly> = Vec::with_capacity(di as usize + 1);
        let mut y_pows: Vec<BiPoly> = Vec::with_capacity(dj as usize + 1);
        x_pows.push(BiPoly::constant(Rat::one()));
        y_pows.push(BiPoly::constant(Rat::one()));
        for k in 1..=di as usize {
            x_pows.push(x_pows[k - 1].mul(x_sub));
        }
        for k in 1..=dj as usize {
            y_pows.push(y_pows[k - 1].mul(y_sub));
        }
        let mut out = BiPoly::zero();
        out.kind = self
            .kind
            .combine(x_sub.kind)
            .combine(y_sub.kind);
        for ((i, j), c) in &self.terms {
            let prod = x_pows[*i as usize].mul(&y_pows[*j as usize]);
            for ((pi, pj), pc) in &prod.terms {
                out.add_term(*pi, *pj, pc * c);
            }
        }
        out
    }

    pub fn eval_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for ((i, j), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..*i {
                t *= x;
            }
            for _ in 0..*j {
                t *= y;
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|((i, j), c)| rat_to_f64(c) * x.powi(*i as i32) * y.powi(*j as i32))
            .sum()
    }

    /// Flattened `(i, j, coeff)` view with coefficients as doubles, for
    /// fast repeated evaluation in the numerical layer.
    pub fn to_f64_terms(&self) -> Vec<(u32, u32, f64)> {
        self.terms
            .iter()
            .map(|((i, j), c)| (*i, *j, rat_to_f64(c)))
            .collect()
    }

    /// Reinterpret as univariate in the first variable; `None` if any term
    /// involves the second variable.
    pub fn as_uni_in_x(&self) -> Option<UniPoly> {
        let mut coeffs = vec![Rat::zero(); self.degree().0 as usize + 1];
        for ((i, j), c) in &self.terms {
            if *j != 0 {
                return None;
            }
            coeffs[*i as usize] = c.clone();
        }
        Some(UniPoly::from_coeffs(coeffs))
    }

    /// Human-readable rendering with the given variable names.
    pub fn format_with(&self, xname: &str, yname: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for ((i, j), c) in &self.terms {
            let mut s = rat_str(c);
            if *i > 0 {
                s += &format!("*{xname}");
                if *i > 1 {
                    s += &format!("^{i}");
                }
            }
            if *j > 0 {
                s += &format!("*{yname}");
                if *j > 1 {
                    s += &format!("^{j}");
                }
            }
            parts.push(s);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_with("x", "y"))
    }
}

/// Dense univariate polynomial over the rationals. Invariant: the
/// coefficient vector is empty (zero polynomial) or its last entry is
/// nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        UniPoly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        UniPoly::from_coeffs(out)
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(out)
    }

    pub fn scale(&self, s: &Rat) -> UniPoly {
        if s.is_zero() {
            return UniPoly::zero();
        }
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * Rat::from_integer(BigInt::from(k as u64 + 1)))
                .collect(),
        )
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    /// Euclidean division: `self = q*div + r` with `deg r < deg div`.
    /// Panics if `div` is zero.
    pub fn div_rem(&self, div: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.coeffs.len() - 1;
        let lead = div.coeffs.last().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / lead;
            if !factor.is_zero() {
                quot[k] = factor.clone();
                for (j, c) in div.coeffs.iter().enumerate() {
                    rem[k + j] -= &factor * c;
                }
            }
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
            if rem.len() <= dd {
                break;
            }
        }
        (UniPoly::from_coeffs(quot), UniPoly::from_coeffs(rem))
    }

    /// Monic normalization (leading coefficient one); zero stays zero.
    pub fn monic(&self) -> UniPoly {
        match self.leading() {
            None => UniPoly::zero(),
            Some(l) => {
                let inv = Rat::one() / l;
                self.scale(&inv)
            }
        }
    }

    /// Monic gcd over the rationals.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic(); // normalize to tame coefficient growth
        }
        a.monic()
    }

    /// Yun square-free decomposition: returns `(factor, multiplicity)`
    /// pairs with the factors monic, square-free and pairwise coprime, so
    /// that `self = lc * prod factor_i^mult_i`.
    pub fn square_free(&self) -> Vec<(UniPoly, usize)> {
        let p = self.monic();
        if p.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let dp = p.derivative();
        let g = p.gcd(&dp);
        let mut out = Vec::new();
        if g.degree() == Some(0) {
            out.push((p, 1));
            return out;
        }
        let mut c = p.div_rem(&g).0;
        let mut d = dp.div_rem(&g).0.sub(&c.derivative());
        let mut mult = 1;
        while c.degree().unwrap_or(0) > 0 {
            let f = c.gcd(&d);
            if f.degree().unwrap_or(0) > 0 {
                out.push((f.clone(), mult));
            }
            c = c.div_rem(&f).0;
            d = d.div_rem(&f).0.sub(&c.derivative());
            mult += 1;
        }
        out
    }

    pub fn format_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut s = rat_str(c);
            if k > 0 {
                s += &format!("*{var}");
                if k > 1 {
                    s += &format!("^{k}");
                }
            }
            parts.push(s);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_with("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p_xy() -> BiPoly {
        BiPoly::var_x().mul(&BiPoly::var_y())
    }

    #[test]
    fn identity_substitution() {
        let s = BiPoly::var_x();
        let d = BiPoly::var_y();
        let composed = p_xy().compose(&s, &d);
        assert_eq!(composed, p_xy());
    }

    #[test]
    fn binomial_expansion() {
        // x^2 with x -> s + 1 gives s^2 + 2s + 1
        let p = BiPoly::monomial(2, 0, Rat::one());
        let s_plus_1 = BiPoly::var_x().add(&BiPoly::constant(Rat::one()));
        let got = p.compose(&s_plus_1, &BiPoly::var_y());
        let want = BiPoly::from_terms(vec![
            ((2, 0), Rat::one()),
            ((1, 0), rat_int(2)),
            ((0, 0), Rat::one()),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn add_cancels() {
        let s = BiPoly::var_x();
        let d = BiPoly::var_y();
        let got = s.add(&d).add(&s.sub(&d));
        assert_eq!(got, s.scale(&rat_int(2)));
        assert_eq!(got.num_terms(), 1);
    }

    #[test]
    fn derivative_of_cube() {
        let s3 = BiPoly::monomial(3, 0, Rat::one());
        assert_eq!(s3.dx(), BiPoly::monomial(2, 0, rat_int(3)));
    }

    #[test]
    fn scaled_damping_term() {
        // (s^2 - 1)*d scaled by 1/10
        let p = BiPoly::monomial(2, 0, Rat::one())
            .sub(&BiPoly::constant(Rat::one()))
            .mul(&BiPoly::var_y());
        let got = p.scale(&rat(1, 10));
        let want = BiPoly::from_terms(vec![((2, 1), rat(1, 10)), ((0, 1), rat(-1, 10))]);
        assert_eq!(got, want);
    }

    #[test]
    fn float_kind_is_contagious() {
        let a = BiPoly::constant(Rat::one());
        let b = BiPoly::constant(rat(1, 2)).with_kind(CoeffKind::Float);
        assert_eq!(a.add(&b).kind(), CoeffKind::Float);
        assert_eq!(a.mul(&b).kind(), CoeffKind::Float);
        assert_eq!(a.add(&a).kind(), CoeffKind::Exact);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("0.144").unwrap(), rat(18, 125));
        assert_eq!(parse_rat("-1e-3").unwrap(), rat(-1, 1000));
        assert_eq!(parse_rat("1.5e2").unwrap(), rat_int(150));
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn unipoly_div_rem_roundtrip() {
        // (x^2 - 1) = (x - 1)(x + 1)
        let p = UniPoly::from_coeffs(vec![rat_int(-1), rat_int(0), rat_int(1)]);
        let d = UniPoly::from_coeffs(vec![rat_int(-1), rat_int(1)]);
        let (q, r) = p.div_rem(&d);
        assert!(r.is_zero());
        assert_eq!(q, UniPoly::from_coeffs(vec![rat_int(1), rat_int(1)]));
    }

    #[test]
    fn square_free_splits_multiplicities() {
        // (x - 1)^2 (x - 4)
        let lin = |r: i64| UniPoly::from_coeffs(vec![rat_int(-r), rat_int(1)]);
        let p = lin(1).mul(&lin(1)).mul(&lin(4));
        let sf = p.square_free();
        assert_eq!(sf.len(), 2);
        let by_mult: std::collections::BTreeMap<usize, UniPoly> =
            sf.into_iter().map(|(f, m)| (m, f)).collect();
        assert_eq!(by_mult[&1], lin(4));
        assert_eq!(by_mult[&2], lin(1));
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
    }

    fn small_poly() -> impl Strategy<Value = BiPoly> {
        proptest::collection::vec(((0u32..=3, 0u32..=3), small_rat()), 0..6)
            .prop_map(BiPoly::from_terms)
    }

    fn affine() -> impl Strategy<Value = BiPoly> {
        (small_rat(), small_rat(), small_rat()).prop_map(|(a, b, c)| {
            BiPoly::from_terms(vec![((1, 0), a), ((0, 1), b), ((0, 0), c)])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn eval_is_ring_homomorphism(a in small_poly(), b in small_poly(),
                                     x in small_rat(), y in small_rat()) {
            prop_assert_eq!(a.mul(&b).eval_rat(&x, &y),
                            a.eval_rat(&x, &y) * b.eval_rat(&x, &y));
            prop_assert_eq!(a.add(&b).eval_rat(&x, &y),
                            a.eval_rat(&x, &y) + b.eval_rat(&x, &y));
        }

        #[test]
        fn compose_associates_for_affine(p in small_poly(),
                                         ax in affine(), ay in affine(),
                                         bx in affine(), by in affine()) {
            // compose(compose(p, A), B) == compose(p, A o B)
            let lhs = p.compose(&ax, &ay).compose(&bx, &by);
            let ab_x = ax.compose(&bx, &by);
            let ab_y = ay.compose(&bx, &by);
            let rhs = p.compose(&ab_x, &ab_y);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn unipoly_divrem_invariant(ac in proptest::collection::vec(small_rat(), 1..6),
                                    bc in proptest::collection::vec(small_rat(), 1..5)) {
            let a = UniPoly::from_coeffs(ac);
            let b = UniPoly::from_coeffs(bc);
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b);
            prop_assert_eq!(q.mul(&b).add(&r), a.clone());
            if !r.is_zero() {
                prop_assert!(r.degree() < b.degree());
            }
        }
    }
}
