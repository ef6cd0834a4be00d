//! Exact Strichartz exponent bookkeeping.
//!
//! Pairs are written `(q, r)` with `q` the spatial and `r` the temporal
//! exponent. A pair is `L²`-admissible when `1/r = (d/2)(1/2 - 1/q)` and
//! `Ḣ^s`-admissible when `1/r = (d/2)(1/2 - 1/q - s/d)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("exponent p = {0} must exceed 1")]
    POutOfRange(String),
    #[error("p1 = {p1} lies outside the open interval ({lo}, {hi})")]
    P1OutOfRange { p1: String, lo: String, hi: String },
    #[error("dimension d = {0} is too small")]
    DimensionTooSmall(usize),
    #[error("d(d+2)(p1-1) = 16 makes alpha undefined")]
    DegenerateDenominator,
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

/// Rational number or `+∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn int(n: i64) -> Self {
        Self::Finite(rat(n, 1))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::Finite(rat(n, d))
    }

    /// `1/x` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(&self) -> Self {
        match self {
            Self::Infinite => Self::Finite(BigRational::zero()),
            Self::Finite(x) if x.is_zero() => Self::Infinite,
            Self::Finite(x) => Self::Finite(x.recip()),
        }
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Self::Finite(x) => Some(x),
            Self::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Finite(x) => to_f64(x),
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl From<BigRational> for ExtRational {
    fn from(x: BigRational) -> Self {
        Self::Finite(x)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Infinite, Self::Infinite) => Ordering::Equal,
            (Self::Infinite, _) => Ordering::Greater,
            (_, Self::Infinite) => Ordering::Less,
            (Self::Finite(a), Self::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinite => write!(f, "inf"),
            Self::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for ExtRational {
    type Err = ExponentError;

    /// Accepts `inf`, integers, `a/b` and finite decimals such as `2.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Self::Infinite);
        }
        parse_rational(t).map(Self::Finite)
    }
}

fn parse_rational(t: &str) -> Result<BigRational, ExponentError> {
    let err = || ExponentError::Parse(t.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(digits, scale));
    }
    t.parse::<BigInt>()
        .map(BigRational::from_integer)
        .map_err(|_| err())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exponent pair `(q, r)`: `q` in space, `r` in time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pair {
    pub q: ExtRational,
    pub r: ExtRational,
}

impl Pair {
    pub fn new(q: ExtRational, r: ExtRational) -> Self {
        Self { q, r }
    }
}

/// `s_p = d/2 - 2/(p-1)`.
pub fn s_p(d: usize, p: &BigRational) -> Result<BigRational, ExponentError> {
    if *p <= BigRational::one() {
        return Err(ExponentError::POutOfRange(p.to_string()));
    }
    Ok(rat(d as i64, 2) - rat(2, 1) / (p - BigRational::one()))
}

/// Hölder conjugate `q/(q-1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate(q: &ExtRational) -> ExtRational {
    match q {
        ExtRational::Infinite => ExtRational::int(1),
        ExtRational::Finite(x) if x.is_one() => ExtRational::Infinite,
        ExtRational::Finite(x) => ExtRational::Finite(x / (x - BigRational::one())),
    }
}

/// `1/r = (d/2)(1/2 - 1/q - s/d)`, exactly.
pub fn is_hs_admissible(d: usize, s: &BigRational, pair: &Pair) -> bool {
    let (Some(inv_q), Some(inv_r)) = (
        pair.q.recip().finite().cloned(),
        pair.r.recip().finite().cloned(),
    ) else {
        return false;
    };
    let dd = rat(d as i64, 1);
    inv_r == (&dd / rat(2, 1)) * (rat(1, 2) - inv_q - s / &dd)
}

pub fn is_l2_admissible(d: usize, pair: &Pair) -> bool {
    is_hs_admissible(d, &BigRational::zero(), pair)
}

/// `2^* = 2d/(d-2)`.
pub fn energy_critical(d: usize) -> Result<BigRational, ExponentError> {
    if d < 3 {
        return Err(ExponentError::DimensionTooSmall(d));
    }
    Ok(rat(2 * d as i64, d as i64 - 2))
}

/// Open interval `(1 + 4/d, 1 + 4/(d-2))` of mass-supercritical, energy-subcritical powers.
pub fn p1_range(d: usize) -> Result<(BigRational, BigRational), ExponentError> {
    if d < 3 {
        return Err(ExponentError::DimensionTooSmall(d));
    }
    Ok((
        BigRational::one() + rat(4, d as i64),
        BigRational::one() + rat(4, d as i64 - 2),
    ))
}

fn require_p1(d: usize, p1: &BigRational) -> Result<(), ExponentError> {
    let (lo, hi) = p1_range(d)?;
    if !(lo < *p1 && *p1 < hi) {
        return Err(ExponentError::P1OutOfRange {
            p1: p1.to_string(),
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    Ok(())
}

/// Midpoint of [`p1_range`].
pub fn default_p(d: usize) -> Result<BigRational, ExponentError> {
    let (lo, hi) = p1_range(d)?;
    Ok((lo + hi) / rat(2, 1))
}

/// The five named pairs: `(2, ∞)`, the diagonal `2(d+2)/d`, the `V`-type pair
/// `(2d(d+2)/(d²+4), 2(d+2)/(d-2))`, the `p`-dependent pair
/// `(2d(d+2)(p-1)/(d(d+2)(p-1) - 8), (d+2)(p-1)/2)` and `(2^*, 2)`.
pub fn named_pairs(d: usize, p: &BigRational) -> Result<Vec<(&'static str, Pair)>, ExponentError> {
    require_p1(d, p)?;
    let di = d as i64;
    let pm1 = p - BigRational::one();
    let dd2 = rat(di * (di + 2), 1);
    let fin = ExtRational::Finite;
    Ok(vec![
        (
            "energy",
            Pair::new(ExtRational::int(2), ExtRational::Infinite),
        ),
        (
            "diagonal",
            Pair::new(
                ExtRational::ratio(2 * (di + 2), di),
                ExtRational::ratio(2 * (di + 2), di),
            ),
        ),
        (
            "critical",
            Pair::new(
                ExtRational::ratio(2 * di * (di + 2), di * di + 4),
                ExtRational::ratio(2 * (di + 2), di - 2),
            ),
        ),
        (
            "perturbative",
            Pair::new(
                fin(rat(2, 1) * &dd2 * &pm1 / (&dd2 * &pm1 - rat(8, 1))),
                fin(rat(di + 2, 2) * &pm1),
            ),
        ),
        (
            "endpoint",
            Pair::new(fin(energy_critical(d)?), ExtRational::int(2)),
        ),
    ])
}

/// Exotic exponents for `d >= 5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExoticExponents {
    pub d: usize,
    #[serde(serialize_with = "ser_rat")]
    pub p1: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub s_p1: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub alpha: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub s_alpha: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub rho: BigRational,
    pub gamma: ExtRational,
    pub rho_star: ExtRational,
    pub gamma_star: ExtRational,
    pub certificates: ExoticCertificates,
}

fn ser_rat<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExoticCertificates {
    /// `1 + 4d/(d²-2d+8) < α < 1 + 4/(d-2)`
    pub alpha_in_interval: bool,
    /// `s_p(d, α) = s_α`
    pub s_alpha_consistent: bool,
    /// `(ρ, γ)` is `Ḣ^{s_α}`-admissible
    pub hs_admissible: bool,
    /// `γ > (d+2)(p₁-1)/2`. Not part of [`ExoticCertificates::invariants_pass`]:
    /// with the printed definitions it fails for `d = 5, p₁ > 2.1369...` and
    /// `d = 6, p₁ > 1.9550...`.
    pub gamma_exceeds_diagonal: bool,
    /// `ρ* = ρ'`
    pub rho_star_conjugate: bool,
    /// `(ρ, γ*')` is `Ḣ^{-s_α}`-admissible
    pub dual_admissible: bool,
}

impl ExoticCertificates {
    pub fn invariants_pass(&self) -> bool {
        self.alpha_in_interval
            && self.s_alpha_consistent
            && self.hs_admissible
            && self.rho_star_conjugate
            && self.dual_admissible
    }
}

/// `α = 1 + 4d(p₁-1)/(d(d+2)(p₁-1) - 16)`, `s_α = 1 - (4/d)s_{p₁}`,
/// `ρ = (α + 1 + 2^*)/2`, `1/γ = (d/2)(1/2 - 1/ρ - s_α/d)`, `ρ* = ρ'` and
/// `1/γ* = 1 - (d/2)(1/2 - 1/ρ + s_α/d)`.
pub fn exotic(d: usize, p1: &BigRational) -> Result<ExoticExponents, ExponentError> {
    if d < 5 {
        return Err(ExponentError::DimensionTooSmall(d));
    }
    let di = d as i64;
    let one = BigRational::one();
    let dr = rat(di, 1);
    let pm1 = p1 - &one;
    let denom = rat(di * (di + 2), 1) * &pm1 - rat(16, 1);
    if denom.is_zero() {
        return Err(ExponentError::DegenerateDenominator);
    }
    require_p1(d, p1)?;
    let s_p1 = s_p(d, p1)?;
    let alpha = &one + rat(4 * di, 1) * &pm1 / denom;
    let s_alpha = &one - rat(4, di) * &s_p1;
    let crit = energy_critical(d)?;
    let rho = (&alpha + &one + &crit) / rat(2, 1);
    let half = rat(1, 2);
    let inv_gamma = (&dr / rat(2, 1)) * (&half - rho.recip() - &s_alpha / &dr);
    let gamma = ExtRational::Finite(inv_gamma.clone()).recip();
    let rho_star = conjugate(&ExtRational::Finite(rho.clone()));
    let inv_gamma_star = &one - (&dr / rat(2, 1)) * (&half - rho.recip() + &s_alpha / &dr);
    let gamma_star = ExtRational::Finite(inv_gamma_star.clone()).recip();

    let alpha_lo = &one + rat(4 * di, di * di - 2 * di + 8);
    let alpha_hi = &one + rat(4, di - 2);
    let diagonal = rat(di + 2, 2) * &pm1;
    let certificates = ExoticCertificates {
        alpha_in_interval: alpha_lo < alpha && alpha < alpha_hi,
        s_alpha_consistent: s_p(d, &alpha)? == s_alpha,
        hs_admissible: inv_gamma.is_positive()
            && is_hs_admissible(d, &s_alpha, &Pair::new(rho.clone().into(), gamma.clone())),
        gamma_exceeds_diagonal: gamma > ExtRational::Finite(diagonal),
        rho_star_conjugate: rho_star.recip() == ExtRational::Finite(&one - rho.recip()),
        dual_admissible: is_hs_admissible(
            d,
            &-s_alpha.clone(),
            &Pair::new(rho.clone().into(), conjugate(&gamma_star)),
        ),
    };
    Ok(ExoticExponents {
        d,
        p1: p1.clone(),
        s_p1,
        alpha,
        s_alpha,
        rho,
        gamma,
        rho_star,
        gamma_star,
        certificates,
    })
}

/// Ordinary Strichartz norms standing in for the exotic ones when `d <= 4`:
/// `V`-type `L^r_t L^q_x` with `∇` and its dual `L^{2(d+2)/(d+4)}` in space and time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinaryNorms {
    pub d: usize,
    pub pair: Pair,
    pub dual: Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum ExoticNorms {
    Exotic(ExoticExponents),
    Ordinary(OrdinaryNorms),
}

pub fn exotic_or_ordinary(d: usize, p1: &BigRational) -> Result<ExoticNorms, ExponentError> {
    if d >= 5 {
        return exotic(d, p1).map(ExoticNorms::Exotic);
    }
    require_p1(d, p1)?;
    let di = d as i64;
    let dual = ExtRational::ratio(2 * (di + 2), di + 4);
    Ok(ExoticNorms::Ordinary(OrdinaryNorms {
        d,
        pair: Pair::new(
            ExtRational::ratio(2 * di * (di + 2), di * di + 4),
            ExtRational::ratio(2 * (di + 2), di - 2),
        ),
        dual: Pair::new(dual.clone(), dual),
    }))
}

/// `n` equally spaced interior points of [`p1_range`].
pub fn interior_p1(d: usize, n: usize) -> Result<Vec<BigRational>, ExponentError> {
    let (lo, hi) = p1_range(d)?;
    let steps = rat(n as i64 + 1, 1);
    Ok((1..=n as i64)
        .map(|k| &lo + (&hi - &lo) * rat(k, 1) / &steps)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn s_p_examples() {
        assert_eq!(s_p(5, &q("7/3")).unwrap(), q("1"));
        assert_eq!(s_p(5, &q("9/5")).unwrap(), q("0"));
        assert_eq!(s_p(5, &q("2")).unwrap(), q("1/2"));
        assert!(s_p(5, &q("1")).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "2.5".parse::<ExtRational>().unwrap(),
            ExtRational::ratio(5, 2)
        );
        assert_eq!(
            " 7/3 ".parse::<ExtRational>().unwrap(),
            ExtRational::ratio(7, 3)
        );
        assert_eq!("inf".parse::<ExtRational>().unwrap(), ExtRational::Infinite);
        assert_eq!("-3".parse::<ExtRational>().unwrap(), ExtRational::int(-3));
        assert!("1/0".parse::<ExtRational>().is_err());
        assert!("x".parse::<ExtRational>().is_err());
        assert!("1.".parse::<ExtRational>().is_err());
    }

    #[test]
    fn named_pairs_in_five_dimensions() {
        let d = 5;
        assert!(is_l2_admissible(
            d,
            &Pair::new(ExtRational::ratio(10, 3), ExtRational::int(2))
        ));
        assert!(is_l2_admissible(
            d,
            &Pair::new(ExtRational::int(2), ExtRational::Infinite)
        ));
        assert!(is_l2_admissible(
            d,
            &Pair::new(ExtRational::ratio(14, 5), ExtRational::ratio(14, 5))
        ));
        assert!(!is_l2_admissible(
            d,
            &Pair::new(ExtRational::int(3), ExtRational::int(3))
        ));
    }

    #[test]
    fn named_pairs_are_admissible() {
        for d in 3..=9 {
            for p in interior_p1(d, 7).unwrap() {
                let pairs = named_pairs(d, &p).unwrap();
                assert_eq!(pairs.len(), 5);
                for (name, pair) in &pairs {
                    assert!(is_l2_admissible(d, pair), "d={d} p={p} {name}: {pair:?}");
                }
                // diagonal exponent of the perturbative pair
                assert_eq!(
                    pairs[3].1.r,
                    ExtRational::Finite(rat(d as i64 + 2, 2) * (&p - BigRational::one()))
                );
            }
        }
        assert!(named_pairs(5, &q("3")).is_err());
    }

    #[test]
    fn printed_perturbative_pair_is_not_admissible() {
        // without the factor d in front of (d+2)(p-1)
        let (d, p) = (5i64, q("2"));
        let pm1 = &p - BigRational::one();
        let dd2 = rat(d + 2, 1);
        let printed = Pair::new(
            ExtRational::Finite(rat(2 * d, 1) * &dd2 * &pm1 / (&dd2 * &pm1 - rat(8, 1))),
            ExtRational::Finite(rat(d + 2, 2) * &pm1),
        );
        assert!(!is_l2_admissible(5, &printed));
    }

    #[test]
    fn exotic_example_d5_p2() {
        let e = exotic(5, &q("2")).unwrap();
        assert_eq!(e.alpha, q("39/19"));
        assert_eq!(e.s_alpha, q("3/5"));
        assert_eq!(s_p(5, &e.alpha).unwrap(), q("3/5"));
        assert!(q("43/23") < e.alpha && e.alpha < q("7/3"));
        // ρ = (39/19 + 1 + 10/3)/2
        assert_eq!(e.rho, (q("39/19") + q("1") + q("10/3")) / q("2"));
        assert!(e.certificates.invariants_pass(), "{:?}", e.certificates);
        assert!(e.certificates.gamma_exceeds_diagonal);
    }

    #[test]
    fn gamma_bound_fails_near_the_energy_critical_end() {
        let d5 = exotic(5, &q("22/10")).unwrap();
        assert!(d5.certificates.invariants_pass());
        assert!(!d5.certificates.gamma_exceeds_diagonal);
        assert!(
            exotic(5, &q("21/10"))
                .unwrap()
                .certificates
                .gamma_exceeds_diagonal
        );
        assert!(
            !exotic(6, &q("199/100"))
                .unwrap()
                .certificates
                .gamma_exceeds_diagonal
        );
        for p in interior_p1(7, 50).unwrap() {
            assert!(exotic(7, &p).unwrap().certificates.gamma_exceeds_diagonal);
        }
    }

    #[test]
    fn exotic_errors_and_small_dimensions() {
        assert_eq!(
            exotic(4, &q("5/2")),
            Err(ExponentError::DimensionTooSmall(4))
        );
        assert!(matches!(
            exotic(5, &q("7/3")),
            Err(ExponentError::P1OutOfRange { .. })
        ));
        assert!(matches!(
            exotic(5, &q("9/5")),
            Err(ExponentError::P1OutOfRange { .. })
        ));
        // d(d+2)(p1-1) = 16 at p1 = 51/35 for d = 5, outside the admissible range anyway
        assert_eq!(
            exotic(5, &q("51/35")),
            Err(ExponentError::DegenerateDenominator)
        );
        match exotic_or_ordinary(4, &q("5/2")).unwrap() {
            ExoticNorms::Ordinary(n) => {
                assert!(is_l2_admissible(4, &n.pair));
                assert_eq!(n.dual.q, ExtRational::ratio(3, 2));
            }
            ExoticNorms::Exotic(_) => panic!("d = 4 has no exotic exponents"),
        }
    }

    #[test]
    fn certificates_on_a_sweep() {
        for d in 5..=7 {
            for p in interior_p1(d, 20).unwrap() {
                let e = exotic(d, &p).unwrap();
                assert!(
                    e.certificates.invariants_pass(),
                    "d={d} p1={p}: {:?}",
                    e.certificates
                );
            }
        }
    }

    #[test]
    fn conjugate_endpoints() {
        assert_eq!(conjugate(&ExtRational::int(2)), ExtRational::int(2));
        assert_eq!(conjugate(&ExtRational::int(1)), ExtRational::Infinite);
        assert_eq!(conjugate(&ExtRational::Infinite), ExtRational::int(1));
    }

    proptest! {
        #[test]
        fn conjugate_is_an_involution(n in 2i64..10_000, m in 1i64..10_000) {
            prop_assume!(n > m);
            let x = ExtRational::ratio(n, m);
            prop_assert_eq!(conjugate(&conjugate(&x)), x);
        }

        #[test]
        fn parametric_pairs_round_trip(d in 3usize..12, k in 0i64..=1000) {
            // 1/q = 1/2 - t (d-2)/(2d) for t in [0, 1] covers [2, 2^*]
            let t = rat(k, 1000);
            let dd = rat(d as i64, 1);
            let inv_q = rat(1, 2) - &t * (&dd - rat(2, 1)) / (rat(2, 1) * &dd);
            let inv_r = (&dd / rat(2, 1)) * (rat(1, 2) - &inv_q);
            let pair = Pair::new(ExtRational::Finite(inv_q).recip(), ExtRational::Finite(inv_r).recip());
            prop_assert!(is_l2_admissible(d, &pair));
        }

        #[test]
        fn alpha_and_rho_decrease_in_p1(d in 5usize..=7, a in 1i64..999, b in 1i64..999) {
            prop_assume!(a < b);
            let (lo, hi) = p1_range(d).unwrap();
            let at = |k: i64| &lo + (&hi - &lo) * rat(k, 1000);
            let (e1, e2) = (exotic(d, &at(a)).unwrap(), exotic(d, &at(b)).unwrap());
            prop_assert!(e1.alpha > e2.alpha);
            prop_assert!(e1.rho > e2.rho);
        }
    }
}
