//! Fredholm index bookkeeping driven by cone rate spectra.
//!
//! Rates are exact elements `p + q√5` of `Q(√5)` whenever they come from
//! exact input, and plain floats otherwise. Two exact rates compare exactly;
//! any comparison involving a float goes through `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum Rate {
    /// `rational + sqrt5 * √5`.
    Exact { rational: Rational64, sqrt5: Rational64 },
    Float(f64),
}

impl Rate {
    pub fn integer(n: i64) -> Self {
        Rate::rational(Rational64::from_integer(n))
    }

    pub fn rational(q: Rational64) -> Self {
        Rate::Exact {
            rational: q,
            sqrt5: Rational64::zero(),
        }
    }

    pub fn quadratic(rational: Rational64, sqrt5: Rational64) -> Self {
        Rate::Exact { rational, sqrt5 }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Rate::Exact { rational, sqrt5 } => {
                ratio_f64(rational) + ratio_f64(sqrt5) * 5f64.sqrt()
            }
            Rate::Float(x) => x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Rate::Exact { .. })
    }
}

fn ratio_f64(q: Rational64) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Sign of `x + y√5`.
fn sign_quadratic(x: Rational64, y: Rational64) -> Ordering {
    let sx = x.cmp(&Rational64::zero());
    let sy = y.cmp(&Rational64::zero());
    if sx == sy || sy == Ordering::Equal {
        return sx;
    }
    if sx == Ordering::Equal {
        return sy;
    }
    // opposite signs: compare x^2 against 5 y^2 in i128 to avoid overflow
    let x2 = sq_i128(x);
    let y2 = sq_i128(y);
    let (xn, xd) = x2;
    let (yn, yd) = y2;
    let lhs = xn * yd;
    let rhs = 5 * yn * xd;
    match lhs.cmp(&rhs) {
        Ordering::Greater => sx,
        Ordering::Less => sy,
        Ordering::Equal => Ordering::Equal,
    }
}

fn sq_i128(q: Rational64) -> (i128, i128) {
    let n = *q.numer() as i128;
    let d = *q.denom() as i128;
    (n * n, d * d)
}

impl PartialEq for Rate {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Rate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (
                Rate::Exact { rational: a, sqrt5: b },
                Rate::Exact { rational: c, sqrt5: d },
            ) => Some(sign_quadratic(a - c, b - d)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rate::Float(x) => write!(f, "{x}"),
            Rate::Exact { rational, sqrt5 } => {
                if sqrt5.is_zero() {
                    return write!(f, "{rational}");
                }
                let s = if sqrt5.abs() == Rational64::from_integer(1) {
                    "sqrt5".to_string()
                } else {
                    format!("{}*sqrt5", sqrt5.abs())
                };
                match (rational.is_zero(), sqrt5.is_negative()) {
                    (true, false) => write!(f, "{s}"),
                    (true, true) => write!(f, "-{s}"),
                    (false, false) => write!(f, "{rational}+{s}"),
                    (false, true) => write!(f, "{rational}-{s}"),
                }
            }
        }
    }
}

fn parse_ratio(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

fn parse_sqrt5_coeff(s: &str) -> Option<Rational64> {
    // accepts "sqrt5", "2*sqrt5", "1/2*sqrt5", "sqrt(5)"
    let s = s.trim();
    let body = s
        .strip_suffix("sqrt5")
        .or_else(|| s.strip_suffix("sqrt(5)"))
        .or_else(|| s.strip_suffix("√5"))?;
    let body = body.trim().trim_end_matches('*').trim();
    if body.is_empty() {
        Some(Rational64::from_integer(1))
    } else {
        parse_ratio(body)
    }
}

impl FromStr for Rate {
    type Err = Error;

    /// Accepts `"-1"`, `"1/2"`, `"-1+sqrt5"`, `"2-3*sqrt5"`, `"sqrt5"`, or any
    /// decimal (stored as a float).
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty rate".into()));
        }
        if let Some(q) = parse_ratio(&t) {
            return Ok(Rate::rational(q));
        }
        if t.contains("sqrt") || t.contains('√') {
            // split at the last sign that is not the leading one
            let split = t
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last();
            let (rat, irr) = match split {
                Some(i) => (&t[..i], &t[i..]),
                None => ("0", t.as_str()),
            };
            let (neg, irr) = match irr.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, irr.strip_prefix('+').unwrap_or(irr)),
            };
            let rational = parse_ratio(rat).ok_or_else(|| Error::Parse(format!("bad rate {s:?}")))?;
            let coeff = parse_sqrt5_coeff(irr).ok_or_else(|| Error::Parse(format!("bad rate {s:?}")))?;
            return Ok(Rate::quadratic(rational, if neg { -coeff } else { coeff }));
        }
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Rate::Float)
            .ok_or_else(|| Error::Parse(format!("bad rate {s:?}")))
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Num(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Num(x) => Ok(Rate::Float(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub rate: Rate,
    pub mult: u32,
}

/// Critical rates with multiplicities `d(λ)`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSpectrum {
    rates: Vec<SpectrumEntry>,
}

impl RateSpectrum {
    /// Sorts the entries; fails on repeated rates or zero multiplicity.
    pub fn new(mut entries: Vec<SpectrumEntry>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.mult == 0) {
            return Err(Error::InvalidArgument(format!(
                "rate {} has zero multiplicity",
                e.rate
            )));
        }
        entries.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap_or(Ordering::Equal));
        for w in entries.windows(2) {
            if w[0].rate >= w[1].rate {
                return Err(Error::InvalidArgument(format!("repeated rate {}", w[0].rate)));
            }
        }
        Ok(Self { rates: entries })
    }

    pub fn empty() -> Self {
        Self { rates: Vec::new() }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.rates
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Lit {
            rates: Vec<SpectrumEntry>,
        }
        let lit: Lit = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(lit.rates)
    }

    pub fn multiplicity(&self, rate: &Rate) -> u32 {
        self.rates
            .iter()
            .find(|e| &e.rate == rate)
            .map_or(0, |e| e.mult)
    }

    pub fn is_critical(&self, rate: &Rate) -> bool {
        self.multiplicity(rate) > 0
    }

    /// Entries with `lo < rate < hi`.
    pub fn in_open_interval(&self, lo: &Rate, hi: &Rate) -> impl Iterator<Item = &SpectrumEntry> {
        let (lo, hi) = (*lo, *hi);
        self.rates.iter().filter(move |e| e.rate > lo && e.rate < hi)
    }

    pub fn total_multiplicity(&self, lo: &Rate, hi: &Rate) -> u64 {
        self.in_open_interval(lo, hi).map(|e| e.mult as u64).sum()
    }

    /// Largest negative rate, the critical weight `ζ`.
    pub fn zeta(&self) -> Option<Rate> {
        let zero = Rate::integer(0);
        self.rates.iter().rev().map(|e| e.rate).find(|r| *r < zero)
    }
}

/// Rate spectrum of the quadric cone on `(-2, 2)`.
pub fn quadric_spectrum() -> RateSpectrum {
    let one = Rational64::from_integer(1);
    RateSpectrum::new(vec![
        SpectrumEntry { rate: Rate::integer(-1), mult: 2 },
        SpectrumEntry { rate: Rate::integer(0), mult: 8 },
        SpectrumEntry { rate: Rate::integer(1), mult: 22 },
        SpectrumEntry { rate: Rate::quadratic(-one, one), mult: 6 },
    ])
    .expect("valid spectrum")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    #[serde(alias = "cs")]
    Cs,
    #[serde(alias = "ac")]
    Ac,
    #[serde(alias = "compact")]
    Compact,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CS" => Ok(Side::Cs),
            "AC" => Ok(Side::Ac),
            "COMPACT" => Ok(Side::Compact),
            _ => Err(Error::Parse(format!("unknown side {s:?}"))),
        }
    }
}

/// Index `base_index` known at the non-critical `base_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexProblem {
    pub side: Side,
    pub base_rate: Rate,
    pub base_index: i64,
}

impl IndexProblem {
    pub fn new(side: Side, base_rate: Rate, base_index: i64) -> Self {
        Self { side, base_rate, base_index }
    }
}

/// Moves the index from the base rate to `target`, adding (AC) or
/// subtracting (CS) `d(λ)` for each critical rate crossed upward.
pub fn index_at(prob: &IndexProblem, spectrum: &RateSpectrum, target: &Rate) -> Result<i64> {
    for r in [&prob.base_rate, target] {
        if spectrum.is_critical(r) {
            return Err(Error::CriticalRate(r.to_string()));
        }
    }
    let (lo, hi, dir) = if *target >= prob.base_rate {
        (prob.base_rate, *target, 1)
    } else {
        (*target, prob.base_rate, -1)
    };
    let jump = spectrum.total_multiplicity(&lo, &hi) as i64;
    Ok(match prob.side {
        Side::Ac => prob.base_index + dir * jump,
        Side::Cs => prob.base_index - dir * jump,
        Side::Compact => prob.base_index,
    })
}

/// Topology of a compact Cayley submanifold and its deformation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalData {
    pub sigma: i64,
    pub chi: i64,
    pub self_int: i64,
    pub dim_family: u64,
}

/// `(σ + χ)/2 − [N]·[N] + dim S`.
pub fn compact_index(t: &TopologicalData) -> Result<i64> {
    let s = t.sigma + t.chi;
    if s % 2 != 0 {
        return Err(Error::Parity(s));
    }
    Ok(s / 2 - t.self_int + t.dim_family as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingIndex {
    pub index: i64,
    pub negative_virtual_dimension: bool,
}

/// Index of the conically singular piece: `ind_F − Σ ind_AC`.
pub fn cs_index_by_gluing(ind_f: i64, ind_ac: &[i64]) -> GluingIndex {
    let index = ind_f - ind_ac.iter().sum::<i64>();
    GluingIndex {
        index,
        negative_virtual_dimension: index < 0,
    }
}

/// No critical rate strictly between 0 and 1.
pub fn is_semistable(spectrum: &RateSpectrum) -> bool {
    spectrum
        .in_open_interval(&Rate::integer(0), &Rate::integer(1))
        .next()
        .is_none()
}

pub fn is_simple(spectrum: &RateSpectrum, index_below_zeta: i64) -> Result<bool> {
    spectrum.zeta().ok_or(Error::NoNegativeRate)?;
    Ok(index_below_zeta == 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rate {
        s.parse().unwrap()
    }

    #[test]
    fn parses_rates() {
        assert_eq!(r("-1"), Rate::integer(-1));
        assert_eq!(r("1/2"), Rate::rational(Rational64::new(1, 2)));
        let q = r("-1+sqrt5");
        assert!((q.to_f64() - (5f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(q.is_exact());
        assert_eq!(r("2 - 3*sqrt5").to_f64(), 2.0 - 3.0 * 5f64.sqrt());
        assert_eq!(r("-sqrt5"), Rate::quadratic(Rational64::zero(), Rational64::from_integer(-1)));
        assert!(!r("0.25").is_exact());
        assert!("abc".parse::<Rate>().is_err());
        assert_eq!(r("-1+sqrt5").to_string(), "-1+sqrt5");
        assert_eq!(r(&r("1/3-2*sqrt5").to_string()), r("1/3-2*sqrt5"));
    }

    #[test]
    fn exact_comparisons() {
        assert!(r("-1+sqrt5") > Rate::integer(1));
        assert!(r("-1+sqrt5") < Rate::rational(Rational64::new(5, 4)));
        assert!(r("9/4-sqrt5") > Rate::integer(0)); // 2.25 > 2.236
        assert!(r("2-sqrt5") < Rate::integer(0));
        assert!(r("-1+sqrt5") > Rate::Float(1.2));
    }

    #[test]
    fn quadric_spectrum_data() {
        let s = quadric_spectrum();
        assert_eq!(s.multiplicity(&Rate::integer(0)), 8);
        let rates: Vec<f64> = s.entries().iter().map(|e| e.rate.to_f64()).collect();
        assert_eq!(rates.len(), 4);
        assert_eq!(&rates[..3], &[-1.0, 0.0, 1.0]);
        assert!((rates[3] - 1.2360679774997898).abs() < 1e-15);
        assert_eq!(s.total_multiplicity(&Rate::integer(-2), &Rate::integer(2)), 38);
        assert_eq!(s.zeta(), Some(Rate::integer(-1)));
    }

    #[test]
    fn index_crossings() {
        let s = quadric_spectrum();
        let ac = IndexProblem::new(Side::Ac, Rate::Float(-0.5), 2);
        assert_eq!(index_at(&ac, &s, &Rate::Float(0.5)).unwrap(), 10);
        let cs = IndexProblem::new(Side::Cs, Rate::Float(-0.1), 4);
        assert_eq!(index_at(&cs, &s, &Rate::Float(0.1)).unwrap(), -4);
        for side in [Side::Ac, Side::Cs, Side::Compact] {
            let p = IndexProblem::new(side, Rate::Float(0.2), 7);
            assert_eq!(index_at(&p, &s, &Rate::Float(0.9)).unwrap(), 7);
        }
        let c = IndexProblem::new(Side::Compact, Rate::Float(-1.5), 3);
        assert_eq!(index_at(&c, &s, &Rate::Float(1.5)).unwrap(), 3);
        assert_eq!(
            index_at(&ac, &s, &Rate::integer(0)),
            Err(Error::CriticalRate("0".into()))
        );
    }

    #[test]
    fn crossing_whole_window() {
        let s = quadric_spectrum();
        let ac = IndexProblem::new(Side::Ac, Rate::Float(-1.1), 0);
        assert_eq!(index_at(&ac, &s, &Rate::Float(1.1)).unwrap(), 32);
        let cs = IndexProblem::new(Side::Cs, Rate::Float(-1.1), 0);
        assert_eq!(index_at(&cs, &s, &Rate::Float(1.1)).unwrap(), -32);
    }

    #[test]
    fn compact_indices() {
        let t = |sigma, chi, self_int, dim_family| TopologicalData { sigma, chi, self_int, dim_family };
        assert_eq!(compact_index(&t(-16, 24, 0, 0)).unwrap(), 4);
        assert_eq!(compact_index(&t(-16, 24, 0, 2)).unwrap(), 6);
        assert_eq!(compact_index(&t(0, 2, 1, 0)).unwrap(), 0);
        assert_eq!(compact_index(&t(1, 2, 0, 0)), Err(Error::Parity(3)));
    }

    #[test]
    fn gluing_indices() {
        assert_eq!(cs_index_by_gluing(4, &[2]).index, 2);
        let two = cs_index_by_gluing(4, &[2, 2]);
        assert_eq!((two.index, two.negative_virtual_dimension), (0, false));
        let three = cs_index_by_gluing(4, &[2, 2, 2]);
        assert_eq!((three.index, three.negative_virtual_dimension), (-2, true));
        // compact index is recovered from the pieces
        let fs = cs_index_by_gluing(4, &[2]);
        assert_eq!(fs.index + 2, compact_index(&TopologicalData { sigma: -16, chi: 24, self_int: 0, dim_family: 0 }).unwrap());
    }

    #[test]
    fn stability_and_simpleness() {
        assert!(is_semistable(&quadric_spectrum()));
        assert!(is_semistable(&RateSpectrum::empty()));
        let half = RateSpectrum::new(vec![SpectrumEntry { rate: r("1/2"), mult: 1 }]).unwrap();
        assert!(!is_semistable(&half));
        assert!(is_simple(&quadric_spectrum(), 4).unwrap());
        assert!(!is_simple(&quadric_spectrum(), 2).unwrap());
        assert_eq!(is_simple(&half, 4), Err(Error::NoNegativeRate));
    }

    #[test]
    fn spectrum_json() {
        let s = RateSpectrum::from_json_str(
            r#"{"rates": [{"rate": "0", "mult": 8}, {"rate": "-1", "mult": 2},
                {"rate": "-1+sqrt5", "mult": 6}, {"rate": "1", "mult": 22}]}"#,
        )
        .unwrap();
        assert_eq!(s, quadric_spectrum());
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(RateSpectrum::from_json_str(&back).unwrap(), s);
        assert!(RateSpectrum::from_json_str(r#"{"rates": [{"rate": "1", "mult": 0}]}"#).is_err());
        assert!(RateSpectrum::from_json_str(r#"{"rates": [{"rate": "1", "mult": 1}, {"rate": "2/2", "mult": 1}]}"#).is_err());
    }

    fn noncritical() -> impl Strategy<Value = f64> {
        (-3.0f64..3.0).prop_filter("non-critical", |x| {
            [-1.0, 0.0, 1.0, 5f64.sqrt() - 1.0].iter().all(|c| (x - c).abs() > 1e-9)
        })
    }

    proptest! {
        #[test]
        fn index_is_transitive(a in noncritical(), b in noncritical(), c in noncritical(), base in -50i64..50) {
            let s = quadric_spectrum();
            for side in [Side::Ac, Side::Cs, Side::Compact] {
                let p = IndexProblem::new(side, Rate::Float(a), base);
                let mid = index_at(&p, &s, &Rate::Float(b)).unwrap();
                let q = IndexProblem::new(side, Rate::Float(b), mid);
                prop_assert_eq!(index_at(&q, &s, &Rate::Float(c)).unwrap(), index_at(&p, &s, &Rate::Float(c)).unwrap());
            }
        }

        #[test]
        fn index_is_monotone(a in noncritical(), b in noncritical(), c in noncritical()) {
            let s = quadric_spectrum();
            let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
            let ac = IndexProblem::new(Side::Ac, Rate::Float(a), 0);
            prop_assert!(index_at(&ac, &s, &Rate::Float(lo)).unwrap() <= index_at(&ac, &s, &Rate::Float(hi)).unwrap());
            let cs = IndexProblem::new(Side::Cs, Rate::Float(a), 0);
            prop_assert!(index_at(&cs, &s, &Rate::Float(lo)).unwrap() >= index_at(&cs, &s, &Rate::Float(hi)).unwrap());
        }

        #[test]
        fn exact_order_matches_float(p in -20i64..20, q in -20i64..20, d in 1i64..7, p2 in -20i64..20, q2 in -20i64..20) {
            let x = Rate::quadratic(Rational64::new(p, d), Rational64::new(q, d));
            let y = Rate::quadratic(Rational64::from_integer(p2), Rational64::from_integer(q2));
            let (fx, fy) = (x.to_f64(), y.to_f64());
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(x.partial_cmp(&y), fx.partial_cmp(&fy));
            }
        }
    }
}
