//! Twisted-connected-sum bookkeeping: the genus-one Heegaard gluing of the
//! base, matching of the asymptotic G2 forms across the neck, singular fibre
//! counts and the neck-length threshold.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg;

/// Betti numbers of the glued manifold, carried as reference values.
pub const REFERENCE_B2: u32 = 0;
pub const REFERENCE_B3: u32 = 155;

/// Integer 2×2 gluing of the boundary tori, `(a, b) ↦ g (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingMatrix {
    a: [[i64; 2]; 2],
}

impl GluingMatrix {
    pub fn new(a: [[i64; 2]; 2]) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det));
        }
        Ok(Self { a })
    }

    /// Parses `"a,b,c,d"` in row-major order.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<i64> = s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad matrix entry {x:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: v.len() });
        }
        Self::new([[v[0], v[1]], [v[2], v[3]]])
    }

    /// The circle swap `(a, b) ↦ (b, a)`.
    pub fn swap() -> Self {
        Self { a: [[0, 1], [1, 0]] }
    }

    pub fn identity() -> Self {
        Self { a: [[1, 0], [0, 1]] }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.a
    }

    pub fn apply(&self, v: [i64; 2]) -> [i64; 2] {
        [
            self.a[0][0] * v[0] + self.a[0][1] * v[1],
            self.a[1][0] * v[0] + self.a[1][1] * v[1],
        ]
    }

    pub fn mul(&self, other: &GluingMatrix) -> GluingMatrix {
        let mut a = [[0; 2]; 2];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.a[i][0] * other.a[0][j] + self.a[i][1] * other.a[1][j];
            }
        }
        GluingMatrix { a }
    }
}

/// Invariant factors of `H_1 = Z² / ⟨m, g m⟩` with meridian `m = (1, 0)`;
/// `0` stands for a free `Z` summand and the empty list for the trivial group.
pub fn torus_gluing_homology(g: &GluingMatrix) -> Vec<u64> {
    let m = [1, 0];
    let gm = g.apply(m);
    let rel: intlinalg::IntMatrix = [m, gm]
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let inv = intlinalg::smith_invariants(&rel);
    let mut out: Vec<u64> = inv
        .iter()
        .filter_map(|d| d.to_u64())
        .filter(|&d| d != 1)
        .collect();
    out.extend(std::iter::repeat_n(0, 2 - inv.len()));
    out
}

/// Odd generators, in wedge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Odd {
    Dt,
    DThetaA,
    DThetaB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum End {
    Plus,
    Minus,
}

/// The 2-form `ω^k_±` of the K3 at one end, `k ∈ {1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Omega {
    pub k: u8,
    pub end: End,
}

pub fn omega(k: u8, end: End) -> Omega {
    Omega { k, end }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Odd(Odd),
    Omega(Omega),
}

type Word = (Vec<Odd>, Vec<Omega>);

/// Integer combination of wedge words. Odd generators anticommute and are
/// kept sorted with sign tracking; the degree-2 symbols commute with
/// everything and are kept as a sorted multiset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormalForm {
    terms: BTreeMap<Word, i64>,
}

impl FormalForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn generator(g: Generator) -> Self {
        Self::word(1, &[g])
    }

    /// `c · g_1 ∧ ... ∧ g_n`.
    pub fn word(c: i64, gens: &[Generator]) -> Self {
        let mut odd = Vec::new();
        let mut even = Vec::new();
        for g in gens {
            match g {
                Generator::Odd(o) => odd.push(*o),
                Generator::Omega(w) => even.push(*w),
            }
        }
        let mut out = Self::zero();
        if let Some(sign) = sort_odd(&mut odd) {
            even.sort();
            out.add_word((odd, even), sign * c);
        }
        out
    }

    fn add_word(&mut self, w: Word, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(w.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&w);
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_word(w.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: i64) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_word(w.clone(), c * s);
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((o1, e1), c1) in &self.terms {
            for ((o2, e2), c2) in &other.terms {
                let mut odd: Vec<Odd> = o1.iter().chain(o2).copied().collect();
                let Some(sign) = sort_odd(&mut odd) else {
                    continue;
                };
                let mut even: Vec<Omega> = e1.iter().chain(e2).copied().collect();
                even.sort();
                out.add_word((odd, even), sign * c1 * c2);
            }
        }
        out
    }

    /// Pullback under a generator-wise linear substitution.
    pub fn substitute(&self, sub: &Substitution) -> Self {
        let mut out = Self::zero();
        for ((odd, even), c) in &self.terms {
            let mut img = FormalForm::word(*c, &[]);
            for o in odd {
                img = img.wedge(&sub.image(Generator::Odd(*o)));
            }
            for w in even {
                img = img.wedge(&sub.image(Generator::Omega(*w)));
            }
            out = out.add(&img);
        }
        out
    }
}

fn sort_odd(v: &mut [Odd]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl fmt::Display for FormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((odd, even), c) in &self.terms {
            let mut parts: Vec<String> = odd
                .iter()
                .map(|o| match o {
                    Odd::Dt => "dt".to_string(),
                    Odd::DThetaA => "dθa".to_string(),
                    Odd::DThetaB => "dθb".to_string(),
                })
                .collect();
            parts.extend(even.iter().map(|w| {
                format!("ω{}{}", w.k, if w.end == End::Plus { "+" } else { "-" })
            }));
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { format!("{} ", c.abs()) };
            write!(f, "{}{sign} {mag}{}", if first { "" } else { " " }, parts.join("∧"))?;
            first = false;
        }
        Ok(())
    }
}

/// `φ_∞ = dθa∧dt∧dθb + dθa∧ω¹ + dθb∧ω² + dt∧ω³` at the given end.
pub fn asymptotic_g2_form(end: End) -> FormalForm {
    use Generator::{Odd as O, Omega as W};
    FormalForm::word(1, &[O(Odd::DThetaA), O(Odd::Dt), O(Odd::DThetaB)])
        .add(&FormalForm::word(1, &[O(Odd::DThetaA), W(omega(1, end))]))
        .add(&FormalForm::word(1, &[O(Odd::DThetaB), W(omega(2, end))]))
        .add(&FormalForm::word(1, &[O(Odd::Dt), W(omega(3, end))]))
}

/// Which pullback to apply across the neck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstitutionKind {
    /// Hyperkähler rotation `ω¹ ↔ ω²`, `ω³ ↦ −ω³`, with `dt ↦ −dt`, `θa ↔ θb`.
    Rotation,
    /// Circle swap and `dt` flip, K3 forms carried over unchanged.
    Identity,
    /// Rotation without the `dt ↦ −dt` flip.
    NoDtFlip,
    /// Reading `ω¹ ↦ ω²`, `ω² ↦ ω²`, `ω³ ↦ −ω³`.
    LiteralTypo,
}

impl SubstitutionKind {
    pub const ALL: [SubstitutionKind; 4] = [
        SubstitutionKind::Rotation,
        SubstitutionKind::Identity,
        SubstitutionKind::NoDtFlip,
        SubstitutionKind::LiteralTypo,
    ];
}

/// Generator-wise substitution, applied symmetrically to both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub kind: SubstitutionKind,
}

impl Substitution {
    pub fn new(kind: SubstitutionKind) -> Self {
        Self { kind }
    }

    pub fn image(&self, g: Generator) -> FormalForm {
        use SubstitutionKind::*;
        let flip_dt = self.kind != NoDtFlip;
        match g {
            Generator::Odd(Odd::Dt) => {
                FormalForm::generator(g).scale(if flip_dt { -1 } else { 1 })
            }
            Generator::Odd(Odd::DThetaA) => FormalForm::generator(Generator::Odd(Odd::DThetaB)),
            Generator::Odd(Odd::DThetaB) => FormalForm::generator(Generator::Odd(Odd::DThetaA)),
            Generator::Omega(w) => {
                let other = if w.end == End::Plus { End::Minus } else { End::Plus };
                let (k, sign) = match (self.kind, w.k) {
                    (Identity, k) => (k, 1),
                    (_, 3) => (3, -1),
                    (LiteralTypo, _) => (2, 1),
                    (_, 1) => (2, 1),
                    (_, _) => (1, 1),
                };
                FormalForm::generator(Generator::Omega(omega(k, other))).scale(sign)
            }
        }
    }
}

/// Whether pulling back `φ_{∞,−}` under the substitution yields `φ_{∞,+}`.
pub fn neck_form_matching_with(kind: SubstitutionKind) -> bool {
    asymptotic_g2_form(End::Minus).substitute(&Substitution::new(kind)) == asymptotic_g2_form(End::Plus)
}

/// Matching under the hyperkähler-rotation substitution.
pub fn neck_form_matching() -> bool {
    neck_form_matching_with(SubstitutionKind::Rotation)
}

/// One building block with its number of singular fibres.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TCSPiece {
    pub label: String,
    pub singular_fiber_count: u64,
}

impl TCSPiece {
    pub fn new(label: impl Into<String>, singular_fiber_count: u64) -> Self {
        Self { label: label.into(), singular_fiber_count }
    }
}

pub fn glued_singular_count(pieces: &[TCSPiece]) -> u64 {
    pieces.iter().map(|p| p.singular_fiber_count).sum()
}

/// Smallest neck length with `e^{λT} < 1 − e^{λT}` on the boundary:
/// `T = ln 2 / (−λ)`.
pub fn torsion_threshold(lambda: f64) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} must be negative")));
    }
    Ok(std::f64::consts::LN_2 / -lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn base_gluings() {
        assert!(torus_gluing_homology(&GluingMatrix::swap()).is_empty());
        assert_eq!(torus_gluing_homology(&GluingMatrix::identity()), vec![0]);
        for p in 2..12 {
            let g = GluingMatrix::new([[1, 0], [p, 1]]).unwrap();
            assert_eq!(torus_gluing_homology(&g), vec![p as u64]);
        }
        assert_eq!(GluingMatrix::new([[2, 0], [0, 1]]), Err(Error::NotUnimodular(2)));
        assert_eq!(GluingMatrix::parse("0,1,1,0").unwrap(), GluingMatrix::swap());
        assert!(GluingMatrix::parse("0,1,1").is_err());
    }

    #[test]
    fn forms_match_only_under_rotation() {
        assert!(neck_form_matching());
        assert!(!neck_form_matching_with(SubstitutionKind::Identity));
        assert!(!neck_form_matching_with(SubstitutionKind::NoDtFlip));
        assert!(!neck_form_matching_with(SubstitutionKind::LiteralTypo));
    }

    #[test]
    fn identity_substitution_moves_theta_a_term() {
        let img = asymptotic_g2_form(End::Minus).substitute(&Substitution::new(SubstitutionKind::Identity));
        let stray = FormalForm::word(1, &[Generator::Odd(Odd::DThetaB), Generator::Omega(omega(1, End::Plus))]);
        // the image contains dθb∧ω¹+, which φ_{∞,+} lacks
        assert_eq!(img.add(&stray.scale(-1)).num_terms(), img.num_terms() - 1);
    }

    #[test]
    fn rotation_is_an_involution() {
        let sub = Substitution::new(SubstitutionKind::Rotation);
        let phi = asymptotic_g2_form(End::Minus);
        assert_eq!(phi.substitute(&sub).substitute(&sub), phi);
    }

    #[test]
    fn wedge_signs() {
        let dt = FormalForm::generator(Generator::Odd(Odd::Dt));
        let da = FormalForm::generator(Generator::Odd(Odd::DThetaA));
        let w = FormalForm::generator(Generator::Omega(omega(1, End::Plus)));
        assert_eq!(dt.wedge(&da), da.wedge(&dt).scale(-1));
        assert_eq!(dt.wedge(&dt), FormalForm::zero());
        assert_eq!(dt.wedge(&w), w.wedge(&dt));
        assert_eq!(asymptotic_g2_form(End::Plus).num_terms(), 4);
    }

    #[test]
    fn singular_counts() {
        let q = TCSPiece::new("quartic", 108);
        assert_eq!(glued_singular_count(&[q.clone(), q.clone()]), 216);
        assert_eq!(glued_singular_count(&[q.clone(), TCSPiece::new("empty", 0)]), 108);
        assert_eq!(glued_singular_count(&[]), 0);
    }

    #[test]
    #[allow(clippy::approx_constant)] // literal oracle for ln 2
    fn torsion_thresholds() {
        let t = torsion_threshold(-1.0).unwrap();
        assert!((t - 0.6931471805599453).abs() < 1e-15);
        assert!((torsion_threshold(-std::f64::consts::LN_2).unwrap() - 1.0).abs() < 1e-15);
        for lambda in [-0.1, -1.0, -7.5] {
            let t = torsion_threshold(lambda).unwrap();
            assert!(((lambda * t).exp() - 0.5).abs() < 1e-12);
        }
        assert!(torsion_threshold(0.0).is_err());
    }

    fn unimodular() -> impl Strategy<Value = GluingMatrix> {
        // products of elementary matrices
        prop::collection::vec((0usize..3, -3i64..=3), 1..5).prop_map(|ops| {
            let mut g = GluingMatrix::identity();
            for (kind, k) in ops {
                let e = match kind {
                    0 => [[1, k], [0, 1]],
                    1 => [[1, 0], [k, 1]],
                    _ => [[0, 1], [1, 0]],
                };
                g = g.mul(&GluingMatrix::new(e).unwrap());
            }
            g
        })
    }

    proptest! {
        #[test]
        fn homology_ignores_meridian_stabilizers(g in unimodular(), b in -5i64..5, d in prop::bool::ANY) {
            let d = if d { 1 } else { -1 };
            let h = GluingMatrix::new([[1, b], [0, d]]).unwrap();
            prop_assert_eq!(torus_gluing_homology(&g.mul(&h)), torus_gluing_homology(&g));
            prop_assert_eq!(torus_gluing_homology(&h.mul(&g)), torus_gluing_homology(&g));
        }

        #[test]
        fn lens_family(p in 1i64..200, q in -50i64..50) {
            // (1,0) ↦ (x, p): the quotient is Z/p
            let g = GluingMatrix::new([[1 + q * p, q], [p, 1]]).unwrap();
            let expect: Vec<u64> = if p == 1 { vec![] } else { vec![p as u64] };
            prop_assert_eq!(torus_gluing_homology(&g), expect);
        }

        #[test]
        fn counts_are_additive(a in prop::collection::vec(0u64..1000, 0..6), b in prop::collection::vec(0u64..1000, 0..6)) {
            let pa: Vec<TCSPiece> = a.iter().map(|&c| TCSPiece::new("a", c)).collect();
            let pb: Vec<TCSPiece> = b.iter().map(|&c| TCSPiece::new("b", c)).collect();
            let mut all = pa.clone();
            all.extend(pb.iter().cloned());
            prop_assert_eq!(glued_singular_count(&all), glued_singular_count(&pa) + glued_singular_count(&pb));
            all.reverse();
            prop_assert_eq!(glued_singular_count(&all), glued_singular_count(&pa) + glued_singular_count(&pb));
        }
    }
}
