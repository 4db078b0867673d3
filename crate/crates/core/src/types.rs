//! Quotient types, hyperquotient types, weightings and monomial supports.
//!
//! Text forms are the interchange format of the CLI and of report files:
//! `1/13(3,4,5)`, `1/13(3,4,7,0;0)`, `(3,4,5)/13` and `xy+z^5+t^2`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{gcd, mul_mod, residue, Rational};
use crate::error::{Error, Result};

fn parse_int_list(s: &str, what: &str) -> Result<Vec<i64>> {
    if s.trim().is_empty() {
        return Err(Error::Parse(format!("empty {what} list")));
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("invalid {what} `{}`", t.trim())))
        })
        .collect()
}

/// Splits `1/r(body)` into `(r, body)`.
fn split_type_string(s: &str) -> Result<(u64, &str)> {
    let s = s.trim();
    let rest = s
        .strip_prefix("1/")
        .ok_or_else(|| Error::Parse(format!("type `{s}` must start with `1/`")))?;
    let open = rest
        .find('(')
        .ok_or_else(|| Error::Parse(format!("type `{s}` is missing `(`")))?;
    let body = rest[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("type `{s}` is missing `)`")))?;
    let r: u64 = rest[..open]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid index in `{s}`")))?;
    if r == 0 {
        return Err(Error::Parse(format!("index must be positive in `{s}`")));
    }
    Ok((r, body))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Cyclic quotient type `1/r(a_0, ..., a_n)` with weights reduced into `[0, r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuotientType {
    r: u64,
    weights: Vec<u64>,
}

impl QuotientType {
    /// Builds a type from arbitrary integer weights, reducing them modulo `r`.
    pub fn new(r: u64, weights: &[i64]) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidType("index r must be positive".into()));
        }
        if weights.len() < 2 {
            return Err(Error::InvalidType(
                "a quotient type needs at least two weights".into(),
            ));
        }
        Ok(QuotientType {
            r,
            weights: weights.iter().map(|&w| residue(w as i128, r)).collect(),
        })
    }

    pub fn from_residues(r: u64, weights: Vec<u64>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidType("index r must be positive".into()));
        }
        if weights.len() < 2 {
            return Err(Error::InvalidType(
                "a quotient type needs at least two weights".into(),
            ));
        }
        Ok(QuotientType {
            r,
            weights: weights.into_iter().map(|w| w % r).collect(),
        })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Number of coordinates `n + 1`.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// True iff `gcd(a_i, r) = 1` for every weight. A zero weight counts as `gcd = r`.
    pub fn is_isolated(&self) -> bool {
        self.weights.iter().all(|&a| gcd(a, self.r) == 1)
    }

    /// True iff no group element fixes a hyperplane pointwise.
    pub fn is_small_action(&self) -> bool {
        (1..self.r).all(|k| {
            self.weights
                .iter()
                .filter(|&&a| mul_mod(a, k, self.r) != 0)
                .count()
                != 1
        })
    }

    /// True iff the weights generate `Z/r`, i.e. the action is faithful.
    pub fn is_faithful(&self) -> bool {
        self.weights.iter().fold(self.r, |g, &a| gcd(g, a)) == 1
    }
}

impl fmt::Display for QuotientType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}({})", self.r, join(&self.weights))
    }
}

impl FromStr for QuotientType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, body) = split_type_string(s)?;
        if body.contains(';') {
            return Err(Error::Parse(format!(
                "`{s}` is a hyperquotient type, expected a quotient type"
            )));
        }
        QuotientType::new(r, &parse_int_list(body, "weight")?)
    }
}

/// Hyperquotient type `1/r(a, b, c, d; e)`: weights of `x, y, z, t` and of the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperquotientType {
    r: u64,
    a: [u64; 4],
    e: u64,
}

impl HyperquotientType {
    pub fn new(r: u64, a: [i64; 4], e: i64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidType("index r must be positive".into()));
        }
        Ok(HyperquotientType {
            r,
            a: a.map(|w| residue(w as i128, r)),
            e: residue(e as i128, r),
        })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    /// The four ambient weights `(a, b, c, d)`.
    pub fn weights(&self) -> [u64; 4] {
        self.a
    }

    pub fn e(&self) -> u64 {
        self.e
    }

    /// `residue(a_i * k, r)` for all four ambient weights.
    pub fn residues_at(&self, k: u64) -> [u64; 4] {
        self.a.map(|w| mul_mod(w, k, self.r))
    }

    pub fn e_residue_at(&self, k: u64) -> u64 {
        mul_mod(self.e, k, self.r)
    }

    /// Ambient quotient type `1/r(a, b, c, d)`.
    pub fn ambient(&self) -> QuotientType {
        QuotientType {
            r: self.r,
            weights: self.a.to_vec(),
        }
    }
}

impl fmt::Display for HyperquotientType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}({};{})", self.r, join(&self.a), self.e)
    }
}

impl FromStr for HyperquotientType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(inner) = s.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            // tuple form `(r; a,b,c,d; e)`
            let (r, body) = inner
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("tuple `{s}` needs `r;`")))?;
            return format!("1/{}({})", r.trim(), body).parse();
        }
        let (r, body) = split_type_string(s)?;
        let (ws, e) = body
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("hyperquotient type `{s}` needs `;e`")))?;
        let ws = parse_int_list(ws, "weight")?;
        if ws.len() != 4 {
            return Err(Error::Parse(format!(
                "hyperquotient type `{s}` needs four weights, got {}",
                ws.len()
            )));
        }
        let e: i64 = e
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid equation weight in `{s}`")))?;
        HyperquotientType::new(r, [ws[0], ws[1], ws[2], ws[3]], e)
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(QuotientType);
string_serde!(HyperquotientType);
string_serde!(Weighting);
string_serde!(MonomialSupport);

/// Returns `j` with `coords ≡ j * weights (mod r)`, if any.
pub fn lattice_class(r: u64, coords: &[u64], weights: &[u64]) -> Option<u64> {
    if coords.len() != weights.len() {
        return None;
    }
    (0..r).find(|&j| {
        coords
            .iter()
            .zip(weights)
            .all(|(&b, &a)| b % r == mul_mod(a, j, r))
    })
}

/// Weighting `(1/r)(b_0, ..., b_n)` in `N ∩ σ`, stored as the scaled integer vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weighting {
    r: u64,
    coords: Vec<u64>,
}

impl Weighting {
    /// Builds a weighting and verifies membership in the lattice of the ambient weights.
    pub fn new(r: u64, coords: Vec<u64>, ambient: &[u64]) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidType("denominator must be positive".into()));
        }
        if coords.len() != ambient.len() {
            return Err(Error::DimensionMismatch {
                expected: ambient.len(),
                got: coords.len(),
            });
        }
        if lattice_class(r, &coords, ambient).is_none() {
            let w = Weighting { r, coords };
            return Err(Error::NotInLattice(format!("{w}")));
        }
        Ok(Weighting { r, coords })
    }

    /// `α_k = (1/r)(residue(a_i k))`.
    pub fn alpha_k(r: u64, ambient: &[u64], k: u64) -> Self {
        Weighting {
            r,
            coords: ambient.iter().map(|&a| mul_mod(a, k, r)).collect(),
        }
    }

    /// Builds without a membership check. Callers guarantee the coordinates are
    /// `j * a_i (mod r)` plus non-negative multiples of `r`.
    pub(crate) fn from_trusted(r: u64, coords: Vec<u64>) -> Self {
        Weighting { r, coords }
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_member_of(&self, ambient: &[u64]) -> bool {
        lattice_class(self.r, &self.coords, ambient).is_some()
    }

    /// `α(x_0 ⋯ x_n)`.
    pub fn total(&self) -> Rational {
        Rational::new(self.coords.iter().sum::<u64>(), self.r)
    }

    /// `(1, ..., 1) - α`, defined when every coordinate is at most 1.
    pub fn mirror(&self) -> Option<Self> {
        if self.coords.iter().any(|&b| b > self.r) {
            return None;
        }
        Some(Weighting {
            r: self.r,
            coords: self.coords.iter().map(|&b| self.r - b).collect(),
        })
    }

    /// Scaled weight `r · α(x^m)` of a monomial.
    pub fn scaled_weight(&self, m: &[u32]) -> Result<u64> {
        if m.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                got: m.len(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(m)
            .map(|(&b, &e)| b * e as u64)
            .sum())
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/{}", join(&self.coords), self.r)
    }
}

/// Structural parse of `(b_0,...,b_n)/r`; lattice membership is checked by
/// [`Weighting::is_member_of`] once the ambient type is known.
impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid weighting `{s}`"));
        let (body, r) = s.rsplit_once('/').ok_or_else(bad)?;
        let body = body
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(bad)?;
        let r: u64 = r.trim().parse().map_err(|_| bad())?;
        if r == 0 {
            return Err(bad());
        }
        let coords = parse_int_list(body, "coordinate")?
            .into_iter()
            .map(|c| u64::try_from(c).map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Weighting { r, coords })
    }
}

/// `α(x^m) = Σ m_i α(x_i)`.
pub fn weight_of_monomial(alpha: &Weighting, m: &[u32]) -> Result<Rational> {
    Ok(Rational::new(alpha.scaled_weight(m)?, alpha.r))
}

/// `α(f) = min { α(x^m) : x^m ∈ f }`.
pub fn weight_of_support(alpha: &Weighting, f: &MonomialSupport) -> Result<Rational> {
    let best = scaled_weight_of_support(alpha, f)?;
    Ok(Rational::new(best, alpha.r))
}

pub(crate) fn scaled_weight_of_support(alpha: &Weighting, f: &MonomialSupport) -> Result<u64> {
    if f.nvars() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: f.nvars(),
        });
    }
    f.iter()
        .map(|m| alpha.scaled_weight(m))
        .try_fold(None, |acc: Option<u64>, w| {
            let w = w?;
            Ok(Some(acc.map_or(w, |a| a.min(w))))
        })?
        .ok_or(Error::EmptySupport)
}

pub const VARIABLES: [char; 4] = ['x', 'y', 'z', 't'];

/// Set of exponent vectors of the monomials appearing in a polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialSupport {
    nvars: usize,
    monomials: BTreeSet<Vec<u32>>,
}

impl MonomialSupport {
    pub fn new(nvars: usize, monomials: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for m in monomials {
            if m.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: m.len(),
                });
            }
            set.insert(m);
        }
        Ok(MonomialSupport {
            nvars,
            monomials: set,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn contains(&self, m: &[u32]) -> bool {
        self.monomials.contains(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.monomials.iter()
    }

    pub fn union(&self, other: &MonomialSupport) -> Result<MonomialSupport> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        MonomialSupport::new(
            self.nvars,
            self.monomials.iter().chain(&other.monomials).cloned(),
        )
    }
}

fn render_monomial(m: &[u32]) -> String {
    let mut out = String::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => out.push(VARIABLES[i]),
            _ => {
                out.push(VARIABLES[i]);
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
    }
    if out.is_empty() {
        out.push('1');
    }
    out
}

impl fmt::Display for MonomialSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .monomials
            .iter()
            .rev()
            .map(|m| render_monomial(m))
            .collect();
        write!(f, "{}", terms.join("+"))
    }
}

fn parse_monomial(term: &str) -> Result<Vec<u32>> {
    let mut exps = vec![0u32; 4];
    let chars: Vec<char> = term.chars().filter(|c| !c.is_whitespace()).collect();
    if chars == ['1'] {
        return Ok(exps);
    }
    if chars.is_empty() {
        return Err(Error::Parse("empty monomial".into()));
    }
    let mut i = 0;
    while i < chars.len() {
        let var = VARIABLES
            .iter()
            .position(|&v| v == chars[i])
            .ok_or_else(|| Error::Parse(format!("unknown variable `{}` in `{term}`", chars[i])))?;
        i += 1;
        let mut exp = 1u32;
        if i < chars.len() && chars[i] == '^' {
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            exp = digits
                .parse()
                .map_err(|_| Error::Parse(format!("invalid exponent in `{term}`")))?;
        }
        exps[var] += exp;
    }
    Ok(exps)
}

/// Parses `xy+z^5+t^2` over the variables `x, y, z, t`.
impl FromStr for MonomialSupport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::EmptySupport);
        }
        let monomials = s
            .split('+')
            .map(parse_monomial)
            .collect::<Result<Vec<_>>>()?;
        MonomialSupport::new(4, monomials)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(r: u64, coords: &[u64]) -> Weighting {
        Weighting::from_trusted(r, coords.to_vec())
    }

    #[test]
    fn weights_are_reduced_at_construction() {
        let q = QuotientType::new(5, &[7, -1, 5]).unwrap();
        assert_eq!(q.weights(), &[2, 4, 0]);
        let h = HyperquotientType::new(7, [2, -6, 12, 3], -4).unwrap();
        assert_eq!(h.weights(), [2, 1, 5, 3]);
        assert_eq!(h.e(), 3);
    }

    #[test]
    fn quotient_type_validation() {
        assert!(QuotientType::new(0, &[1, 1]).is_err());
        assert!(QuotientType::new(3, &[1]).is_err());
        assert!(QuotientType::new(1, &[0, 0, 0]).is_ok());
    }

    #[test]
    fn isolated_examples() {
        assert!("1/13(3,4,5)".parse::<QuotientType>().unwrap().is_isolated());
        assert!(!"1/4(1,1,2)".parse::<QuotientType>().unwrap().is_isolated());
        assert!("1/1(0,0,0)".parse::<QuotientType>().unwrap().is_isolated());
    }

    #[test]
    fn small_action_examples() {
        assert!(!"1/2(1,0)".parse::<QuotientType>().unwrap().is_small_action());
        assert!("1/4(1,1,2)".parse::<QuotientType>().unwrap().is_small_action());
        assert!("1/13(3,4,5)".parse::<QuotientType>().unwrap().is_small_action());
    }

    #[test]
    fn type_strings_round_trip() {
        for s in ["1/13(3,4,5)", "1/1(0,0,0)", "1/3(1,1)"] {
            assert_eq!(s.parse::<QuotientType>().unwrap().to_string(), s);
        }
        for s in ["1/13(3,4,7,0;0)", "1/7(2,1,5,3;3)"] {
            assert_eq!(s.parse::<HyperquotientType>().unwrap().to_string(), s);
        }
        let tuple: HyperquotientType = "(13; 3,4,7,0; 0)".parse().unwrap();
        assert_eq!(tuple.to_string(), "1/13(3,4,7,0;0)");
        let wt: Weighting = "(3,4,5)/13".parse().unwrap();
        assert_eq!(wt.to_string(), "(3,4,5)/13");
        assert!("1/13(3,4,7,0;0)".parse::<QuotientType>().is_err());
        assert!("1/13(3,4,7)".parse::<HyperquotientType>().is_err());
        assert!("13(3,4)".parse::<QuotientType>().is_err());
        assert!("1/0(1,1)".parse::<QuotientType>().is_err());
    }

    #[test]
    fn weighting_membership_is_enforced() {
        let amb = [3, 4, 5];
        assert!(Weighting::new(13, vec![3, 4, 5], &amb).is_ok());
        assert!(Weighting::new(13, vec![16, 4, 5], &amb).is_ok());
        assert!(Weighting::new(13, vec![3, 4, 6], &amb).is_err());
        assert!(Weighting::new(13, vec![3, 4], &amb).is_err());
        assert!(Weighting::new(1, vec![2, 0, 7], &[0, 0, 0]).is_ok());
    }

    #[test]
    fn monomial_weights() {
        let alpha = w(5, &[2, 3, 1, 0]);
        assert_eq!(
            weight_of_monomial(&alpha, &[1, 1, 0, 0]).unwrap(),
            Rational::one()
        );
        assert_eq!(
            weight_of_monomial(&alpha, &[0, 0, 5, 0]).unwrap(),
            Rational::one()
        );
        assert_eq!(
            weight_of_monomial(&w(13, &[3, 4, 5]), &[1, 1, 1]).unwrap(),
            Rational::frac(12, 13)
        );
        assert!(weight_of_monomial(&alpha, &[1, 1, 1]).is_err());
    }

    #[test]
    fn support_weights() {
        let alpha = w(5, &[2, 3, 1, 0]);
        let f: MonomialSupport = "xy+z^5+t^2".parse().unwrap();
        assert_eq!(weight_of_support(&alpha, &f).unwrap(), Rational::zero());
        let g: MonomialSupport = "xy+z^2+t^2".parse().unwrap();
        assert_eq!(
            weight_of_support(&w(1, &[1, 1, 1, 1]), &g).unwrap(),
            Rational::from_integer(2)
        );
        let h: MonomialSupport = "z^2+zt+t^2".parse().unwrap();
        assert_eq!(
            weight_of_support(&w(7, &[3, 5, 4, 1]), &h).unwrap(),
            Rational::frac(2, 7)
        );
        let empty = MonomialSupport::new(4, vec![]).unwrap();
        assert_eq!(weight_of_support(&alpha, &empty), Err(Error::EmptySupport));
    }

    #[test]
    fn support_parse_and_render() {
        let f: MonomialSupport = "xy + z^5 + t^2".parse().unwrap();
        assert_eq!(f.to_string(), "xy+z^5+t^2");
        assert!(f.contains(&[1, 1, 0, 0]));
        let g: MonomialSupport = "x^2+y^2z+t^4+y^2z".parse().unwrap();
        assert_eq!(g.len(), 3);
        assert!("xw".parse::<MonomialSupport>().is_err());
        assert!("".parse::<MonomialSupport>().is_err());
    }

    fn arb_support() -> impl Strategy<Value = MonomialSupport> {
        prop::collection::vec(prop::collection::vec(0u32..6, 4), 1..6)
            .prop_map(|ms| MonomialSupport::new(4, ms).unwrap())
    }

    proptest! {
        #[test]
        fn weight_is_linear(
            coords in prop::collection::vec(0u64..40, 4),
            r in 1u64..20,
            m1 in prop::collection::vec(0u32..10, 4),
            m2 in prop::collection::vec(0u32..10, 4),
        ) {
            let alpha = w(r, &coords);
            let sum: Vec<u32> = m1.iter().zip(&m2).map(|(a, b)| a + b).collect();
            let lhs = weight_of_monomial(&alpha, &sum).unwrap();
            let rhs = weight_of_monomial(&alpha, &m1).unwrap() + weight_of_monomial(&alpha, &m2).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn support_weight_of_union_is_min(
            coords in prop::collection::vec(0u64..40, 4),
            r in 1u64..20,
            f in arb_support(),
            g in arb_support(),
        ) {
            let alpha = w(r, &coords);
            let u = f.union(&g).unwrap();
            let lhs = weight_of_support(&alpha, &u).unwrap();
            let rhs = weight_of_support(&alpha, &f).unwrap().min(weight_of_support(&alpha, &g).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn support_string_round_trips(f in arb_support()) {
            let back: MonomialSupport = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
