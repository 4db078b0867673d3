//! Screens for hyperquotient candidates `(f = 0) ⊂ A^4 / μ_r` of type
//! `1/r(a, b, c, d; e)` with coordinates `x, y, z, t`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{gcd, mul_mod, Rational};
use crate::error::{Error, Result};
use crate::types::{lattice_class, HyperquotientType, MonomialSupport, Weighting};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseFailure {
    pub clause: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rule2Verdict {
    pub passed: bool,
    pub failures: Vec<ClauseFailure>,
}

pub fn rule2_check(h: &HyperquotientType) -> Rule2Verdict {
    let r = h.r();
    let w = h.weights();
    let ge = gcd(h.e(), r);
    let mut failures = Vec::new();
    for (i, &a) in w.iter().enumerate() {
        let g = gcd(a, r);
        if g > 1 && !ge.is_multiple_of(g) {
            failures.push(ClauseFailure {
                clause: "i",
                detail: format!("gcd(a_{}, r) = {g} does not divide gcd(e, r) = {ge}", i + 1),
            });
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let g = gcd(gcd(w[i], w[j]), r);
            if g != 1 {
                failures.push(ClauseFailure {
                    clause: "ii",
                    detail: format!("gcd(a_{}, a_{}, r) = {g}", i + 1, j + 1),
                });
            }
        }
    }
    let s = (w.iter().sum::<u64>() + r - h.e()) % r;
    if s != 1 % r {
        failures.push(ClauseFailure {
            clause: "iii",
            detail: format!("a + b + c + d - e ≡ {s}, not 1 (mod {r})"),
        });
    }
    Rule2Verdict {
        passed: failures.is_empty(),
        failures,
    }
}

/// True iff every monomial of `f` has weight `e` modulo `r`.
pub fn equivariance_check(h: &HyperquotientType, f: &MonomialSupport) -> bool {
    let r = h.r();
    let w = h.weights();
    f.nvars() == 4
        && f.iter().all(|m| {
            let s = m
                .iter()
                .zip(w)
                .fold(0u64, |acc, (&e, a)| (acc + mul_mod(a, e as u64, r)) % r);
            s == h.e()
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FCase {
    CA,
    Odd,
    CD4,
    CDn,
    CE,
    Unclassified,
}

impl FCase {
    pub fn as_str(self) -> &'static str {
        match self {
            FCase::CA => "cA",
            FCase::Odd => "odd",
            FCase::CD4 => "cD4",
            FCase::CDn => "cDn",
            FCase::CE => "cE",
            FCase::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for FCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "cA" => FCase::CA,
            "odd" => FCase::Odd,
            "cD4" => FCase::CD4,
            "cDn" => FCase::CDn,
            "cE" => FCase::CE,
            "unclassified" => FCase::Unclassified,
            other => return Err(Error::Parse(format!("unknown case `{other}`"))),
        })
    }
}

impl Serialize for FCase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;
const T: usize = 3;

fn degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

fn only_in(m: &[u32], vars: &[usize]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, &e)| e == 0 || vars.contains(&i))
}

fn mono(exps: [(usize, u32); 2]) -> Vec<u32> {
    let mut m = vec![0; 4];
    for (v, e) in exps {
        m[v] += e;
    }
    m
}

/// Whether the generic cubic form with this support is reduced, that is, the
/// monomials have no common square factor.
fn generic_cubic_is_reduced(cubics: &[&Vec<u32>]) -> bool {
    if cubics.is_empty() {
        return false;
    }
    (0..4).all(|v| cubics.iter().map(|m| m[v]).min().unwrap_or(0) < 2)
}

/// Matches the support against the five normal forms exactly as written,
/// without coordinate changes or permutations.
pub fn classify_f_case(f: &MonomialSupport) -> Result<FCase> {
    if f.nvars() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: f.nvars(),
        });
    }
    if f.is_empty() {
        return Err(Error::EmptySupport);
    }
    let xy = mono([(X, 1), (Y, 1)]);
    let x2 = mono([(X, 2), (X, 0)]);
    let y2 = mono([(Y, 2), (Y, 0)]);
    let y2z = mono([(Y, 2), (Z, 1)]);
    let y3 = mono([(Y, 3), (Y, 0)]);
    let rest = |fixed: &[&Vec<u32>]| -> Vec<&Vec<u32>> {
        f.iter().filter(|m| !fixed.contains(m)).collect()
    };
    let zt = [Z, T];

    if f.contains(&xy) && rest(&[&xy]).iter().all(|m| only_in(m, &zt) && degree(m) >= 2) {
        return Ok(FCase::CA);
    }
    if !f.contains(&x2) {
        return Ok(FCase::Unclassified);
    }
    if f.contains(&y2) && rest(&[&x2, &y2]).iter().all(|m| only_in(m, &zt) && degree(m) >= 3) {
        return Ok(FCase::Odd);
    }
    if f.contains(&y2z) && rest(&[&x2, &y2z]).iter().all(|m| only_in(m, &zt) && degree(m) >= 4) {
        return Ok(FCase::CDn);
    }
    if f.contains(&y3)
        && rest(&[&x2, &y3]).iter().all(|m| {
            let zt_part = m[Z] + m[T];
            m[X] == 0 && ((m[Y] == 1 && zt_part >= 3) || (m[Y] == 0 && zt_part >= 4))
        })
    {
        return Ok(FCase::CE);
    }
    let g = rest(&[&x2]);
    if g.iter().all(|m| m[X] == 0 && degree(m) >= 3) {
        let cubics: Vec<&Vec<u32>> = g.iter().copied().filter(|m| degree(m) == 3).collect();
        if generic_cubic_is_reduced(&cubics) {
            return Ok(FCase::CD4);
        }
    }
    Ok(FCase::Unclassified)
}

/// [`classify_f_case`] plus the weight conditions of the normal forms: the
/// odd case needs `a ≢ b`, and the support must be equivariant.
pub fn classify_f_case_weighted(h: &HyperquotientType, f: &MonomialSupport) -> Result<FCase> {
    let case = classify_f_case(f)?;
    if !equivariance_check(h, f) {
        return Ok(FCase::Unclassified);
    }
    let [a, b, _, _] = h.weights();
    if case == FCase::Odd && a == b {
        return Ok(FCase::Unclassified);
    }
    Ok(case)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxVector {
    pub k: u64,
    pub alpha: Weighting,
    pub mirror: Weighting,
}

/// Lattice vectors in `[0,1]^4 ∖ {0,1}^4`: each `α_k` with every subset of its
/// zero coordinates raised to 1, paired with `(1,1,1,1) - α`.
pub fn enumerate_box_vectors(h: &HyperquotientType) -> Vec<BoxVector> {
    let r = h.r();
    let mut out = Vec::new();
    for k in 1..r {
        let base = h.residues_at(k);
        let zeros: Vec<usize> = (0..4).filter(|&i| base[i] == 0).collect();
        for mask in 0..(1u32 << zeros.len()) {
            let mut coords = base.to_vec();
            for (bit, &i) in zeros.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    coords[i] = r;
                }
            }
            if coords.iter().all(|&c| c == 0 || c == r) {
                continue;
            }
            let alpha = Weighting::from_trusted(r, coords);
            let mirror = alpha.mirror().expect("box coordinates are at most 1");
            out.push(BoxVector { k, alpha, mirror });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenEntry {
    pub alpha: Weighting,
    /// `α(xyzt) - α(f)`
    pub value: Rational,
    pub primitive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenReport {
    pub beta_candidates: Vec<ScreenEntry>,
    pub violations: Vec<ScreenEntry>,
    pub clear: bool,
    pub bound_used: u64,
    pub vectors_examined: u64,
}

fn is_primitive(r: u64, coords: &[u64], weights: &[u64]) -> bool {
    let top = coords.iter().copied().max().unwrap_or(0);
    (2..=top).all(|m| {
        !(coords.iter().all(|&b| b % m == 0)
            && lattice_class(r, &coords.iter().map(|&b| b / m).collect::<Vec<_>>(), weights)
                .is_some())
    })
}

/// Finite-bound necessary-condition screen for extreme non-canonicity. Examines
/// every vector of `N ∩ σ` with coordinates in `[0, bound]` and at least two
/// positive coordinates, so that it defines an exceptional divisor.
pub fn screen_rule1(
    h: &HyperquotientType,
    f: &MonomialSupport,
    delta: &Rational,
    bound: u64,
) -> Result<ScreenReport> {
    if !(delta.is_positive() && *delta <= Rational::frac(1, 2)) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    if bound == 0 {
        return Err(Error::Precondition("bound must be at least 1".into()));
    }
    if f.is_empty() {
        return Err(Error::EmptySupport);
    }
    if !equivariance_check(h, f) {
        return Err(Error::Precondition(format!(
            "support {f} is not equivariant for {h}"
        )));
    }
    let r = h.r();
    let w = h.weights();
    let cap = bound * r;
    let one = Rational::one();
    let floor = &one - delta;
    let mut report = ScreenReport {
        beta_candidates: Vec::new(),
        violations: Vec::new(),
        clear: false,
        bound_used: bound,
        vectors_examined: 0,
    };
    for j in 0..r {
        let base = h.residues_at(j);
        let ranges: Vec<Vec<u64>> = base
            .iter()
            .map(|&b| (0..).map(|t| b + t * r).take_while(|&v| v <= cap).collect())
            .collect();
        for &b0 in &ranges[0] {
            for &b1 in &ranges[1] {
                for &b2 in &ranges[2] {
                    for &b3 in &ranges[3] {
                        let coords = [b0, b1, b2, b3];
                        if coords.iter().filter(|&&b| b > 0).count() < 2 {
                            continue;
                        }
                        report.vectors_examined += 1;
                        let alpha = Weighting::from_trusted(r, coords.to_vec());
                        let total: u64 = coords.iter().sum();
                        let af = crate::types::scaled_weight_of_support(&alpha, f)?;
                        let value = Rational::new(total as i64 - af as i64, r);
                        let primitive = is_primitive(r, &coords, &w);
                        let entry = ScreenEntry {
                            alpha,
                            value: value.clone(),
                            primitive,
                        };
                        if !primitive {
                            if value <= one {
                                report.violations.push(entry);
                            }
                        } else if value <= floor || value == one {
                            report.violations.push(entry);
                        } else if value < one {
                            report.beta_candidates.push(entry);
                        }
                    }
                }
            }
        }
    }
    report.clear = report.violations.is_empty() && report.beta_candidates.len() <= 1;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceKind {
    Xy,
    X2,
}

impl FromStr for TraceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "xy" => Ok(TraceKind::Xy),
            "x2" => Ok(TraceKind::X2),
            other => Err(Error::Parse(format!("unknown trace kind `{other}`"))),
        }
    }
}

impl Serialize for TraceKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            TraceKind::Xy => "xy",
            TraceKind::X2 => "x2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    CaseI,
    CaseIi,
    BetaException,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub k: u64,
    pub alternative: Alternative,
    /// `res(ak) + res(bk)` for xy, `2 res(ak)` for x2.
    pub s1: u64,
    /// `res(ck) + res(dk)` for xy, `res(bk) + res(ck) + res(dk)` for x2.
    pub s2: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlternativeTrace {
    pub kind: TraceKind,
    pub entries: Vec<TraceEntry>,
    /// `k` where `Σ res(a_i k) = res(ek) + k + r` fails.
    pub identity_failures: Vec<u64>,
}

pub(crate) fn classify_alternative(h: &HyperquotientType, kind: TraceKind, k: u64) -> TraceEntry {
    let r = h.r();
    let [a, b, c, d] = h.residues_at(k);
    let ek = h.e_residue_at(k);
    let (s1, s2, shift) = match kind {
        TraceKind::Xy => (a + b, c + d, 0),
        TraceKind::X2 => (2 * a, b + c + d, a),
    };
    let alternative = if s1 == ek && s2 == shift + k + r {
        Alternative::CaseI
    } else if s1 == ek + r && s2 == shift + k {
        Alternative::CaseIi
    } else {
        Alternative::BetaException
    };
    TraceEntry {
        k,
        alternative,
        s1,
        s2,
    }
}

pub(crate) fn check_trace_precondition(h: &HyperquotientType, kind: TraceKind) -> Result<()> {
    let r = h.r();
    let [a, b, c, d] = h.weights();
    let e = h.e();
    match kind {
        TraceKind::Xy => {
            if (a + b) % r != e || (c + d) % r != 1 % r {
                return Err(Error::Precondition(format!(
                    "{h} needs a + b ≡ e and c + d ≡ 1 for the xy normal form"
                )));
            }
        }
        TraceKind::X2 => {
            if (2 * a) % r != e || (b + c + d) % r != (1 + a) % r {
                return Err(Error::Precondition(format!(
                    "{h} needs 2a ≡ e and b + c + d ≡ 1 + a for the x2 normal form"
                )));
            }
        }
    }
    Ok(())
}

pub fn alternative_trace(h: &HyperquotientType, kind: TraceKind) -> Result<AlternativeTrace> {
    check_trace_precondition(h, kind)?;
    let r = h.r();
    let entries = (1..r).map(|k| classify_alternative(h, kind, k)).collect();
    let identity_failures = (1..r)
        .filter(|&k| {
            let s: u64 = h.residues_at(k).iter().sum();
            s != h.e_residue_at(k) + k + r
        })
        .collect();
    Ok(AlternativeTrace {
        kind,
        entries,
        identity_failures,
    })
}

/// Mirror pairs `{k, r-k}` with `α_{r-k} = α_k'` where neither side is a
/// β-exception yet both fall in the same alternative.
pub fn alternation_failures(h: &HyperquotientType, trace: &AlternativeTrace) -> Vec<u64> {
    let r = h.r();
    trace
        .entries
        .iter()
        .filter(|e| 2 * e.k <= r && h.residues_at(e.k).iter().all(|&x| x != 0))
        .filter(|e| {
            let m = &trace.entries[(r - e.k - 1) as usize];
            e.alternative != Alternative::BetaException
                && m.alternative != Alternative::BetaException
                && (e.alternative == m.alternative)
        })
        .map(|e| e.k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma::terminal_lemma_hypothesis;
    use proptest::prelude::*;

    fn hq(s: &str) -> HyperquotientType {
        s.parse().unwrap()
    }

    fn sup(s: &str) -> MonomialSupport {
        s.parse().unwrap()
    }

    #[test]
    fn rule2_examples() {
        assert!(rule2_check(&hq("1/5(2,3,1,0;0)")).passed);
        let v = rule2_check(&hq("1/4(2,1,1,1;2)"));
        assert!(!v.passed);
        assert!(v.failures.iter().any(|f| f.clause == "iii"));
        assert!(rule2_check(&hq("1/13(3,4,7,0;0)")).passed);
        let v = rule2_check(&hq("1/6(2,2,3,0;0)"));
        assert!(v.failures.iter().any(|f| f.clause == "ii"));
        let v = rule2_check(&hq("1/6(2,1,1,3;1)"));
        assert!(v.failures.iter().any(|f| f.clause == "i"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_f_case(&sup("xy+z^3+t^2")).unwrap(), FCase::CA);
        assert_eq!(classify_f_case(&sup("x^2+y^2z+t^4")).unwrap(), FCase::CDn);
        assert_eq!(classify_f_case(&sup("x^2+y^3+z^4+yt^3")).unwrap(), FCase::CE);
        assert_eq!(classify_f_case(&sup("x^2+y^2+z^3")).unwrap(), FCase::Odd);
        assert_eq!(classify_f_case(&sup("x^2+y^3+z^3+t^3")).unwrap(), FCase::CD4);
        assert_eq!(classify_f_case(&sup("x^2+y^2z+z^3")).unwrap(), FCase::CD4);
        assert_eq!(classify_f_case(&sup("x^2+y^2z+y^2t")).unwrap(), FCase::Unclassified);
        assert_eq!(classify_f_case(&sup("xy+z")).unwrap(), FCase::Unclassified);
        assert_eq!(classify_f_case(&sup("x^3+y^3")).unwrap(), FCase::Unclassified);
    }

    #[test]
    fn weighted_classification_checks_odd_weights() {
        let f = sup("x^2+y^2+z^3");
        // a = b: not the odd normal form
        assert_eq!(
            classify_f_case_weighted(&hq("1/5(1,1,2,0;2)"), &f).unwrap(),
            FCase::Unclassified
        );
    }

    #[test]
    fn equivariance_examples() {
        let h = hq("1/5(2,3,1,0;0)");
        assert!(equivariance_check(&h, &sup("xy+z^5+t^2")));
        assert!(!equivariance_check(&h, &sup("xy+z^3")));
        assert!(equivariance_check(&hq("1/1(0,0,0,0;0)"), &sup("x^7+yz")));
    }

    #[test]
    fn box_examples() {
        let h = hq("1/13(3,4,5,6;0)");
        let bx = enumerate_box_vectors(&h);
        let find = |s: &str| bx.iter().find(|v| v.alpha.to_string() == s).cloned();
        let v1 = find("(3,4,5,6)/13").unwrap();
        assert_eq!(v1.k, 1);
        assert_eq!(v1.mirror.to_string(), "(10,9,8,7)/13");
        assert_eq!(find("(10,9,8,7)/13").unwrap().k, 12);

        let bx = enumerate_box_vectors(&hq("1/5(2,3,1,0;0)"));
        let k1: Vec<String> = bx.iter().filter(|v| v.k == 1).map(|v| v.alpha.to_string()).collect();
        assert_eq!(k1, vec!["(2,3,1,0)/5", "(2,3,1,5)/5"]);

        assert!(enumerate_box_vectors(&hq("1/1(0,0,0,0;0)")).is_empty());
    }

    #[test]
    fn box_vectors_are_lattice_points_and_cover_the_box() {
        let h = hq("1/6(1,5,2,3;0)");
        let w = h.weights();
        let bx = enumerate_box_vectors(&h);
        for v in &bx {
            assert!(v.alpha.is_member_of(&w));
            assert!(v.mirror.is_member_of(&w));
        }
        // brute force over (1/r)[0, r]^4
        let r = h.r();
        let mut count = 0;
        for c in 0..(r + 1).pow(4) {
            let coords = vec![c % (r + 1), c / (r + 1) % (r + 1), c / (r + 1).pow(2) % (r + 1), c / (r + 1).pow(3)];
            if coords.iter().all(|&b| b == 0 || b == r) {
                continue;
            }
            if lattice_class(r, &coords, &w).is_some() {
                count += 1;
            }
        }
        assert_eq!(bx.len(), count);
    }

    #[test]
    fn screen_examples() {
        let delta = Rational::frac(1, 13);
        let rep = screen_rule1(&hq("1/1(0,0,0,0;0)"), &sup("xy+z^2+t^2"), &delta, 2).unwrap();
        assert!(rep.clear);
        assert!(rep.beta_candidates.is_empty());

        let rep = screen_rule1(&hq("1/5(2,3,1,0;0)"), &sup("xy+z^5+t^2"), &delta, 2).unwrap();
        assert!(rep.clear);
        assert!(rep.beta_candidates.is_empty());
        assert!(rep.violations.is_empty());

        assert!(screen_rule1(&hq("1/5(2,3,1,0;0)"), &sup("xy+z^3"), &delta, 2).is_err());
        assert!(screen_rule1(&hq("1/1(0,0,0,0;0)"), &sup("xy"), &Rational::frac(2, 3), 2).is_err());
    }

    #[test]
    fn screen_flags_the_one_twelve_quotient() {
        // 1/13(3,4,5) embedded as a hyperplane t = 0: f = t, weight d = e
        let h = hq("1/13(3,4,5,7;7)");
        let rep = screen_rule1(&h, &sup("t"), &Rational::frac(1, 12), 2).unwrap();
        let has = |s: &str| rep.beta_candidates.iter().any(|e| e.alpha.to_string() == s);
        assert!(has("(3,4,5,7)/13"));
    }

    #[test]
    fn trace_examples() {
        let h = hq("1/7(2,1,5,3;3)");
        let tr = alternative_trace(&h, TraceKind::Xy).unwrap();
        assert!(tr.identity_failures.is_empty());
        let sums: Vec<u64> = tr.entries.iter().map(|e| e.s1 + e.s2).collect();
        assert_eq!(sums, vec![11, 15, 12, 16, 13, 17]);
        assert!(alternation_failures(&h, &tr).is_empty());

        assert!(alternative_trace(&hq("1/13(3,4,7,0;0)"), TraceKind::Xy).is_err());

        let h = hq("1/4(1,1,3,2;2)");
        let tr = alternative_trace(&h, TraceKind::X2).unwrap();
        assert_eq!(tr.entries.len(), 3);
        assert!(tr.identity_failures.is_empty());
        assert!(terminal_lemma_hypothesis(&h));
    }

    proptest! {
        #[test]
        fn trace_identity_matches_terminal_hypothesis(r in 2u64..40, a in 0u64..40, c in 0u64..40, e in 0u64..40) {
            let (a, c, e) = (a % r, c % r, e % r);
            let b = (e + r - a) % r;
            let d = (1 + r - c % r) % r;
            let h = HyperquotientType::new(r, [a, b, c, d].map(|x| x as i64), e as i64).unwrap();
            let tr = alternative_trace(&h, TraceKind::Xy).unwrap();
            prop_assert_eq!(tr.identity_failures.is_empty(), terminal_lemma_hypothesis(&h));
            prop_assert!(alternation_failures(&h, &tr).is_empty());
        }
    }
}
