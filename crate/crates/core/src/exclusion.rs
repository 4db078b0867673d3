//! Bounded replay of the case exclusions for isolated cDV hyperquotients
//! `(f = 0) ⊂ A^4 / μ_r` that would be extremely non-canonical with
//! `mld > 1 - δ`.
//!
//! For each candidate type and each placement of the exceptional vector β
//! (none, or `β ≡ α_{k0}` with `1 - δ < k0/r < 1`), every other `α_k` forces a
//! value of `α_k(f)`. A forced value below the weight of the fixed part of `f`
//! must be attained by a monomial of the residual part, and we search for one.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{gcd, mul_mod, Rational};
use crate::error::{Error, Result};
use crate::parallel::ordered_map;
use crate::screen::{check_trace_precondition, classify_alternative, rule2_check, Alternative, FCase, TraceKind};
use crate::types::{HyperquotientType, MonomialSupport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    CaQgt1A,
    CaQgt1B,
    CaQ1C,
    CaQ1D,
    Odd,
    CdeA,
    CdeB,
    CdeC,
    CdeD,
    CdeE,
    CdeF,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::CaQgt1A,
        Family::CaQgt1B,
        Family::CaQ1C,
        Family::CaQ1D,
        Family::Odd,
        Family::CdeA,
        Family::CdeB,
        Family::CdeC,
        Family::CdeD,
        Family::CdeE,
        Family::CdeF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::CaQgt1A => "cA_qgt1_A",
            Family::CaQgt1B => "cA_qgt1_B",
            Family::CaQ1C => "cA_q1_C",
            Family::CaQ1D => "cA_q1_D",
            Family::Odd => "odd",
            Family::CdeA => "cDE_a",
            Family::CdeB => "cDE_b",
            Family::CdeC => "cDE_c",
            Family::CdeD => "cDE_d",
            Family::CdeE => "cDE_e",
            Family::CdeF => "cDE_f",
        }
    }

    /// The normal form the family is screened under. All cD-E families share
    /// `f = x^2 + g(y, z, t)`, which is filed under cD4.
    pub fn f_case(self) -> FCase {
        match self {
            Family::CaQgt1A | Family::CaQgt1B | Family::CaQ1C | Family::CaQ1D => FCase::CA,
            Family::Odd => FCase::Odd,
            _ => FCase::CD4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown family `{s}`")))
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn inapplicable(family: Family, r: u64, reason: &str) -> Error {
    Error::FamilyInapplicable {
        family: family.to_string(),
        r,
        reason: reason.into(),
    }
}

pub fn candidate_types(family: Family, r: u64) -> Result<Vec<HyperquotientType>> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be at least 2, got {r}")));
    }
    let even = r.is_multiple_of(2);
    match family {
        Family::Odd if !r.is_multiple_of(4) => return Err(inapplicable(family, r, "needs 4 | r")),
        Family::CdeB | Family::CdeC if !even => return Err(inapplicable(family, r, "needs r even")),
        Family::CdeD | Family::CdeE | Family::CdeF if even => {
            return Err(inapplicable(family, r, "needs r odd"))
        }
        _ => {}
    }
    let ri = r as i64;
    let unit = |p: u64| gcd(p, r) == 1;
    let mk = |a: [i64; 4], e: i64| HyperquotientType::new(r, a, e);
    let mut out = Vec::new();
    if family == Family::Odd {
        out.push(mk([1, (ri + 2) / 2, (ri - 2) / 2, 2], 2)?);
        return Ok(out);
    }
    for p in 1..r {
        let n = p as i64;
        let h = match family {
            Family::CaQgt1A if unit(p) => mk([n, -n, 1, 0], 0)?,
            Family::CaQgt1B if unit(p) && !unit(p + 1) => mk([1, n, -n, n + 1], n + 1)?,
            Family::CaQ1C if unit(p) && unit(p + 1) => mk([n, 1, -n, n + 1], n + 1)?,
            Family::CaQ1D if unit(p) && unit(p + 1) => mk([n, -n - 1, -n, n + 1], -1)?,
            Family::CdeA if unit(p) => mk([0, n, -n, 1], 0)?,
            Family::CdeB if unit(p) => mk([n, -n, 1, 2 * n], 2 * n)?,
            Family::CdeC | Family::CdeF if unit(p) => mk([1, n, -n, 2], 2)?,
            Family::CdeD if unit(p) => mk([(ri - 1) / 2, (ri + 1) / 2, n, -n], -1)?,
            Family::CdeE if unit(p) => mk([n, -n, 2 * n, 1], 2 * n)?,
            _ => continue,
        };
        out.push(h);
    }
    Ok(out)
}

/// Placement of the exceptional vector: none, or `β ≡ α_{k0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    NoBeta,
    Beta { k0: u64 },
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::NoBeta => f.write_str("none"),
            Branch::Beta { k0 } => write!(f, "beta=alpha_{k0}"),
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// An equivariant monomial of the forced weight exists.
    Found { monomial: String },
    /// No such monomial exists at any degree.
    Absent,
    /// The degree bound is too small to decide.
    Unresolved { needed_degree: u64 },
    /// The residue alternatives themselves fail, or a fixed monomial of `f`
    /// already has smaller weight.
    Contradiction { reason: String },
}

impl Outcome {
    fn kills(&self) -> bool {
        matches!(self, Outcome::Absent | Outcome::Contradiction { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub branch: Branch,
    pub k: u64,
    pub forced_weight: Rational,
    pub family: String,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Excluded,
    Inconclusive,
    Survives,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchReport {
    pub branch: Branch,
    pub status: BranchStatus,
    /// Requirements that decide the branch: the killing ones if excluded,
    /// otherwise the unresolved ones followed by those met.
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusionReport {
    pub candidate: HyperquotientType,
    pub case: FCase,
    pub excluded: bool,
    /// Killing witnesses across all branches.
    pub witnesses: Vec<Witness>,
    pub surviving_branches: Vec<Branch>,
    /// Not excluded, and no branch survives outright.
    pub inconclusive: bool,
    pub terminal_by_ksb: bool,
    /// Branches are enumerated under the hypothesis that β is unique.
    pub assumed_unique_beta: bool,
    pub branches: Vec<BranchReport>,
}

/// Residual part of the normal form: the variables it lives in and its
/// minimal degree.
struct Residual {
    vars: &'static [usize],
    min_degree: u32,
    label: &'static str,
}

const CA_RESIDUAL: Residual = Residual {
    vars: &[2, 3],
    min_degree: 2,
    label: "(z,t)-monomials of degree >= 2",
};
const ODD_RESIDUAL: Residual = Residual {
    vars: &[2, 3],
    min_degree: 3,
    label: "(z,t)-monomials of degree >= 3",
};
const CDE_RESIDUAL: Residual = Residual {
    vars: &[1, 2, 3],
    min_degree: 3,
    label: "(y,z,t)-monomials of degree >= 3",
};

struct Search<'a> {
    h: &'a HyperquotientType,
    scaled: [u64; 4],
    vars: &'a [usize],
    target: u64,
    min_degree: u32,
    max_degree: u32,
}

impl Search<'_> {
    fn run(&self, i: usize, m: &mut [u32; 4], weight: u64, deg: u32) -> bool {
        if i == self.vars.len() {
            if weight != self.target || deg < self.min_degree {
                return false;
            }
            let w = self.h.weights();
            let r = self.h.r();
            let s = (0..4).fold(0u64, |acc, v| (acc + mul_mod(w[v], m[v] as u64, r)) % r);
            return s == self.h.e();
        }
        let v = self.vars[i];
        let step = self.scaled[v];
        let mut e = 0u32;
        loop {
            let wt = weight + step * e as u64;
            if wt > self.target || deg + e > self.max_degree {
                break;
            }
            m[v] = e;
            if self.run(i + 1, m, wt, deg + e) {
                return true;
            }
            e += 1;
        }
        m[v] = 0;
        false
    }
}

/// Looks for an equivariant monomial in the residual family with
/// `α_k`-weight exactly `target / r`.
fn search_monomial(
    h: &HyperquotientType,
    k: u64,
    residual: &Residual,
    target: u64,
    degree_bound: u32,
) -> Outcome {
    let scaled = h.residues_at(k);
    let search = Search {
        h,
        scaled,
        vars: residual.vars,
        target,
        min_degree: residual.min_degree,
        max_degree: degree_bound,
    };
    let mut m = [0u32; 4];
    if search.run(0, &mut m, 0, 0) {
        let mono = MonomialSupport::new(4, [m.to_vec()]).expect("four exponents");
        return Outcome::Found {
            monomial: mono.to_string(),
        };
    }
    // every solution reduces to one with positive-weight degree at most
    // target / min weight and each zero-weight exponent below its order plus
    // the minimal degree
    let r = h.r();
    let positive = residual.vars.iter().map(|&v| scaled[v]).filter(|&w| w > 0).min();
    let mut needed = match positive {
        Some(w) => target / w,
        None => 0,
    };
    for &v in residual.vars {
        if scaled[v] == 0 {
            let order = r / gcd(h.weights()[v], r);
            needed += order + residual.min_degree as u64 - 1;
        }
    }
    if needed <= degree_bound as u64 {
        Outcome::Absent
    } else {
        Outcome::Unresolved {
            needed_degree: needed,
        }
    }
}

fn is_ksb_pattern(h: &HyperquotientType, case: FCase) -> bool {
    let r = h.r();
    let [a, b, c, d] = h.weights();
    case == FCase::CA && (a + b) % r == 0 && c == 1 % r && d == 0 && h.e() == 0
}

/// The requirement `α_k` imposes on the residual part of `f`, or `None` when
/// the fixed part already accounts for the forced value of `α_k(f)`.
fn requirement(
    h: &HyperquotientType,
    case: FCase,
    k: u64,
    claim_g_one: bool,
    degree_bound: u32,
) -> Option<(u64, &'static str, Outcome)> {
    let r = h.r();
    if claim_g_one {
        return Some((r, CDE_RESIDUAL.label, search_monomial(h, k, &CDE_RESIDUAL, r, degree_bound)));
    }
    let kind = if case == FCase::CA { TraceKind::Xy } else { TraceKind::X2 };
    let residual = match case {
        FCase::CA => &CA_RESIDUAL,
        FCase::Odd => &ODD_RESIDUAL,
        _ => &CDE_RESIDUAL,
    };
    let entry = classify_alternative(h, kind, k);
    let ek = h.e_residue_at(k);
    let [_, yk, _, _] = h.residues_at(k);
    match entry.alternative {
        Alternative::BetaException => Some((
            ek,
            residual.label,
            Outcome::Contradiction {
                reason: format!("neither alternative holds (sums {}, {})", entry.s1, entry.s2),
            },
        )),
        Alternative::CaseI => {
            if case == FCase::Odd && 2 * yk < entry.s1 {
                Some((
                    entry.s1,
                    "fixed monomial y^2",
                    Outcome::Contradiction {
                        reason: format!("y^2 has weight {}/{r} below 2 alpha(x)", 2 * yk),
                    },
                ))
            } else {
                None
            }
        }
        Alternative::CaseIi => {
            if case == FCase::Odd {
                if 2 * yk == ek {
                    return None;
                }
                if 2 * yk < ek {
                    return Some((
                        ek,
                        "fixed monomial y^2",
                        Outcome::Contradiction {
                            reason: format!("y^2 has weight {}/{r} below the forced value", 2 * yk),
                        },
                    ));
                }
            }
            Some((ek, residual.label, search_monomial(h, k, residual, ek, degree_bound)))
        }
    }
}

fn check_delta(delta: &Rational) -> Result<()> {
    if !(delta.is_positive() && *delta <= Rational::frac(1, 2)) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    Ok(())
}

pub fn exclude_candidate(
    h: &HyperquotientType,
    case: FCase,
    delta: &Rational,
    degree_bound: u32,
) -> Result<ExclusionReport> {
    check_delta(delta)?;
    if degree_bound == 0 {
        return Err(Error::Precondition("degree bound must be positive".into()));
    }
    let verdict = rule2_check(h);
    if !verdict.passed {
        let clauses: Vec<&str> = verdict.failures.iter().map(|f| f.clause).collect();
        return Err(Error::Precondition(format!(
            "{h} fails rule II clause(s) {}",
            clauses.join(", ")
        )));
    }
    let kind = match case {
        FCase::CA => TraceKind::Xy,
        FCase::Odd | FCase::CD4 | FCase::CDn | FCase::CE => TraceKind::X2,
        FCase::Unclassified => {
            return Err(Error::Precondition("cannot exclude an unclassified case".into()))
        }
    };
    check_trace_precondition(h, kind)?;

    let r = h.r();
    let one = Rational::one();
    let floor = &one - delta;
    let claim_g_one = kind == TraceKind::X2 && case != FCase::Odd && h.weights()[0] == 0 && h.e() == 0;

    let mut branches = vec![Branch::NoBeta];
    branches.extend(
        (1..r)
            .filter(|&k0| {
                let v = Rational::frac(k0 as i64, r);
                v > floor && v < one
            })
            .map(|k0| Branch::Beta { k0 }),
    );

    let mut reports = Vec::new();
    for branch in branches {
        let exempt = |k: u64| match branch {
            Branch::NoBeta => false,
            Branch::Beta { k0 } => k == k0 || (!claim_g_one && k == r - k0),
        };
        let mut kills = Vec::new();
        let mut open = Vec::new();
        let mut met = Vec::new();
        for k in (1..r).filter(|&k| !exempt(k)) {
            let Some((w, label, outcome)) = requirement(h, case, k, claim_g_one, degree_bound) else {
                continue;
            };
            let witness = Witness {
                branch,
                k,
                forced_weight: Rational::frac(w as i64, r),
                family: label.to_string(),
                outcome,
            };
            match witness.outcome {
                ref o if o.kills() => kills.push(witness),
                Outcome::Unresolved { .. } => open.push(witness),
                _ => met.push(witness),
            }
        }
        let (status, witnesses) = if !kills.is_empty() {
            (BranchStatus::Excluded, kills)
        } else if !open.is_empty() {
            open.extend(met);
            (BranchStatus::Inconclusive, open)
        } else {
            (BranchStatus::Survives, met)
        };
        reports.push(BranchReport {
            branch,
            status,
            witnesses,
        });
    }

    let excluded = reports.iter().all(|b| b.status == BranchStatus::Excluded);
    let witnesses = reports
        .iter()
        .filter(|b| b.status == BranchStatus::Excluded)
        .flat_map(|b| b.witnesses.iter().cloned())
        .collect();
    let surviving_branches = reports
        .iter()
        .filter(|b| b.status != BranchStatus::Excluded)
        .map(|b| b.branch)
        .collect();
    let inconclusive = !excluded && reports.iter().all(|b| b.status != BranchStatus::Survives);
    Ok(ExclusionReport {
        candidate: *h,
        case,
        excluded,
        witnesses,
        surviving_branches,
        inconclusive,
        terminal_by_ksb: is_ksb_pattern(h, case),
        assumed_unique_beta: true,
        branches: reports,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayStatus {
    Excluded,
    TerminalByKsb,
    Inconclusive,
    Survivor,
    Rule2Failure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayRecord {
    pub r: u64,
    pub family: Family,
    pub candidate: HyperquotientType,
    pub status: ReplayStatus,
    /// First killing witness of the no-β branch, when there is one.
    pub first_witness: Option<Witness>,
    pub branches: usize,
    pub surviving_branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplaySummary {
    pub r_min: u64,
    pub r_max: u64,
    pub delta: Rational,
    pub degree_bound: u32,
    pub instances: u64,
    pub excluded: u64,
    pub terminal_by_ksb: u64,
    pub inconclusive: u64,
    pub survivors: u64,
    pub rule2_failures: u64,
    #[serde(skip)]
    pub records: Vec<ReplayRecord>,
}

fn replay_one(family: Family, h: &HyperquotientType, delta: &Rational, degree_bound: u32) -> Result<ReplayRecord> {
    let base = |status, first_witness, branches, surviving_branches| ReplayRecord {
        r: h.r(),
        family,
        candidate: *h,
        status,
        first_witness,
        branches,
        surviving_branches,
    };
    if !rule2_check(h).passed {
        return Ok(base(ReplayStatus::Rule2Failure, None, 0, Vec::new()));
    }
    let rep = exclude_candidate(h, family.f_case(), delta, degree_bound)?;
    let status = if rep.terminal_by_ksb {
        ReplayStatus::TerminalByKsb
    } else if rep.excluded {
        ReplayStatus::Excluded
    } else if rep.inconclusive {
        ReplayStatus::Inconclusive
    } else {
        ReplayStatus::Survivor
    };
    let first = rep.witnesses.first().cloned();
    Ok(base(status, first, rep.branches.len(), rep.surviving_branches))
}

pub fn replay_exclusions(
    r_min: u64,
    r_max: u64,
    delta: &Rational,
    degree_bound: u32,
    jobs: usize,
) -> Result<ReplaySummary> {
    if r_min < 14 || r_min > r_max {
        return Err(Error::Precondition(format!(
            "need 14 <= r_min <= r_max, got {r_min}..{r_max}"
        )));
    }
    check_delta(delta)?;
    let mut work = Vec::new();
    for r in r_min..=r_max {
        for family in Family::ALL {
            match candidate_types(family, r) {
                Ok(types) => work.extend(types.into_iter().map(|h| (family, h))),
                Err(Error::FamilyInapplicable { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let records = ordered_map(&work, jobs, |(family, h)| replay_one(*family, h, delta, degree_bound))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let count = |s: ReplayStatus| records.iter().filter(|x| x.status == s).count() as u64;
    Ok(ReplaySummary {
        r_min,
        r_max,
        delta: delta.clone(),
        degree_bound,
        instances: records.len() as u64,
        excluded: count(ReplayStatus::Excluded),
        terminal_by_ksb: count(ReplayStatus::TerminalByKsb),
        inconclusive: count(ReplayStatus::Inconclusive),
        survivors: count(ReplayStatus::Survivor),
        rule2_failures: count(ReplayStatus::Rule2Failure),
        records,
    })
}
