//! Checkers for the terminal lemma and the non-canonical lemma on 5-tuples
//! `1/r(a_1, a_2, a_3, a_4; e)`.

use std::fmt;

use serde::Serialize;

use crate::arith::{gcd, is_unit, mul_mod, units, Rational};
use crate::error::{Error, Result};
use crate::mld::mld_at_origin;
use crate::parallel::ordered_map;
use crate::types::{HyperquotientType, QuotientType};

/// `residue(a * k, r)` for all `a, k < r`.
pub(crate) struct ResidueTable {
    r: usize,
    data: Vec<u32>,
}

impl ResidueTable {
    pub(crate) fn new(r: u64) -> Self {
        let n = r as usize;
        let mut data = vec![0u32; n * n];
        for a in 0..n {
            for k in 0..n {
                data[a * n + k] = mul_mod(a as u64, k as u64, r) as u32;
            }
        }
        ResidueTable { r: n, data }
    }

    #[inline]
    pub(crate) fn row(&self, a: u64) -> &[u32] {
        let a = a as usize;
        &self.data[a * self.r..(a + 1) * self.r]
    }
}

/// `Σ_i residue(a_i k) - residue(e k)`.
fn defect(h: &HyperquotientType, k: u64) -> i64 {
    let s: u64 = h.residues_at(k).iter().sum();
    s as i64 - h.e_residue_at(k) as i64
}

pub fn terminal_lemma_hypothesis(h: &HyperquotientType) -> bool {
    let r = h.r();
    (1..r).all(|k| defect(h, k) == (k + r) as i64)
}

/// Shared side conditions: `gcd(e, r) = gcd(a_4, r)` and `a_1, a_2, a_3` units.
fn side_conditions(h: &HyperquotientType) -> std::result::Result<u64, String> {
    let r = h.r();
    let [a1, a2, a3, a4] = h.weights();
    let q = gcd(h.e(), r);
    if q != gcd(a4, r) {
        return Err(format!(
            "gcd(e, r) = {q} differs from gcd(a_4, r) = {}",
            gcd(a4, r)
        ));
    }
    for (i, a) in [a1, a2, a3].into_iter().enumerate() {
        if !is_unit(a, r) {
            return Err(format!("a_{} = {a} is not coprime to r = {r}", i + 1));
        }
    }
    Ok(q)
}

/// An element of the multiset `{a_1, a_2, a_3, a_4, -e, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    /// `a_{i+1}`
    A(usize),
    NegE,
    NegOne,
}

impl Slot {
    fn value(self, h: &HyperquotientType) -> u64 {
        let r = h.r();
        match self {
            Slot::A(i) => h.weights()[i],
            Slot::NegE => (r - h.e()) % r,
            Slot::NegOne => (r - 1) % r,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::A(i) => write!(f, "a{}", i + 1),
            Slot::NegE => write!(f, "-e"),
            Slot::NegOne => write!(f, "-1"),
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairingCertificate {
    /// Three disjoint pairs summing to 0 mod r.
    QEq1 { pairs: [(Slot, Slot); 3] },
    /// `a_4 ≡ e`, `a_one ≡ 1` and the remaining two of `a_1..a_3` sum to 0.
    QGt1 { one: Slot, pair: (Slot, Slot) },
}

impl PairingCertificate {
    /// Re-checks the certificate by modular arithmetic on its own slots.
    pub fn validate(&self, h: &HyperquotientType) -> bool {
        let r = h.r();
        let zero_sum = |(x, y): (Slot, Slot)| (x.value(h) + y.value(h)) % r == 0;
        match self {
            PairingCertificate::QEq1 { pairs } => {
                let mut used: Vec<Slot> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
                used.sort();
                used.dedup();
                used.len() == 6 && pairs.iter().all(|&p| zero_sum(p))
            }
            PairingCertificate::QGt1 { one, pair } => {
                let mut used = vec![*one, pair.0, pair.1];
                used.sort();
                used.dedup();
                used.len() == 3
                    && used.iter().all(|s| matches!(s, Slot::A(i) if *i < 3))
                    && h.weights()[3] == h.e()
                    && one.value(h) == 1 % r
                    && zero_sum(*pair)
            }
        }
    }
}

const SLOTS: [Slot; 6] = [
    Slot::A(0),
    Slot::A(1),
    Slot::A(2),
    Slot::A(3),
    Slot::NegE,
    Slot::NegOne,
];

/// The 15 perfect matchings of the six slots.
fn perfect_matchings() -> Vec<[(Slot, Slot); 3]> {
    let mut out = Vec::new();
    for i in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != i).collect();
        for j in 1..4 {
            let rest2: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != rest[j]).collect();
            out.push([
                (SLOTS[0], SLOTS[i]),
                (SLOTS[rest[0]], SLOTS[rest[j]]),
                (SLOTS[rest2[0]], SLOTS[rest2[1]]),
            ]);
        }
    }
    out
}

fn find_pairing(h: &HyperquotientType, q: u64) -> Option<PairingCertificate> {
    if q == 1 {
        return perfect_matchings()
            .into_iter()
            .map(|pairs| PairingCertificate::QEq1 { pairs })
            .find(|c| c.validate(h));
    }
    (0..3)
        .flat_map(|one| {
            let others: Vec<usize> = (0..3).filter(|&x| x != one).collect();
            [PairingCertificate::QGt1 {
                one: Slot::A(one),
                pair: (Slot::A(others[0]), Slot::A(others[1])),
            }]
        })
        .find(|c| c.validate(h))
}

pub fn terminal_lemma_pairing(h: &HyperquotientType) -> Result<PairingCertificate> {
    let q = side_conditions(h).map_err(Error::Precondition)?;
    if !terminal_lemma_hypothesis(h) {
        return Err(Error::Precondition(format!(
            "{h} does not satisfy the residue identity for every k"
        )));
    }
    find_pairing(h, q).ok_or_else(|| Error::NoPairing(h.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalVerifyReport {
    pub r: u64,
    pub tuples: u64,
    pub hypothesis_holds: u64,
    pub counterexamples: Vec<HyperquotientType>,
}

fn verify_slice(r: u64, a1: u64, table: &ResidueTable) -> TerminalVerifyReport {
    let mut report = TerminalVerifyReport {
        r,
        tuples: 0,
        hypothesis_holds: 0,
        counterexamples: Vec::new(),
    };
    let us = units(r);
    let row1 = table.row(a1);
    let half = (r / 2) as usize;
    let mut partial = vec![0u32; half + 1];
    let mut same_gcd = vec![Vec::new(); r as usize + 1];
    for e in 0..r {
        same_gcd[gcd(e, r) as usize].push(e);
    }
    for &a2 in &us {
        let row2 = table.row(a2);
        for &a3 in &us {
            let row3 = table.row(a3);
            for k in 1..=half {
                partial[k] = row1[k] + row2[k] + row3[k];
            }
            for a4 in 0..r {
                let q = gcd(a4, r);
                let row4 = table.row(a4);
                for &e in &same_gcd[q as usize] {
                    report.tuples += 1;
                    let rowe = table.row(e);
                    // the side conditions make the identity at r-k follow from k
                    let holds = (1..=half)
                        .all(|k| partial[k] + row4[k] == rowe[k] + k as u32 + r as u32);
                    if !holds {
                        continue;
                    }
                    report.hypothesis_holds += 1;
                    let h = HyperquotientType::new(
                        r,
                        [a1 as i64, a2 as i64, a3 as i64, a4 as i64],
                        e as i64,
                    )
                    .expect("r > 0");
                    if find_pairing(&h, q).is_none() {
                        report.counterexamples.push(h);
                    }
                }
            }
        }
    }
    report
}

/// Exhaustive check of the terminal lemma at one index `r`.
pub fn verify_terminal_lemma(r: u64, jobs: usize) -> Result<TerminalVerifyReport> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be at least 2, got {r}")));
    }
    let table = ResidueTable::new(r);
    let parts = ordered_map(&units(r), jobs, |&a1| verify_slice(r, a1, &table));
    let mut out = TerminalVerifyReport {
        r,
        tuples: 0,
        hypothesis_holds: 0,
        counterexamples: Vec::new(),
    };
    for p in parts {
        out.tuples += p.tuples;
        out.hypothesis_holds += p.hypothesis_holds;
        out.counterexamples.extend(p.counterexamples);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Star {
    /// `a_1 + a_2 ≡ e`
    #[serde(rename = "star1")]
    One,
    /// `2 a_4 ≡ e`
    #[serde(rename = "star2")]
    Two,
    /// `2 a_1 ≡ e` and `q ≤ 2`
    #[serde(rename = "star3")]
    Three,
}

pub fn star_conditions(h: &HyperquotientType) -> Vec<Star> {
    let r = h.r();
    let [a1, a2, _, a4] = h.weights();
    let e = h.e();
    let mut out = Vec::new();
    if (a1 + a2) % r == e {
        out.push(Star::One);
    }
    if (2 * a4) % r == e {
        out.push(Star::Two);
    }
    if (2 * a1) % r == e && gcd(e, r) <= 2 {
        out.push(Star::Three);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NcBranch {
    FiveDim,
    QReduction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NcLemmaVerdict {
    pub accepted: bool,
    pub k0: Option<u64>,
    pub bound: Option<Rational>,
    pub branch: Option<NcBranch>,
    pub star_conditions: Vec<Star>,
    /// mld of the auxiliary quotient used by the branch.
    pub branch_mld: Option<Rational>,
    pub failure_reason: Option<String>,
}

impl NcLemmaVerdict {
    fn reject(k0: u64, stars: Vec<Star>, reason: String) -> Self {
        NcLemmaVerdict {
            accepted: false,
            k0: Some(k0),
            bound: None,
            branch: None,
            star_conditions: stars,
            branch_mld: None,
            failure_reason: Some(reason),
        }
    }
}

/// Checks the hypotheses of the non-canonical lemma at `k0` and replays the
/// matching proof branch. With `require_star` false the star conditions are
/// reported but not required.
pub fn nc_lemma_check(h: &HyperquotientType, k0: u64, require_star: bool) -> Result<NcLemmaVerdict> {
    let r = h.r();
    if k0 == 0 || k0 >= r {
        return Err(Error::Precondition(format!(
            "k0 must lie in [1, {}], got {k0}",
            r.saturating_sub(1)
        )));
    }
    let stars = star_conditions(h);
    let q = match side_conditions(h) {
        Ok(q) => q,
        Err(reason) => return Ok(NcLemmaVerdict::reject(k0, stars, reason)),
    };
    if require_star && stars.is_empty() {
        return Ok(NcLemmaVerdict::reject(
            k0,
            stars,
            "none of the star conditions holds".into(),
        ));
    }
    let s0 = defect(h, k0);
    if s0 != k0 as i64 {
        return Ok(NcLemmaVerdict::reject(
            k0,
            stars,
            format!("condition (1) fails at k0 = {k0}: sum minus residue of e is {s0}, not {k0}"),
        ));
    }
    if let Some(k) = (1..r).find(|&k| k != k0 && defect(h, k) < r as i64) {
        return Ok(NcLemmaVerdict::reject(
            k0,
            stars,
            format!(
                "condition (2) fails at k = {k}: sum minus residue of e is {} < {r}",
                defect(h, k)
            ),
        ));
    }

    let [a1, a2, a3, a4] = h.weights();
    let bound = Rational::new(k0, r);
    let (branch, branch_mld, expected) = if mul_mod(a4, k0, r) != 0 {
        let z = QuotientType::from_residues(r, vec![a1, a2, a3, a4, (r - h.e()) % r])
            .expect("five residues below r");
        let m = mld_at_origin(&z).value;
        (NcBranch::FiveDim, m, Rational::one() + bound.clone())
    } else {
        let p = r / q;
        if !k0.is_multiple_of(p) {
            return Ok(NcLemmaVerdict::reject(
                k0,
                stars,
                format!("inconsistent reduction: p = {p} does not divide k0 = {k0}"),
            ));
        }
        let z = QuotientType::from_residues(q, vec![a1 % q, a2 % q, a3 % q])
            .expect("three residues below q");
        let m = mld_at_origin(&z).value;
        (NcBranch::QReduction, m, Rational::new(k0 / p, q))
    };
    if branch_mld != expected {
        return Ok(NcLemmaVerdict {
            accepted: false,
            k0: Some(k0),
            bound: None,
            branch: Some(branch),
            star_conditions: stars,
            branch_mld: Some(branch_mld.clone()),
            failure_reason: Some(format!(
                "branch identity fails: auxiliary mld is {branch_mld}, expected {expected}"
            )),
        });
    }
    Ok(NcLemmaVerdict {
        accepted: true,
        k0: Some(k0),
        bound: Some(bound),
        branch: Some(branch),
        star_conditions: stars,
        branch_mld: Some(branch_mld),
        failure_reason: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NcInstance {
    pub h: HyperquotientType,
    pub k0: u64,
    pub bound: Rational,
    pub branch: NcBranch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NcScanReport {
    pub r_max: u64,
    pub require_star: bool,
    pub accepted: u64,
    pub max_bound: Option<Rational>,
    /// Every accepted instance attaining `max_bound`, in `(r, a, e)` order.
    pub attaining: Vec<NcInstance>,
    /// Instances passing the residue hypotheses whose branch identity failed.
    pub anomalies: Vec<(HyperquotientType, u64, String)>,
}

struct NcPart {
    instances: Vec<NcInstance>,
    anomalies: Vec<(HyperquotientType, u64, String)>,
}

/// Distinct orderings of a sorted triple.
fn orderings([x, y, z]: [u64; 3]) -> Vec<[u64; 3]> {
    let mut out = vec![
        [x, y, z],
        [x, z, y],
        [y, x, z],
        [y, z, x],
        [z, x, y],
        [z, y, x],
    ];
    out.sort();
    out.dedup();
    out
}

/// Collects the admissible values of `e` into `buf`.
fn e_candidates(
    r: u64,
    tri: [u64; 3],
    a4: u64,
    require_star: bool,
    gcds: &[u64],
    buf: &mut Vec<u64>,
) {
    let q = gcds[a4 as usize];
    buf.clear();
    if require_star {
        buf.extend([
            (tri[0] + tri[1]) % r,
            (tri[0] + tri[2]) % r,
            (tri[1] + tri[2]) % r,
            (2 * a4) % r,
        ]);
        if q <= 2 {
            buf.extend(tri.iter().map(|&a| (2 * a) % r));
        }
    } else {
        buf.extend(0..r);
    }
    let mut kept = 0;
    for i in 0..buf.len() {
        let e = buf[i];
        if gcds[e as usize] == q && !buf[..kept].contains(&e) {
            buf[kept] = e;
            kept += 1;
        }
    }
    buf.truncate(kept);
}

/// Scans the tuples `u · (1, b, c, a_4; e)` for units `u` and `b ≤ c`.
///
/// With `S(k)` the residue sum minus the residue of `e`, the side conditions give
/// `S(k) + S(r-k) = 3r`, so conditions (1) and (2) say that `S(k) ∈ [r, 2r]` for
/// every `k` except one mirror pair `{k*, r-k*}` with `S(k*) < r`. That shape is
/// invariant under unit rescaling, which permutes `k`, and so are the star
/// conditions. Only the value `S(k*) = k0` pins down the rescaling: `u · k0 ≡ k*`.
fn nc_slice(r: u64, b: u64, table: &ResidueTable, require_star: bool) -> NcPart {
    let mut part = NcPart {
        instances: Vec::new(),
        anomalies: Vec::new(),
    };
    let us = units(r);
    let half = (r / 2) as usize;
    let ri = r as i64;
    let gcds: Vec<u64> = (0..r).map(|x| gcd(x, r)).collect();
    let mut partial = vec![0i64; half + 1];
    let mut es = Vec::with_capacity(r as usize);
    let mut seen = std::collections::BTreeSet::new();
    let a1 = 1 % r;
    for &c in us.iter().filter(|&&u| u >= b) {
        let (r1, r2, r3) = (table.row(a1), table.row(b), table.row(c));
        for k in 1..=half {
            partial[k] = (r1[k] + r2[k] + r3[k]) as i64;
        }
        for a4 in 0..r {
            let row4 = table.row(a4);
            e_candidates(r, [a1, b, c], a4, require_star, &gcds, &mut es);
            for &e in &es {
                let rowe = table.row(e);
                let mut exceptional = None;
                let mut ok = true;
                for k in 1..=half {
                    let s = partial[k] + row4[k] as i64 - rowe[k] as i64;
                    if s >= ri && s <= 2 * ri {
                        continue;
                    }
                    if exceptional.is_some() {
                        ok = false;
                        break;
                    }
                    exceptional = Some(if s < ri {
                        (k as u64, s)
                    } else {
                        (r - k as u64, 3 * ri - s)
                    });
                }
                let (true, Some((k_star, s_star))) = (ok, exceptional) else { continue };
                if s_star < 1 {
                    continue;
                }
                let k0 = s_star as u64;
                for &u in us.iter().filter(|&&u| mul_mod(u, k0, r) == k_star) {
                    let scaled = [a1, b, c].map(|a| mul_mod(a, u, r));
                    let (u4, ue) = (mul_mod(a4, u, r), mul_mod(e, u, r));
                    for [b1, b2, b3] in orderings_of(scaled) {
                        let h = HyperquotientType::new(
                            r,
                            [b1 as i64, b2 as i64, b3 as i64, u4 as i64],
                            ue as i64,
                        )
                        .expect("r > 0");
                        if !seen.insert(h) {
                            continue;
                        }
                        let v = nc_lemma_check(&h, k0, require_star).expect("k0 in range");
                        if v.accepted {
                            part.instances.push(NcInstance {
                                h,
                                k0,
                                bound: v.bound.expect("accepted"),
                                branch: v.branch.expect("accepted"),
                            });
                        } else if v.branch.is_some() {
                            part.anomalies
                                .push((h, k0, v.failure_reason.unwrap_or_default()));
                        }
                    }
                }
            }
        }
    }
    part
}

fn orderings_of(mut t: [u64; 3]) -> Vec<[u64; 3]> {
    t.sort_unstable();
    orderings(t)
}

fn nc_instances(
    r_max: u64,
    require_star: bool,
    jobs: usize,
) -> (Vec<NcInstance>, Vec<(HyperquotientType, u64, String)>) {
    let tables: Vec<ResidueTable> = (0..=r_max).map(|r| ResidueTable::new(r.max(1))).collect();
    let mut items: Vec<(u64, u64)> = (2..=r_max)
        .flat_map(|r| units(r).into_iter().map(move |b| (r, b)))
        .collect();
    // heaviest slices first for load balance; results are re-sorted below
    items.sort_by_key(|&(r, b)| (std::cmp::Reverse(r), b));
    let parts = ordered_map(&items, jobs, |&(r, b)| {
        nc_slice(r, b, &tables[r as usize], require_star)
    });

    // the same tuple can arise from several slices
    let mut instances = std::collections::BTreeMap::new();
    let mut anomalies = std::collections::BTreeSet::new();
    for p in parts {
        for inst in p.instances {
            instances.insert((inst.h, inst.k0), inst);
        }
        anomalies.extend(p.anomalies);
    }
    (
        instances.into_values().collect(),
        anomalies.into_iter().collect(),
    )
}

pub fn nc_lemma_scan(r_max: u64, require_star: bool, jobs: usize) -> Result<NcScanReport> {
    if r_max < 2 {
        return Err(Error::Precondition(format!("r_max must be at least 2, got {r_max}")));
    }
    let (instances, anomalies) = nc_instances(r_max, require_star, jobs);
    let mut max_bound: Option<Rational> = None;
    let mut attaining = Vec::new();
    for inst in &instances {
        match &max_bound {
            Some(m) if inst.bound < *m => {}
            Some(m) if inst.bound == *m => attaining.push(inst.clone()),
            _ => {
                max_bound = Some(inst.bound.clone());
                attaining = vec![inst.clone()];
            }
        }
    }
    Ok(NcScanReport {
        r_max,
        require_star,
        accepted: instances.len() as u64,
        max_bound,
        attaining,
        anomalies,
    })
}

/// Reference scan: every ordered tuple and every `k0`, through [`nc_lemma_check`].
pub fn nc_lemma_scan_naive(r_max: u64, require_star: bool) -> Vec<NcInstance> {
    let mut out = Vec::new();
    for r in 2..=r_max {
        for a in 0..r.pow(4) {
            let w = [a % r, a / r % r, a / r / r % r, a / r / r / r];
            for e in 0..r {
                let h = HyperquotientType::new(r, w.map(|x| x as i64), e as i64).expect("r > 0");
                for k0 in 1..r {
                    let v = nc_lemma_check(&h, k0, require_star).expect("k0 in range");
                    if v.accepted {
                        out.push(NcInstance {
                            h,
                            k0,
                            bound: v.bound.expect("accepted"),
                            branch: v.branch.expect("accepted"),
                        });
                    }
                }
            }
        }
    }
    out.sort_by_key(|x| (x.h, x.k0));
    out
}
