//! Minimal log discrepancies at the origin of cyclic quotient singularities.
//!
//! For `1/r(a_0, ..., a_n)` every lattice point of `N` in the open orthant
//! dominates one of the lifted vectors `α_k = (1/r)(lift(a_i k))`, where a zero
//! residue is lifted to `r`. The minimum of `α(x_0 ⋯ x_n)` is therefore taken
//! over `k ∈ [0, r)`, and [`mld_oracle`] re-derives it by enumerating the box.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{gcd, lift, mul_mod, residue_big, units, Rational};
use crate::error::{Error, Result};
use crate::parallel::ordered_map;
use crate::types::{QuotientType, Weighting};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MldResult {
    pub value: Rational,
    /// Smallest `k` attaining the minimum.
    pub witness_k: u64,
    /// Strictly positive lattice vector `(1/r)(lift(a_i k))`.
    pub witness_vector: Weighting,
}

/// Minimum of `Σ lift(a_i k)` over `k`, with the smallest minimizing `k`.
pub fn scaled_mld(r: u64, weights: &[u64]) -> (u64, u64) {
    let mut best = (weights.len() as u64 * r, 0);
    for k in 1..r {
        let s: u64 = weights.iter().map(|&a| lift(mul_mod(a, k, r), r)).sum();
        if s < best.0 {
            best = (s, k);
        }
    }
    best
}

pub fn mld_at_origin(q: &QuotientType) -> MldResult {
    let r = q.r();
    let (sum, k) = scaled_mld(r, q.weights());
    let coords = q
        .weights()
        .iter()
        .map(|&a| lift(mul_mod(a, k, r), r))
        .collect();
    MldResult {
        value: Rational::new(sum, r),
        witness_k: k,
        witness_vector: Weighting::from_trusted(r, coords),
    }
}

/// Brute-force minimum of `α(x_0 ⋯ x_n)` over all `α ∈ N` with every coordinate
/// in `(0, depth]`. Works in big integers and shares no code with [`mld_at_origin`].
pub fn mld_oracle(q: &QuotientType, depth: u64) -> Result<Rational> {
    if depth == 0 {
        return Err(Error::Precondition("oracle depth must be at least 1".into()));
    }
    let r = BigInt::from(q.r());
    let cap = &r * BigInt::from(depth);
    let weights: Vec<BigInt> = q.weights().iter().map(|&a| BigInt::from(a)).collect();
    let mut best: Option<BigInt> = None;

    for j in 0..q.r() {
        let j = BigInt::from(j);
        // smallest positive representative of each coordinate class
        let firsts: Vec<BigInt> = weights
            .iter()
            .map(|a| {
                let b = residue_big(&(a * &j), &r);
                if b.is_zero() {
                    r.clone()
                } else {
                    b
                }
            })
            .collect();
        let mut suffix_min = vec![BigInt::zero(); firsts.len() + 1];
        for i in (0..firsts.len()).rev() {
            suffix_min[i] = &suffix_min[i + 1] + &firsts[i];
        }
        let mut prefix = BigInt::zero();
        oracle_search(&firsts, &suffix_min, &r, &cap, 0, &mut prefix, &mut best);
    }
    let best = best.expect("depth >= 1 always admits the lifted vectors");
    Ok(Rational::new(best, r))
}

fn oracle_search(
    firsts: &[BigInt],
    suffix_min: &[BigInt],
    r: &BigInt,
    cap: &BigInt,
    i: usize,
    prefix: &mut BigInt,
    best: &mut Option<BigInt>,
) {
    if i == firsts.len() {
        if best.as_ref().is_none_or(|b| *prefix < *b) {
            *best = Some(prefix.clone());
        }
        return;
    }
    let mut value = firsts[i].clone();
    while value <= *cap {
        let bound = &*prefix + &value + &suffix_min[i + 1];
        if best.as_ref().is_some_and(|b| bound >= *b) {
            break;
        }
        *prefix += &value;
        oracle_search(firsts, suffix_min, r, cap, i + 1, prefix, best);
        *prefix -= &value;
        value += r;
    }
}

/// Equivalence class of a quotient type under unit rescaling and permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeClass {
    canonical: QuotientType,
}

impl TypeClass {
    pub fn canonical(&self) -> &QuotientType {
        &self.canonical
    }
}

/// Orders representatives by weight sum, then lexicographically.
fn class_key(weights: &[u64]) -> (u64, Vec<u64>) {
    let mut sorted = weights.to_vec();
    sorted.sort_unstable();
    (sorted.iter().sum(), sorted)
}

pub(crate) fn canonical_weights(r: u64, weights: &[u64]) -> Vec<u64> {
    units(r)
        .into_iter()
        .map(|u| class_key(&weights.iter().map(|&a| mul_mod(a, u, r)).collect::<Vec<_>>()))
        .min()
        .map(|(_, w)| w)
        .expect("units(r) is never empty")
}

/// Least representative of the class of `q` over all unit multiples and
/// permutations, ordered by weight sum and then lexicographically.
pub fn normalize_type(q: &QuotientType) -> TypeClass {
    let canonical = QuotientType::from_residues(q.r(), canonical_weights(q.r(), q.weights()))
        .expect("same shape as a valid type");
    TypeClass { canonical }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanRecord {
    pub r: u64,
    pub weights: Vec<u64>,
    pub mld: Rational,
    pub witness_k: u64,
}

impl ScanRecord {
    fn new(class: &TypeClass, mld: &MldResult) -> Self {
        ScanRecord {
            r: class.canonical.r(),
            weights: class.canonical.weights().to_vec(),
            mld: mld.value.clone(),
            witness_k: mld.witness_k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanHit {
    pub class: TypeClass,
    pub mld: MldResult,
}

impl ScanHit {
    fn of(weights: Vec<u64>, r: u64) -> Self {
        let q = QuotientType::from_residues(r, weights).expect("scan types are valid");
        let class = normalize_type(&q);
        let mld = mld_at_origin(class.canonical());
        ScanHit { class, mld }
    }

    pub fn record(&self) -> ScanRecord {
        ScanRecord::new(&self.class, &self.mld)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapScan {
    /// Classes with `threshold < mld < ceiling`, sorted by `(r, canonical weights)`.
    pub hits: Vec<ScanHit>,
    pub classes_scanned: u64,
    /// Largest mld strictly below the ceiling among all scanned classes.
    pub max_below: Option<ScanHit>,
}

struct PartialScan {
    classes: BTreeSet<Vec<u64>>,
    hits: BTreeSet<Vec<u64>>,
    best_below: Option<(u64, Vec<u64>)>,
}

fn better_below(a: Option<(u64, Vec<u64>)>, b: Option<(u64, Vec<u64>)>, r: u64) -> Option<(u64, Vec<u64>)> {
    // scaled values share the denominator r within one r
    let _ = r;
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
    }
}

fn merge_scan(r_max: u64, per_r: Vec<(u64, PartialScan)>) -> GapScan {
    let _ = r_max;
    let mut hits = Vec::new();
    let mut classes_scanned = 0u64;
    let mut max_below: Option<ScanHit> = None;
    for (r, part) in per_r {
        classes_scanned += part.classes.len() as u64;
        for w in part.hits {
            hits.push(ScanHit::of(w, r));
        }
        if let Some((_, w)) = part.best_below {
            let hit = ScanHit::of(w, r);
            let replace = max_below
                .as_ref()
                .is_none_or(|m| hit.mld.value > m.mld.value);
            if replace {
                max_below = Some(hit);
            }
        }
    }
    GapScan {
        hits,
        classes_scanned,
        max_below,
    }
}

/// Isolated 3-dimensional classes with `threshold < mld < 1` and `r ≤ r_max`.
pub fn gap_scan_dim3(r_max: u64, threshold: &Rational, jobs: usize) -> Result<GapScan> {
    if !(threshold.is_positive() && *threshold < Rational::one()) {
        return Err(Error::Precondition(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    // Every isolated class has a representative 1/r(1, b, c) with 1 ≤ b ≤ c.
    let items: Vec<(u64, u64)> = (1..=r_max)
        .flat_map(|r| {
            let us = units(r);
            let lead: Vec<u64> = if r == 1 { vec![0] } else { us };
            lead.into_iter().map(move |b| (r, b))
        })
        .collect();

    let parts = ordered_map(&items, jobs, |&(r, b)| {
        let mut part = PartialScan {
            classes: BTreeSet::new(),
            hits: BTreeSet::new(),
            best_below: None,
        };
        let first = if r == 1 { 0 } else { 1 };
        for c in (b..r.max(1)).filter(|&c| gcd(c, r) == 1) {
            let w = [first, b, c];
            let canon = canonical_weights(r, &w);
            if !part.classes.insert(canon.clone()) {
                continue;
            }
            let (sum, _) = scaled_mld(r, &w);
            if sum < r {
                let value = Rational::new(sum, r);
                if value > *threshold {
                    part.hits.insert(canon.clone());
                }
                part.best_below = better_below(part.best_below.take(), Some((sum, canon)), r);
            }
        }
        (r, part)
    });
    Ok(merge_scan(r_max, merge_by_r(parts)))
}

fn merge_by_r(parts: Vec<(u64, PartialScan)>) -> Vec<(u64, PartialScan)> {
    let mut out: Vec<(u64, PartialScan)> = Vec::new();
    for (r, part) in parts {
        match out.last_mut() {
            Some((lr, acc)) if *lr == r => {
                acc.classes.extend(part.classes);
                acc.hits.extend(part.hits);
                acc.best_below = better_below(acc.best_below.take(), part.best_below, r);
            }
            _ => out.push((r, part)),
        }
    }
    out
}

/// Small, faithful 5-dimensional classes with `threshold < mld < 2` and `r ≤ r_max`.
/// Isolatedness is not required.
pub fn gap_scan_dim5(r_max: u64, threshold: &Rational, jobs: usize) -> Result<GapScan> {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    if !(*threshold > one && *threshold < two) {
        return Err(Error::Precondition(format!(
            "threshold must lie in (1, 2), got {threshold}"
        )));
    }
    let items: Vec<(u64, u64)> = (1..=r_max)
        .flat_map(|r| (0..r).map(move |a0| (r, a0)))
        .collect();
    let parts = ordered_map(&items, jobs, |&(r, a0)| {
        let mut part = PartialScan {
            classes: BTreeSet::new(),
            hits: BTreeSet::new(),
            best_below: None,
        };
        let mut w = [a0, 0, 0, 0, 0];
        for a1 in a0..r {
            w[1] = a1;
            for a2 in a1..r {
                w[2] = a2;
                for a3 in a2..r {
                    w[3] = a3;
                    for a4 in a3..r {
                        w[4] = a4;
                        let q = QuotientType::from_residues(r, w.to_vec()).expect("valid");
                        if !q.is_faithful() || !q.is_small_action() {
                            continue;
                        }
                        let canon = canonical_weights(r, &w);
                        if canon != w || !part.classes.insert(canon.clone()) {
                            continue;
                        }
                        let (sum, _) = scaled_mld(r, &w);
                        if sum < 2 * r {
                            if Rational::new(sum, r) > *threshold {
                                part.hits.insert(canon.clone());
                            }
                            part.best_below =
                                better_below(part.best_below.take(), Some((sum, canon)), r);
                        }
                    }
                }
            }
        }
        (r, part)
    });
    Ok(merge_scan(r_max, merge_by_r(parts)))
}

/// Every class of `dim`-dimensional types with `r ≤ r_max`, in `(r, weights)` order.
pub fn all_classes(r_max: u64, dim: usize) -> Vec<QuotientType> {
    let mut out = Vec::new();
    for r in 1..=r_max {
        let mut seen = BTreeSet::new();
        let mut w = vec![0u64; dim];
        loop {
            let canon = canonical_weights(r, &w);
            seen.insert(canon);
            // next non-decreasing tuple
            let mut i = dim;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if w[i] + 1 < r {
                    w[i] += 1;
                    let v = w[i];
                    for x in w.iter_mut().skip(i + 1) {
                        *x = v;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || (r == 1) {
                break;
            }
        }
        out.extend(
            seen.into_iter()
                .map(|w| QuotientType::from_residues(r, w).expect("valid")),
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleDiscrepancy {
    pub r: u64,
    pub weights: Vec<u64>,
    pub closed_form: Rational,
    pub oracle: Rational,
}

/// Compares [`mld_at_origin`] with [`mld_oracle`] on every class with `r ≤ r_max`.
pub fn oracle_diff(
    r_max: u64,
    dim: usize,
    depth: u64,
    jobs: usize,
) -> Result<(u64, Vec<OracleDiscrepancy>)> {
    if !(2..=5).contains(&dim) {
        return Err(Error::Precondition(format!(
            "dimension must be in 2..=5, got {dim}"
        )));
    }
    if depth == 0 {
        return Err(Error::Precondition("oracle depth must be at least 1".into()));
    }
    let classes = all_classes(r_max, dim);
    let results = ordered_map(&classes, jobs, |q| {
        let closed = mld_at_origin(q).value;
        let oracle = mld_oracle(q, depth).expect("depth checked");
        (closed != oracle).then(|| OracleDiscrepancy {
            r: q.r(),
            weights: q.weights().to_vec(),
            closed_form: closed,
            oracle,
        })
    });
    Ok((
        classes.len() as u64,
        results.into_iter().flatten().collect(),
    ))
}

/// Scaled value as `u64`, for callers that already know the denominator.
pub fn scaled_value(value: &Rational, r: u64) -> Option<u64> {
    let scaled = value.clone() * Rational::from_integer(r);
    if scaled.is_integer() {
        scaled.numer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qt(s: &str) -> QuotientType {
        s.parse().unwrap()
    }

    #[test]
    fn mld_examples() {
        let m = mld_at_origin(&qt("1/13(3,4,5)"));
        assert_eq!(m.value, Rational::frac(12, 13));
        assert_eq!(m.witness_k, 1);
        assert_eq!(m.witness_vector.to_string(), "(3,4,5)/13");

        let m = mld_at_origin(&qt("1/3(1,1)"));
        assert_eq!(m.value, Rational::frac(2, 3));
        assert_eq!(m.witness_k, 1);

        let m = mld_at_origin(&qt("1/1(0,0,0)"));
        assert_eq!(m.value, Rational::from_integer(3));
        assert_eq!(m.witness_k, 0);

        let m = mld_at_origin(&qt("1/5(2,3,1)"));
        assert_eq!(m.value, Rational::frac(6, 5));
        assert_eq!(m.witness_k, 1);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            mld_oracle(&qt("1/13(3,4,5)"), 4).unwrap(),
            Rational::frac(12, 13)
        );
        assert_eq!(mld_oracle(&qt("1/3(1,1)"), 3).unwrap(), Rational::frac(2, 3));
        assert_eq!(mld_oracle(&qt("1/5(2,3,1)"), 4).unwrap(), Rational::frac(6, 5));
        assert!(mld_oracle(&qt("1/5(2,3,1)"), 0).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_type(&qt("1/13(6,8,10)")),
            normalize_type(&qt("1/13(3,4,5)"))
        );
        assert_eq!(
            normalize_type(&qt("1/13(3,4,5)")).canonical(),
            &qt("1/13(3,4,5)")
        );
        assert_eq!(
            normalize_type(&qt("1/5(4,3,2)")).canonical(),
            &qt("1/5(1,2,3)")
        );
    }

    #[test]
    fn scan3_small_examples() {
        let t = Rational::frac(12, 13);
        assert!(gap_scan_dim3(13, &t, 1).unwrap().hits.is_empty());

        // 1/11(2,3,5) also lies above 9/10
        let scan = gap_scan_dim3(13, &Rational::frac(9, 10), 1).unwrap();
        let recs: Vec<_> = scan.hits.iter().map(|h| h.record()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!((recs[0].r, recs[0].weights.clone()), (11, vec![2, 3, 5]));
        assert_eq!(recs[0].mld, Rational::frac(10, 11));
        assert_eq!((recs[1].r, recs[1].weights.clone()), (13, vec![3, 4, 5]));
        assert_eq!(recs[1].mld, Rational::frac(12, 13));
        for h in &scan.hits {
            assert_eq!(mld_oracle(h.class.canonical(), 3).unwrap(), h.mld.value);
        }

        let scan = gap_scan_dim3(3, &Rational::frac(1, 2), 1).unwrap();
        assert!(scan.hits.is_empty());
        assert!(gap_scan_dim3(3, &Rational::one(), 1).is_err());
    }

    #[test]
    fn scan5_small_examples() {
        assert!(gap_scan_dim5(2, &Rational::frac(3, 2), 1).unwrap().hits.is_empty());
        let scan = gap_scan_dim5(1, &Rational::frac(3, 2), 1).unwrap();
        assert!(scan.hits.is_empty());
        assert_eq!(scan.classes_scanned, 1);
        assert!(gap_scan_dim5(3, &Rational::one(), 1).is_err());
    }

    #[test]
    fn class_enumeration_counts() {
        // 1/2: (0,0),(0,1),(1,1); 1/3 adds (0,0),(0,1),(1,1),(1,2)
        let classes = all_classes(3, 2);
        assert_eq!(classes.len(), 1 + 3 + 4);
        assert!(classes.iter().all(|q| q.dim() == 2));
    }

    fn arb_type(max_r: u64, dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = QuotientType> {
        (1..=max_r, dims).prop_flat_map(|(r, n)| {
            prop::collection::vec(0..r, n)
                .prop_map(move |w| QuotientType::from_residues(r, w).unwrap())
        })
    }

    proptest! {
        #[test]
        fn witness_is_valid(q in arb_type(60, 2..=5)) {
            let m = mld_at_origin(&q);
            prop_assert!(m.witness_vector.coords().iter().all(|&b| b >= 1));
            prop_assert!(m.witness_vector.is_member_of(q.weights()));
            prop_assert_eq!(m.witness_vector.total(), m.value);
        }

        #[test]
        fn mld_is_unit_and_permutation_invariant(q in arb_type(60, 2..=5), shift in 0usize..5) {
            let base = mld_at_origin(&q).value;
            let r = q.r();
            for u in units(r) {
                let mut w: Vec<u64> = q.weights().iter().map(|&a| mul_mod(a, u, r)).collect();
                let len = w.len();
                w.rotate_left(shift % len);
                let p = QuotientType::from_residues(r, w).unwrap();
                prop_assert_eq!(&mld_at_origin(&p).value, &base);
            }
            prop_assert_eq!(mld_at_origin(normalize_type(&q).canonical()).value, base);
        }

        #[test]
        fn appending_a_unit_weight_does_not_decrease_mld(q in arb_type(40, 2..=4), b in 1u64..40) {
            let r = q.r();
            prop_assume!(r > 1 && gcd(b % r, r) == 1);
            let mut w = q.weights().to_vec();
            w.push(b % r);
            let bigger = QuotientType::from_residues(r, w).unwrap();
            prop_assert!(mld_at_origin(&bigger).value >= mld_at_origin(&q).value);
        }
    }

    #[test]
    fn terminal_quotient_family() {
        for r in 2..=60u64 {
            for b in units(r) {
                let q = QuotientType::new(r, &[1, r as i64 - 1, b as i64]).unwrap();
                let expected_min = (1..r)
                    .map(|k| {
                        let x = mul_mod(b, k, r);
                        x.min(r - x)
                    })
                    .min()
                    .unwrap();
                let m = mld_at_origin(&q).value;
                assert_eq!(m, Rational::one() + Rational::new(expected_min, r));
                assert!(m > Rational::one());
            }
        }
    }
}
