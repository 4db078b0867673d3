//! Library results against brute-force oracles written independently here.

use mldlab_core::exclusion::{candidate_types, exclude_candidate, Family};
use mldlab_core::lemma::{nc_lemma_check, terminal_lemma_hypothesis, terminal_lemma_pairing, NcBranch};
use mldlab_core::mld::{gap_scan_dim3, mld_at_origin};
use mldlab_core::screen::{alternation_failures, alternative_trace, screen_rule1, FCase, TraceKind};
use mldlab_core::{HyperquotientType, MonomialSupport, QuotientType, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Minimal coordinate sum over lattice points with all coordinates in [1, r],
/// found by testing every such integer vector for membership.
fn brute_mld(r: u64, w: &[u64]) -> (u64, u64) {
    let n = w.len() as u32;
    let mut best = (u64::MAX, 0);
    for idx in 0..r.pow(n) {
        let u: Vec<u64> = (0..n).map(|i| idx / r.pow(i) % r + 1).collect();
        let member = (0..r).find(|&k| u.iter().zip(w).all(|(&x, &a)| x % r == a * k % r));
        if let Some(k) = member {
            let s: u64 = u.iter().sum();
            if s < best.0 || (s == best.0 && k < best.1) {
                best = (s, k);
            }
        }
    }
    best
}

fn is_isolated(r: u64, w: &[u64]) -> bool {
    w.iter().all(|&a| gcd(a, r) == 1)
}

#[test]
fn known_values() {
    let q: QuotientType = "1/13(3,4,5)".parse().unwrap();
    let m = mld_at_origin(&q);
    assert_eq!(m.value, Rational::frac(12, 13));
    assert_eq!(m.witness_k, 1);
    let q: QuotientType = "1/3(1,1)".parse().unwrap();
    assert_eq!(mld_at_origin(&q).value, Rational::frac(2, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_brute_force(r in 2u64..16, a in 0u64..16, b in 0u64..16, c in 0u64..16) {
        let w = [a % r, b % r, c % r];
        let q = QuotientType::from_residues(r, w.to_vec()).unwrap();
        let got = mld_at_origin(&q);
        let (s, k) = brute_mld(r, &w);
        prop_assert_eq!(got.value, Rational::frac(s as i64, r));
        prop_assert_eq!(got.witness_k, k);
    }
}

#[test]
fn gap_scan_matches_brute_force_listing() {
    let threshold = Rational::frac(9, 10);
    let scan = gap_scan_dim3(16, &threshold, 1).unwrap();
    let mut from_lib: Vec<Rational> = scan.hits.iter().map(|h| h.mld.value.clone()).collect();
    from_lib.sort();
    from_lib.dedup();
    // every isolated 1/r(a,b,c) with threshold < mld < 1
    let mut brute = Vec::new();
    for r in 2..=16u64 {
        for a in 1..r {
            for b in a..r {
                for c in b..r {
                    if !is_isolated(r, &[a, b, c]) {
                        continue;
                    }
                    let v = Rational::frac(brute_mld(r, &[a, b, c]).0 as i64, r);
                    if v > threshold && v < Rational::one() {
                        brute.push(v);
                    }
                }
            }
        }
    }
    brute.sort();
    brute.dedup();
    assert_eq!(from_lib, brute);
    assert_eq!(brute, vec![Rational::frac(10, 11), Rational::frac(12, 13)]);
}

/// Hypothesis of the terminal lemma, checked directly.
fn brute_hypothesis(r: u64, a: [u64; 4], e: u64) -> bool {
    (1..r).all(|k| a.iter().map(|&x| x * k % r).sum::<u64>() == e * k % r + k + r)
}

/// Some arrangement of `a1..a4, -e, -1` into three pairs summing to 0, or
/// `a4 = e` with one of the rest equal to 1 and the other two summing to 0.
fn brute_pairing(r: u64, a: [u64; 4], e: u64) -> bool {
    let six = [a[0], a[1], a[2], a[3], (r - e) % r, r - 1];
    let mut perm = [0usize, 1, 2, 3, 4, 5];
    let mut found = false;
    permute(&mut perm, 0, &mut |p| {
        if (0..3).all(|i| (six[p[2 * i]] + six[p[2 * i + 1]]).is_multiple_of(r)) {
            found = true;
        }
    });
    if found {
        return true;
    }
    let q = gcd(e, r);
    q > 1
        && a[3] == e
        && (0..3).any(|i| {
            let rest: Vec<u64> = (0..3).filter(|&j| j != i).map(|j| a[j]).collect();
            a[i] == 1 % r && (rest[0] + rest[1]).is_multiple_of(r)
        })
}

fn permute(p: &mut [usize; 6], i: usize, f: &mut impl FnMut(&[usize; 6])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

#[test]
fn terminal_lemma_against_brute_force() {
    for r in 2..=9u64 {
        for idx in 0..r.pow(5) {
            let d: Vec<u64> = (0..5).map(|i| idx / r.pow(i) % r).collect();
            let (a, e) = ([d[0], d[1], d[2], d[3]], d[4]);
            let h = HyperquotientType::new(r, a.map(|x| x as i64), e as i64).unwrap();
            let holds = brute_hypothesis(r, a, e);
            assert_eq!(terminal_lemma_hypothesis(&h), holds, "{h}");
            if holds {
                let side = gcd(e, r) == gcd(a[3], r) && a[..3].iter().all(|&x| gcd(x, r) == 1);
                if side {
                    assert!(brute_pairing(r, a, e), "{h}");
                    let cert = terminal_lemma_pairing(&h).unwrap();
                    assert!(cert.validate(&h));
                }
            }
        }
    }
}

#[test]
fn nc_lemma_instance() {
    let h: HyperquotientType = "(13;3,4,7,0;0)".parse().unwrap();
    let v = nc_lemma_check(&h, 10, true).unwrap();
    assert!(v.accepted);
    assert_eq!(v.bound, Some(Rational::frac(10, 13)));
    assert_eq!(v.branch, Some(NcBranch::QReduction));
    // branch identity: mld of 1/13(3,4,7) by brute force
    let (s, _) = brute_mld(13, &[3, 4, 7]);
    assert_eq!(Rational::frac(s as i64, 13), Rational::frac(10, 13));
    assert_eq!(v.branch_mld, Some(Rational::frac(10, 13)));
}

#[test]
fn alternation_on_xy_tuples() {
    for r in 2..=25u64 {
        for a in 0..r {
            for c in 0..r {
                for e in 0..r {
                    let b = (e + r - a) % r;
                    let d = (r + 1 - c) % r;
                    let h = HyperquotientType::new(r, [a, b, c, d].map(|x| x as i64), e as i64).unwrap();
                    let tr = alternative_trace(&h, TraceKind::Xy).unwrap();
                    assert!(alternation_failures(&h, &tr).is_empty(), "{h}");
                }
            }
        }
    }
}

/// Equivariant `(z,t)`-monomials of degree 2..=6 for the type.
fn zt_monomials(h: &HyperquotientType) -> Vec<Vec<u32>> {
    let r = h.r();
    let w = h.weights();
    let mut out = Vec::new();
    for i in 0..=6u32 {
        for j in 0..=6 - i {
            if i + j >= 2 && (w[2] * i as u64 + w[3] * j as u64) % r == h.e() {
                out.push(vec![0, 0, i, j]);
            }
        }
    }
    out
}

#[test]
fn excluded_candidates_fail_the_screen() {
    let delta = Rational::frac(1, 19);
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut checked = 0;
    for r in 14..=20 {
        for family in [Family::CaQgt1B, Family::CaQ1C, Family::CaQ1D] {
            for h in candidate_types(family, r).unwrap() {
                let rep = exclude_candidate(&h, FCase::CA, &delta, 12).unwrap();
                if rep.terminal_by_ksb {
                    // b = r - 1 in family B is the pattern of family A
                    continue;
                }
                assert!(rep.excluded, "{h}");
                let pool = zt_monomials(&h);
                for _ in 0..3 {
                    let mut mons = vec![vec![1, 1, 0, 0]];
                    mons.extend(pool.iter().filter(|_| rng.gen_bool(0.5)).cloned());
                    let f = MonomialSupport::new(4, mons).unwrap();
                    let s = screen_rule1(&h, &f, &delta, 2).unwrap();
                    assert!(!s.clear, "{h} {f}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100);
}
