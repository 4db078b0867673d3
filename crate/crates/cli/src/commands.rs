use mldlab_core::exclusion::{exclude_candidate, replay_exclusions, Outcome};
use mldlab_core::lemma::{
    nc_lemma_check, nc_lemma_scan, terminal_lemma_hypothesis, terminal_lemma_pairing,
    verify_terminal_lemma, PairingCertificate,
};
use mldlab_core::mld::{gap_scan_dim3, gap_scan_dim5, mld_at_origin, oracle_diff, GapScan};
use mldlab_core::screen::{classify_f_case, classify_f_case_weighted, screen_rule1, FCase};
use mldlab_core::{Error, HyperquotientType, MonomialSupport, QuotientType, Rational};
use serde_json::json;

use crate::report::Report;

type Result<T> = std::result::Result<T, Error>;

pub fn mld(q: &QuotientType) -> Report {
    let res = mld_at_origin(q);
    let mut rep = Report::default();
    rep.push(&json!({
        "r": q.r(),
        "weights": q.weights(),
        "mld": res.value,
        "witness_k": res.witness_k,
        "witness_vector": res.witness_vector,
    }));
    rep.set("isolated", q.is_isolated());
    rep.text = Some(format!("{} (k={})", res.value, res.witness_k));
    rep
}

fn gap_report(scan: GapScan) -> Report {
    let mut rep = Report::default();
    for hit in &scan.hits {
        rep.push(&hit.record());
    }
    rep.set("classes_scanned", scan.classes_scanned);
    rep.set("hits", scan.hits.len());
    rep.set("max_below", scan.max_below.as_ref().map(|h| h.record()));
    rep
}

pub fn scan3(r_max: u64, threshold: &Rational, jobs: usize) -> Result<Report> {
    Ok(gap_report(gap_scan_dim3(r_max, threshold, jobs)?))
}

pub fn scan5(r_max: u64, threshold: &Rational, jobs: usize) -> Result<Report> {
    Ok(gap_report(gap_scan_dim5(r_max, threshold, jobs)?))
}

pub fn oracle(r_max: u64, dim: usize, depth: u64, jobs: usize) -> Result<Report> {
    let (classes, bad) = oracle_diff(r_max, dim, depth, jobs)?;
    let mut rep = Report::default();
    for d in &bad {
        rep.push(d);
    }
    rep.set("classes", classes);
    rep.set("discrepancies", bad.len());
    rep.anomalies = bad.len() as u64;
    Ok(rep)
}

fn describe_pairing(cert: &PairingCertificate) -> String {
    match cert {
        PairingCertificate::QEq1 { pairs } => pairs
            .iter()
            .map(|(x, y)| format!("({x},{y})"))
            .collect::<Vec<_>>()
            .join(" "),
        PairingCertificate::QGt1 { one, pair } => {
            format!("a4 = e, {one} = 1, ({},{})", pair.0, pair.1)
        }
    }
}

pub fn terminal_check(h: &HyperquotientType) -> Report {
    let mut rep = Report::default();
    let r = h.r();
    let failing: Vec<u64> = (1..r)
        .filter(|&k| h.residues_at(k).iter().sum::<u64>() != h.e_residue_at(k) + k + r)
        .collect();
    let holds = terminal_lemma_hypothesis(h);
    let pairing = if holds { terminal_lemma_pairing(h).ok() } else { None };
    rep.push(&json!({
        "type": h,
        "hypothesis": holds,
        "failing_k": failing,
        "certificate": pairing,
    }));
    rep.text = Some(match (&pairing, holds) {
        (Some(c), _) => format!("hypothesis holds; pairing {}", describe_pairing(c)),
        (None, true) => {
            rep.anomalies = 1;
            "hypothesis holds but no pairing exists".to_string()
        }
        (None, false) => format!("hypothesis fails at k={}", failing[0]),
    });
    rep
}

pub fn terminal_verify(r_min: u64, r_max: u64, jobs: usize) -> Result<Report> {
    let mut rep = Report::default();
    let (mut tuples, mut holds, mut bad) = (0u64, 0u64, 0u64);
    for r in r_min..=r_max {
        let v = verify_terminal_lemma(r, jobs)?;
        tuples += v.tuples;
        holds += v.hypothesis_holds;
        bad += v.counterexamples.len() as u64;
        rep.push(&v);
    }
    rep.set("tuples", tuples);
    rep.set("hypothesis_holds", holds);
    rep.set("counterexamples", bad);
    rep.anomalies = bad;
    Ok(rep)
}

pub fn nc_check(h: &HyperquotientType, k0: u64, require_star: bool) -> Result<Report> {
    let v = nc_lemma_check(h, k0, require_star)?;
    let mut rep = Report::default();
    rep.text = Some(if v.accepted {
        let branch = serde_json::to_value(v.branch).unwrap();
        format!(
            "accepted: bound {} via {}, branch mld {}",
            v.bound.as_ref().unwrap(),
            branch.as_str().unwrap_or(""),
            v.branch_mld.as_ref().unwrap()
        )
    } else {
        format!("rejected: {}", v.failure_reason.as_deref().unwrap_or("unknown"))
    });
    let mut rec = serde_json::to_value(&v).unwrap();
    rec.as_object_mut().unwrap().insert("type".into(), json!(h));
    rep.push(&rec);
    Ok(rep)
}

pub fn nc_scan(r_max: u64, require_star: bool, jobs: usize) -> Result<Report> {
    let s = nc_lemma_scan(r_max, require_star, jobs)?;
    let mut rep = Report::default();
    for inst in &s.attaining {
        rep.push(inst);
    }
    rep.set("r_max", s.r_max);
    rep.set("require_star", s.require_star);
    rep.set("accepted", s.accepted);
    rep.set("max_bound", &s.max_bound);
    rep.set("attaining", s.attaining.len());
    rep.set(
        "anomalies",
        s.anomalies
            .iter()
            .map(|(h, k0, why)| json!({"type": h, "k0": k0, "reason": why}))
            .collect::<Vec<_>>(),
    );
    rep.anomalies = s.anomalies.len() as u64;
    Ok(rep)
}

pub fn classify(f: &MonomialSupport, h: Option<&HyperquotientType>) -> Result<Report> {
    let case = match h {
        Some(h) => classify_f_case_weighted(h, f)?,
        None => classify_f_case(f)?,
    };
    let mut rep = Report::default();
    rep.push(&json!({"support": f, "type": h, "case": case}));
    rep.text = Some(case.to_string());
    Ok(rep)
}

pub fn screen(h: &HyperquotientType, f: &MonomialSupport, delta: &Rational, bound: u64) -> Result<Report> {
    let s = screen_rule1(h, f, delta, bound)?;
    let mut rep = Report::default();
    for (kind, list) in [("violation", &s.violations), ("beta_candidate", &s.beta_candidates)] {
        for e in list {
            rep.push(&json!({
                "kind": kind,
                "alpha": e.alpha,
                "value": e.value,
                "primitive": e.primitive,
            }));
        }
    }
    rep.set("clear", s.clear);
    rep.set("violations", s.violations.len());
    rep.set("beta_candidates", s.beta_candidates.len());
    rep.set("bound_used", s.bound_used);
    rep.set("vectors_examined", s.vectors_examined);
    rep.text = Some(if s.clear {
        format!("clear ({} beta candidate(s))", s.beta_candidates.len())
    } else {
        format!(
            "not clear: {} violation(s), {} beta candidate(s)",
            s.violations.len(),
            s.beta_candidates.len()
        )
    });
    Ok(rep)
}

fn describe_outcome(o: &Outcome) -> String {
    match o {
        Outcome::Found { monomial } => format!("found {monomial}"),
        Outcome::Absent => "no such monomial".into(),
        Outcome::Unresolved { needed_degree } => format!("unresolved below degree {needed_degree}"),
        Outcome::Contradiction { reason } => reason.clone(),
    }
}

pub fn exclude(h: &HyperquotientType, case: FCase, delta: &Rational, degree_bound: u32) -> Result<Report> {
    let e = exclude_candidate(h, case, delta, degree_bound)?;
    let mut rep = Report::default();
    for b in &e.branches {
        rep.push(b);
    }
    rep.set("candidate", e.candidate);
    rep.set("case", e.case);
    rep.set("excluded", e.excluded);
    rep.set("inconclusive", e.inconclusive);
    rep.set("terminal_by_ksb", e.terminal_by_ksb);
    rep.set("assumed_unique_beta", e.assumed_unique_beta);
    rep.set("surviving_branches", &e.surviving_branches);
    rep.set("witnesses", &e.witnesses);
    rep.text = Some(if e.excluded {
        let w = &e.witnesses[0];
        format!(
            "excluded; witness k={} forced weight {} in {}: {}",
            w.k,
            w.forced_weight,
            w.family,
            describe_outcome(&w.outcome)
        )
    } else if e.terminal_by_ksb {
        "not excluded; terminal by KSB".into()
    } else if e.inconclusive {
        "inconclusive; raise the degree bound".into()
    } else {
        let names: Vec<String> = e.surviving_branches.iter().map(|b| b.to_string()).collect();
        format!("survives in branch(es) {}", names.join(", "))
    });
    Ok(rep)
}

pub fn replay(r_min: u64, r_max: u64, delta: &Rational, degree_bound: u32, jobs: usize) -> Result<Report> {
    let s = replay_exclusions(r_min, r_max, delta, degree_bound, jobs)?;
    let mut rep = Report::default();
    for rec in &s.records {
        rep.push(rec);
    }
    let v = serde_json::to_value(&s).unwrap();
    for (k, val) in v.as_object().unwrap() {
        rep.summary.insert(k.clone(), val.clone());
    }
    rep.anomalies = s.survivors + s.inconclusive;
    Ok(rep)
}
