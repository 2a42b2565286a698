//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use erpsel_core::adaptation::{
    objective_value, optimize_adaptation, performance_profile, AdaptationInstance, AdaptationPlan,
    AdaptationStrategy, Mismatch, PlanChoice,
};
use erpsel_core::cli;
use erpsel_core::demo;
use erpsel_core::macbeth::{
    check_consistency, derive_scale, derive_weights, fit_unit, locate_conflicts, Judgment, JudgmentMatrix,
    MatrixContext,
};
use erpsel_core::model::{CriterionId, Requirement, RequirementId, RequirementSet, TailoringType};
use erpsel_core::project::{load, save};
use erpsel_core::scoring::rank;

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn criterion_1() -> Outcome {
    let w = demo::printed_weights();
    let vs = demo::printed_vectors();
    let start = Instant::now();
    let r = rank(&vs, &w).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.order() == [demo::SAP, demo::ORACLE, demo::MICROSOFT], || format!("order {:?}", r.order()))?;
    let mut scores = Vec::new();
    for e in &r.entries {
        let printed = demo::PRINTED_SCORES.iter().find(|s| s.0 == e.candidate.as_str()).unwrap().2;
        ensure((e.overall - printed).abs() <= 0.005, || format!("{} scored {:.4}, expected {printed}", e.candidate, e.overall))?;
        scores.push(format!("{}={:.4}", e.candidate, e.overall));
    }
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:?}", scores.join(" ")))
}

fn criterion_2() -> Outcome {
    let m = demo::weighting_matrix();
    ensure(check_consistency(&m).map_err(|e| e.to_string())?.consistent, || "weighting matrix inconsistent".into())?;
    let printed: Vec<f64> = m
        .elements
        .iter()
        .map(|e| demo::CRITERIA.iter().position(|c| *c == e.as_str()).map_or(0.0, |i| demo::PRINTED_WEIGHTS[i]))
        .collect();
    let unit = fit_unit(&m, &printed, 0.005).map_err(|e| e.to_string())?;
    let unit = unit.ok_or("printed weights violate the judgments")?;
    let w = derive_weights(&m).map_err(|e| e.to_string())?;
    ensure((w.sum() - 1.0).abs() <= 1e-9, || format!("weights sum to {}", w.sum()))?;
    let order = ["FC", "RA", "TP", "TCO"].map(|c| w.get(&CriterionId::new(c)).unwrap_or(f64::NAN));
    ensure(order.windows(2).all(|p| p[0] > p[1]), || format!("order FC>RA>TP>TCO broken: {order:?}"))?;
    Ok(format!("printed weights feasible at unit {unit:.4}; derived {order:.4?}"))
}

fn criterion_3() -> Outcome {
    let m = demo::security_matrix();
    ensure(check_consistency(&m).map_err(|e| e.to_string())?.consistent, || "security matrix inconsistent".into())?;
    let unit = fit_unit(&m, &demo::PRINTED_SECURITY_SCALE, 0.005).map_err(|e| e.to_string())?;
    let unit = unit.ok_or("printed scale violates the judgments")?;
    let s = derive_scale(&m).map_err(|e| e.to_string())?;
    let v = s.values();
    ensure(v.windows(2).all(|p| p[0] > p[1]), || format!("order not preserved: {v:?}"))?;
    ensure(v[0] == 1.0 && v[v.len() - 1] == 0.0, || format!("anchors {} and {}", v[0], v[v.len() - 1]))?;
    Ok(format!("printed scale feasible at unit {unit:.4}; derived {v:.4?}"))
}

/// Every assignment within budget, scored from the strategy parameters.
fn oracle(inst: &AdaptationInstance) -> f64 {
    let mut best = 0.0f64;
    let mut pick = vec![0usize; inst.mismatches.len()];
    'outer: loop {
        let (mut cost, mut value) = (0.0, 0.0);
        for (m, &p) in inst.mismatches.iter().zip(&pick) {
            if p > 0 {
                let s = &m.strategies[p - 1];
                cost += s.cost;
                value += m.weight * (s.satisfaction - m.satisfaction) * (1.0 - s.risk);
            }
        }
        if cost <= inst.budget {
            best = best.max(value);
        }
        for i in 0..pick.len() {
            pick[i] += 1;
            if pick[i] <= inst.mismatches[i].strategies.len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        return best;
    }
}

fn criterion_4() -> Outcome {
    let mut slowest = Duration::ZERO;
    for seed in 0..100u64 {
        let mut rng = common::rng(4000 + seed);
        let n = rand::Rng::random_range(&mut rng, 1..=12);
        let inst = common::adaptation_instance(&mut rng, n, 3);
        let start = Instant::now();
        let plan = optimize_adaptation(&inst).map_err(|e| format!("seed {seed}: {e}"))?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure(elapsed < Duration::from_secs(1), || format!("seed {seed} took {elapsed:?}"))?;
        let best = oracle(&inst);
        ensure(plan.objective == best, || format!("seed {seed}: objective {} vs oracle {best}", plan.objective))?;
        ensure(plan.chosen.len() == inst.mismatches.len(), || format!("seed {seed}: one choice per mismatch"))?;
        let cost: f64 = plan
            .chosen
            .iter()
            .zip(&inst.mismatches)
            .filter_map(|(c, m)| c.strategy.map(|k| m.strategies[k].cost))
            .sum();
        ensure(cost <= inst.budget, || format!("seed {seed}: cost {cost} over budget {}", inst.budget))?;
        let recomputed = objective_value(&inst, &plan.assignment()).map_err(|e| e.to_string())?;
        ensure(recomputed == plan.objective, || format!("seed {seed}: reported objective differs from its plan"))?;
    }
    Ok(format!("100 instances match the oracle; slowest {slowest:?}"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn criterion_5() -> Outcome {
    for seed in 0..20u64 {
        let mut rng = common::rng(5000 + seed);
        let n = rand::Rng::random_range(&mut rng, 0..=8);
        let inst = common::adaptation_instance(&mut rng, n, 3);
        let reqs = RequirementSet::new(
            inst.mismatches.iter().map(|m| Requirement::new(m.requirement.as_str(), "", m.weight)).collect(),
        );
        let row: BTreeMap<RequirementId, f64> =
            inst.mismatches.iter().map(|m| (m.requirement.clone(), m.satisfaction)).collect();
        let plan = |pick: Option<usize>| AdaptationPlan {
            chosen: inst.mismatches.iter().map(|m| PlanChoice { requirement: m.requirement.clone(), strategy: pick }).collect(),
            objective: 0.0,
            total_cost: 0.0,
        };
        let q = performance_profile(&reqs, &row, &inst, &plan(None)).map_err(|e| e.to_string())?;
        let plain: f64 = inst.mismatches.iter().map(|m| m.weight * m.satisfaction).sum();
        ensure(
            close(q.functional_coverage, plain) && q.adaptation_risk == 0.0 && q.adaptation_cost == 0.0 && q.adaptation_degree == 0.0,
            || format!("seed {seed}: empty plan gave {q:?}"),
        )?;
        if n > 0 {
            let rho = rand::Rng::random_range(&mut rng, 0.0..=1.0);
            let mut constant = inst.clone();
            constant.mismatches.iter_mut().flat_map(|m| m.strategies.iter_mut()).for_each(|s| s.risk = rho);
            let q = performance_profile(&reqs, &row, &constant, &plan(Some(0))).map_err(|e| e.to_string())?;
            ensure(close(q.adaptation_risk, rho), || format!("seed {seed}: risk {} vs {rho}", q.adaptation_risk))?;
        }
    }
    let inst = AdaptationInstance {
        candidate: "X".into(),
        budget: 10.0,
        mismatches: vec![Mismatch {
            requirement: "R2".into(),
            weight: 0.4,
            satisfaction: 0.5,
            strategies: vec![AdaptationStrategy::new(TailoringType::ErpProgramming, 0.9, 0.2, 10.0)],
        }],
    };
    let reqs = RequirementSet::new(vec![Requirement::new("R1", "", 0.6), Requirement::new("R2", "", 0.4)]);
    let row = BTreeMap::from([("R1".into(), 1.0), ("R2".into(), 0.5)]);
    let plan = optimize_adaptation(&inst).map_err(|e| e.to_string())?;
    let q = performance_profile(&reqs, &row, &inst, &plan).map_err(|e| e.to_string())?;
    let got = (q.functional_coverage, q.adaptation_risk, q.adaptation_cost, q.adaptation_degree);
    ensure(close(got.0, 0.96) && close(got.1, 0.2) && close(got.2, 10.0) && close(got.3, 0.16), || {
        format!("two-requirement example gave {got:?}")
    })?;
    Ok(format!("empty, constant-risk and two-requirement identities hold; example {got:?}"))
}

fn witness_restores(m: &JudgmentMatrix, label: &str) -> Result<usize, String> {
    let report = check_consistency(m).map_err(|e| e.to_string())?;
    ensure(!report.consistent, || format!("{label}: reported consistent"))?;
    let witness = locate_conflicts(m).map_err(|e| format!("{label}: {e}"))?;
    let repaired = check_consistency(&m.without(&witness)).map_err(|e| e.to_string())?;
    ensure(repaired.consistent, || format!("{label}: still inconsistent without {} judgments", witness.len()))?;
    Ok(witness.len())
}

fn criterion_6() -> Outcome {
    let forced = JudgmentMatrix::new(MatrixContext::Weighting, vec!["x".into(), "y".into(), "z".into()])
        .judge("x", "y", Judgment::Category(2))
        .judge("y", "z", Judgment::Category(3))
        .judge("x", "z", Judgment::Category(0));
    let w = witness_restores(&forced, "forced contradiction")?;
    let mut largest = w;
    for seed in 0..50u64 {
        let mut rng = common::rng(6000 + seed);
        let n = rand::Rng::random_range(&mut rng, 3..=8);
        let m = common::inconsistent_matrix(&mut rng, n);
        largest = largest.max(witness_restores(&m, &format!("seed {seed}"))?);
    }
    Ok(format!("forced contradiction and 50 seeded matrices repaired; largest witness {largest}"))
}

fn cli_bytes(path: &Path, args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut all = vec!["erpsel".to_owned(), "--project".into(), path.display().to_string()];
    all.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(all, &mut out, &mut err);
    (code, out, err)
}

fn criterion_7() -> Outcome {
    for seed in 0..20u64 {
        let p = common::random_project(7000 + seed);
        let first = save(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = load(&first).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == p, || format!("seed {seed}: loaded project differs"))?;
        let second = save(&back).map_err(|e| e.to_string())?;
        ensure(first == second, || format!("seed {seed}: canonical bytes differ"))?;
    }
    let commands: &[&[&str]] = &[
        &["validate"],
        &["screen"],
        &["gap"],
        &["optimize", "--candidate", "SAP"],
        &["optimize", "--candidate", "ORACLE", "--budget", "2"],
        &["consistency", "--matrix", "TP"],
        &["scale", "--matrix", "TCO"],
        &["weights"],
        &["rank"],
        &["rank", "--budget", "4"],
        &["whatif", "--budget", "0"],
        &["report", "--format", "md"],
        &["report", "--format", "csv"],
        &["stage"],
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for (name, extra) in [("judged", &[][..]), ("measured", &["--measured"][..])] {
        let path = dir.path().join(format!("{name}.json"));
        let mut new = vec!["new", "--demo"];
        new.extend_from_slice(extra);
        ensure(cli_bytes(&path, &new).0 == cli::EXIT_OK, || format!("{name}: new failed"))?;
        for json in [false, true] {
            for cmd in commands {
                let mut args = cmd.to_vec();
                if json {
                    args.insert(0, "--json");
                }
                let a = cli_bytes(&path, &args);
                let file = std::fs::read(&path).map_err(|e| e.to_string())?;
                let b = cli_bytes(&path, &args);
                ensure(a.0 == cli::EXIT_OK, || format!("{name} {args:?}: exit {}", a.0))?;
                ensure(a == b, || format!("{name} {args:?}: rerun output differs"))?;
                ensure(std::fs::read(&path).map_err(|e| e.to_string())? == file, || {
                    format!("{name} {args:?}: rerun changed the file")
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("20 projects round-trip byte-identically; {runs} CLI invocations rerun identically"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("aggregate and rank reproduce the printed scores", criterion_1),
        ("printed weights feasible, derived weights normalized and ordered", criterion_2),
        ("printed security scale feasible, derived scale ordered and anchored", criterion_3),
        ("adaptation optimizer matches exhaustive search", criterion_4),
        ("performance profile identities", criterion_5),
        ("inconsistency detection and conflict witnesses", criterion_6),
        ("canonical round-trip and CLI determinism", criterion_7),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {title}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
