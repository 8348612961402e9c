//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thue::datagen::{generate, small_random_instance, GenParams};
use thue::fixtures::running_example;
use thue::miner::{
    combine_witnesses, mine_fixed_threshold, mine_topk, riu_list, rtu_list, rus, ExpansionOrder,
    HueResult, InitSoundness, MinUtil, MiningConfig, Offer, TopKBuffer, Variant,
};
use thue::occurrence::{
    episode_utility, ewu_opt_total, ewu_total, minimal_occurrences, Mtd, MtdSemantics,
};
use thue::oracle::{check_bound_soundness, enumerate_all};
use thue::{ComplexEventSequence, Episode, RuMode, Utility};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ep(ces: &ComplexEventSequence, text: &str) -> Episode {
    Episode::parse(text, ces.catalog()).expect("fixture episode")
}

fn named(ces: &ComplexEventSequence, r: &HueResult) -> Vec<(String, Utility, usize)> {
    r.episodes
        .iter()
        .map(|e| {
            (
                e.episode.display(ces.catalog()).to_string(),
                e.utility,
                e.mo_count(),
            )
        })
        .collect()
}

fn trace_ok(r: &HueResult) -> bool {
    r.stats
        .threshold_trace
        .windows(2)
        .all(|w| w[0].min_util <= w[1].min_util)
        && r.stats
            .threshold_trace
            .iter()
            .all(|t| t.min_util >= r.stats.initial_min_util)
        && r.stats.initial_min_util <= r.stats.final_min_util
}

/// Traces collected from criteria 2, 4 and 6 for criterion 7.
#[derive(Default)]
struct Traces {
    checked: usize,
    bad: Vec<String>,
}

impl Traces {
    fn record(&mut self, label: impl FnOnce() -> String, r: &HueResult) {
        self.checked += 1;
        if !trace_ok(r) {
            self.bad.push(label());
        }
    }
}

fn c1a() -> Outcome {
    let ces = running_example();
    ensure(ces.total_utility() == 21, || {
        format!("TU = {}", ces.total_utility())
    })?;
    ensure(ces.timestamp_utilities() == [2, 4, 6, 7, 2], || {
        format!("tu = {:?}", ces.timestamp_utilities())
    })?;
    Ok("TU 21, tu {2,4,6,7,2}".into())
}

fn c1b() -> Outcome {
    let ces = running_example();
    let expected = [
        ("(A)", vec![(1, 1), (4, 4)], 6),
        ("(B)", vec![(2, 2), (3, 3)], 5),
        ("(C)", vec![(3, 3), (4, 4)], 6),
        ("(D)", vec![(2, 2), (5, 5)], 4),
    ];
    for mtd in [Mtd::inclusive(2), Mtd::exclusive(2)] {
        for (text, mos, u) in &expected {
            let alpha = ep(&ces, text);
            let got = minimal_occurrences(&alpha, &ces, mtd).intervals();
            ensure(&got == mos, || format!("{text}: mo set {got:?}"))?;
            let gu = episode_utility(&alpha, &ces, mtd);
            ensure(gu == *u, || format!("{text}: utility {gu}"))?;
        }
    }
    Ok("1-episode mo sets and utilities exact".into())
}

fn c1c() -> Outcome {
    let ces = running_example();
    let mtd = Mtd::inclusive(2);
    let names = ["(A)", "(B)", "(C)", "(D)"];
    let eps: Vec<_> = names.iter().map(|n| ep(&ces, n)).collect();
    let orig: Vec<_> = eps.iter().map(|e| ewu_total(e, &ces, mtd)).collect();
    let compat: Vec<_> = eps
        .iter()
        .map(|e| ewu_opt_total(e, &ces, mtd, RuMode::Compat))
        .collect();
    let strict: Vec<_> = eps
        .iter()
        .map(|e| ewu_opt_total(e, &ces, mtd, RuMode::Strict))
        .collect();
    ensure(orig == [27, 37, 30, 23], || format!("EWU {orig:?}"))?;
    ensure(compat == [21, 32, 24, 19], || {
        format!("EWU_opt compat {compat:?}")
    })?;
    ensure(strict == [21, 32, 17, 17], || {
        format!("EWU_opt strict {strict:?}")
    })?;
    Ok(format!(
        "EWU {orig:?}, compat {compat:?}, strict {strict:?}"
    ))
}

fn c1d() -> Outcome {
    let ces = running_example();
    let riu: Vec<_> = riu_list(&ces).iter().map(|w| w.utility).collect();
    ensure(riu == [6, 5, 6, 4], || format!("RIU {riu:?}"))?;
    let lists = [riu_list(&ces), rtu_list(&ces, InitSoundness::Unchecked)];
    let floor = rus(
        &combine_witnesses(&lists, InitSoundness::Unchecked),
        4,
        InitSoundness::Unchecked,
    );
    ensure(floor == 6, || format!("initial floor {floor}"))?;
    Ok("RIU {6,5,6,4}, k=4 floor 6".into())
}

fn c1e() -> Outcome {
    let ces = running_example();
    let mut buf = TopKBuffer::new(2, 0);
    buf.offer(ep(&ces, "(B)"), 5, 2);
    buf.offer(ep(&ces, "(D)"), 4, 2);
    let raised = buf.offer(ep(&ces, "(A)"), 6, 2);
    let got: Vec<_> = buf
        .entries()
        .map(|(e, u, _)| (e.display(ces.catalog()).to_string(), u))
        .collect();
    ensure(
        got == [("(A)".to_string(), 6), ("(B)".to_string(), 5)],
        || format!("buffer {got:?}"),
    )?;
    ensure(raised == Offer::Raised(5) && buf.floor() == 5, || {
        format!("floor {}", buf.floor())
    })?;
    Ok("{A:6, B:5}, floor 5".into())
}

fn c2(traces: &mut Traces) -> Outcome {
    let ces = running_example();
    let r = mine_topk(&ces, &MiningConfig::new(2, Mtd::exclusive(2))).map_err(|e| e.to_string())?;
    traces.record(|| "k=2".into(), &r);
    ensure(r.utilities() == [13, 11], || {
        format!("k=2 utilities {:?}", r.utilities())
    })?;
    let oracle = enumerate_all(&ces, Mtd::exclusive(2)).map_err(|e| e.to_string())?;
    let want: Vec<_> = oracle.top_k(2).iter().map(|e| e.episode.clone()).collect();
    let got: Vec<_> = r.episodes.iter().map(|e| e.episode.clone()).collect();
    ensure(got == want, || "k=2 identities differ from oracle".into())?;

    let mtd = Mtd::exclusive(3);
    let r = mine_topk(&ces, &MiningConfig::new(4, mtd)).map_err(|e| e.to_string())?;
    traces.record(|| "k=4".into(), &r);
    ensure(r.utilities() == [17, 15, 15, 15], || {
        format!("k=4 utilities {:?}", r.utilities())
    })?;
    ensure(r.stats.final_min_util == 15, || {
        format!("k=4 floor {}", r.stats.final_min_util)
    })?;
    let oracle = enumerate_all(&ces, mtd).map_err(|e| e.to_string())?;
    let want: Vec<_> = oracle.top_k(4).iter().map(|e| e.episode.clone()).collect();
    let got: Vec<_> = r.episodes.iter().map(|e| e.episode.clone()).collect();
    ensure(got == want, || "k=4 identities differ from oracle".into())?;
    // The worked example lists <(D)->(B C)> in the top four; its utility is 8 and the
    // oracle's fourth entry is <(D)->(B C)->(A C)>.
    let d_bc = oracle.utility_of(&ep(&ces, "(D)->(B C)"));
    ensure(d_bc == Some(8), || format!("(D)->(B C) utility {d_bc:?}"))?;
    let shown: Vec<_> = named(&ces, &r)
        .into_iter()
        .map(|(e, u, _)| format!("{e}:{u}"))
        .collect();
    Ok(format!("k=2 {{13,11}}; k=4 {}; floor 15", shown.join(" ")))
}

fn c3() -> Outcome {
    let ces = running_example();
    let cfg = MiningConfig::fixed(
        MinUtil::Ratio("0.45".parse().map_err(|e| format!("{e}"))?),
        Mtd::exclusive(2),
    );
    let r = mine_fixed_threshold(&ces, &cfg).map_err(|e| e.to_string())?;
    let mut got = named(&ces, &r);
    got.sort();
    let mut want: Vec<_> = [
        ("(B C)->(A C)", 13, 1),
        ("(B)->(C)", 11, 2),
        ("(B)->(A C)", 10, 1),
        ("(B C)->(A)", 10, 1),
        ("(C)->(A C)", 10, 1),
        ("(B D)->(B C)", 10, 1),
        ("(A)->(D)", 10, 2),
    ]
    .iter()
    .map(|&(e, u, n)| (e.to_string(), u, n))
    .collect();
    want.sort();
    ensure(got == want, || format!("got {got:?}"))?;
    ensure(!got.iter().any(|(e, _, _)| e == "(A)->(C)"), || {
        "(A)->(C) returned".into()
    })?;
    Ok("7 episodes, (A)->(D):10 present, (A)->(C) absent".into())
}

fn c4(traces: &mut Traces) -> Outcome {
    let started = Instant::now();
    let mut configs = Vec::new();
    for d in 1..=3u64 {
        for sem in [MtdSemantics::Inclusive, MtdSemantics::Exclusive] {
            for mode in [RuMode::Strict, RuMode::Compat] {
                configs.push((
                    Mtd {
                        duration: d,
                        semantics: sem,
                    },
                    mode,
                ));
            }
        }
    }
    let results: Vec<(u64, Vec<String>, Vec<HueResult>)> = (1..=200u64)
        .into_par_iter()
        .map(|seed| {
            let ces = small_random_instance(seed);
            let mut failures = Vec::new();
            let mut runs = Vec::new();
            for &(mtd, mode) in &configs {
                let oracle = match enumerate_all(&ces, mtd) {
                    Ok(o) => o,
                    Err(e) => {
                        failures.push(format!("seed {seed}: {e}"));
                        continue;
                    }
                };
                for k in [1, 3, 5, 10] {
                    let mut cfg = MiningConfig::new(k, mtd);
                    cfg.ru_mode = mode;
                    match mine_topk(&ces, &cfg) {
                        Ok(r) => {
                            let want: Vec<_> = oracle.top_k(k).iter().map(|e| e.utility).collect();
                            if r.utilities() != want {
                                failures.push(format!(
                                    "seed {seed} {mtd:?} {mode:?} k={k}: {:?} vs {want:?}",
                                    r.utilities()
                                ));
                            }
                            runs.push(r);
                        }
                        Err(e) => failures.push(format!("seed {seed}: {e}")),
                    }
                }
            }
            (seed, failures, runs)
        })
        .collect();
    let elapsed = started.elapsed();
    let mut failures = Vec::new();
    let mut total = 0;
    for (seed, f, runs) in &results {
        failures.extend(f.iter().cloned());
        for (i, r) in runs.iter().enumerate() {
            total += 1;
            traces.record(|| format!("seed {seed} run {i}"), r);
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{total} runs agree with the oracle in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn c5() -> Outcome {
    let mut instances = vec![running_example()];
    instances.extend((1..=200).map(small_random_instance));
    let mut checks = 0;
    for (i, ces) in instances.iter().enumerate() {
        for d in 1..=3u64 {
            for sem in [MtdSemantics::Inclusive, MtdSemantics::Exclusive] {
                for mode in [RuMode::Strict, RuMode::Compat] {
                    let mtd = Mtd {
                        duration: d,
                        semantics: sem,
                    };
                    let v = check_bound_soundness(ces, mtd, mode).map_err(|e| e.to_string())?;
                    checks += 1;
                    ensure(v.is_empty(), || {
                        format!("instance {i} {mtd:?} {mode:?}: {} violations", v.len())
                    })?;
                }
            }
        }
    }
    Ok(format!("{checks} instance/config checks, zero violations"))
}

fn c6(traces: &mut Traces) -> Outcome {
    let mtd = Mtd::inclusive(2);
    let variants = [Variant::Thue, Variant::ThueEwu, Variant::ThueRus];
    type Row = (u64, usize, BTreeMap<Variant, HueResult>);
    let rows: Vec<Result<Row, String>> = (1..=20u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let ces = generate(&GenParams {
                seed,
                timestamps: 1000,
                event_types: 50,
                ..Default::default()
            })
            .expect("valid params");
            [5usize, 10, 20]
                .into_iter()
                .map(|k| {
                    let mut out = BTreeMap::new();
                    for v in variants {
                        let r = mine_topk(&ces, &MiningConfig::variant(v, k, mtd))
                            .map_err(|e| e.to_string())?;
                        out.insert(v, r);
                    }
                    Ok((seed, k, out))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut failures = Vec::new();
    let mut ratio_sum = [0.0f64; 2];
    let n = rows.len() as f64;
    for row in rows {
        let (seed, k, out) = row?;
        let full = &out[&Variant::Thue];
        for (v, r) in &out {
            traces.record(|| format!("seed {seed} k={k} {v}"), r);
            if r.utilities() != full.utilities() {
                failures.push(format!("seed {seed} k={k}: {v} utilities differ"));
            }
        }
        let c = |v: Variant| out[&v].stats.candidates_generated;
        for (i, v) in [Variant::ThueEwu, Variant::ThueRus].into_iter().enumerate() {
            ratio_sum[i] += c(Variant::Thue) as f64 / c(v) as f64;
            if c(Variant::Thue) > c(v) {
                failures.push(format!(
                    "seed {seed} k={k}: full {} > {v} {}",
                    c(Variant::Thue),
                    c(v)
                ));
            }
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} failures, first: {}", failures.len(), failures[0])
    })?;
    Ok(format!(
        "60 rows; mean candidates full/no-riu {:.3}, full/original-bound {:.3}",
        ratio_sum[0] / n,
        ratio_sum[1] / n
    ))
}

fn c7(traces: &Traces) -> Outcome {
    ensure(traces.checked > 0, || "no traces recorded".into())?;
    ensure(traces.bad.is_empty(), || {
        format!("{} bad traces, first: {}", traces.bad.len(), traces.bad[0])
    })?;
    Ok(format!(
        "{} traces non-decreasing with initial <= final",
        traces.checked
    ))
}

fn c8() -> Outcome {
    let ces = generate(&GenParams {
        seed: 2024,
        timestamps: 10_000,
        event_types: 50,
        min_set_size: 1,
        max_set_size: 9,
        ..Default::default()
    })
    .expect("valid params");
    let mtd = Mtd::inclusive(2);
    let started = Instant::now();
    let mut cfg = MiningConfig::new(10, mtd);
    let simult = mine_topk(&ces, &cfg).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    cfg.order = ExpansionOrder::SerialFirst;
    let serial = mine_topk(&ces, &cfg).map_err(|e| e.to_string())?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    ensure(simult.utilities() == serial.utilities(), || {
        format!(
            "orders differ: {:?} vs {:?}",
            simult.utilities(),
            serial.utilities()
        )
    })?;
    let avg = ces.sets().iter().map(|s| s.items().len()).sum::<usize>() as f64 / ces.len() as f64;
    Ok(format!(
        "10000 timestamps, avg set size {avg:.2}, {:.1}s, {} candidates, orders agree",
        elapsed.as_secs_f64(),
        simult.stats.candidates_generated
    ))
}

fn main() -> ExitCode {
    let mut traces = Traces::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1a", c1a()),
        ("1b", c1b()),
        ("1c", c1c()),
        ("1d", c1d()),
        ("1e", c1e()),
    ];
    results.push(("2", c2(&mut traces)));
    results.push(("3", c3()));
    results.push(("4", c4(&mut traces)));
    results.push(("5", c5()));
    results.push(("6", c6(&mut traces)));
    results.push(("7", c7(&traces)));
    results.push(("8", c8()));
    let mut failed = 0;
    for (id, outcome) in &results {
        match outcome {
            Ok(msg) => println!("criterion {id}: PASS {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id}: FAIL {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
