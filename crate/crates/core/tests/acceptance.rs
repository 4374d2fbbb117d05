//! Acceptance criteria A1-A8. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.
//!
//! Run with `cargo test -p confounder-lab --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use common::{close, Oracle};
use confounder_lab::effects::{
    cond_mean_y_a, cond_mean_y_ad, e_a_given_d, p_d, p_d_given_a, posterior_c,
};
use confounder_lab::estimate::{self, data_report, transport, Verdict};
use confounder_lab::mc::{self, figure_stats};
use confounder_lab::model::{derive_seed, rng_from_seed, sample_driver, sample_proxy};
use confounder_lab::monotonicity::{bounds_verdict, in_between, report, Bound};
use confounder_lab::suites::{run_suite, Suite};
use confounder_lab::{
    summarize, BinaryConditional, CausalParams, DriverParams, OutcomeMeans, Params, ProxyParams,
};
use rand::Rng;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn in_range(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn a1_a8() -> (Outcome, Outcome) {
    let start = Instant::now();
    let (summary, records) = mc::run_experiment(10_000, SEED);
    let mut csv = Vec::new();
    mc::write_csv(&records, &mut csv).expect("csv");
    let elapsed = start.elapsed();

    let n = summary.n_runs as f64;
    let monotone = summary.n_monotone_in_d() as f64 / n;
    let off_block = summary.off_block();
    let between = summary.n_in_between() as f64 / n;
    let neither = summary.n_in_between_by_row[2] as f64 / summary.n_neither_rows() as f64;
    let a1 = outcome(
        in_range(monotone, 0.469, 0.509)
            && off_block == 0
            && in_range(between, 0.920, 0.950)
            && in_range(neither, 0.853, 0.893)
            && elapsed < Duration::from_secs(5),
        format!(
            "monotone={monotone:.4} off_block={off_block} in_between={between:.4} \
             in_between_neither={neither:.4} runtime={:.2}s",
            secs(elapsed)
        ),
    );

    let a8 = match figure_stats(&records) {
        Ok(f) => outcome(
            f.median_rel_pos > 0.5 && f.youden_rank_correlation < 0.0,
            format!(
                "median_rel_pos={:.4} spearman(|youden|,rel_pos)={:.4} n={}",
                f.median_rel_pos, f.youden_rank_correlation, f.n_records
            ),
        ),
        Err(e) => outcome(false, format!("no qualifying records: {e}")),
    };
    (a1, a8)
}

fn a2() -> Outcome {
    let n = 100_000u64;
    let start = Instant::now();
    let (mut d_not_c, mut c_not_d, mut between_bad, mut oracle_disagree) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        let params = Params::Proxy(sample_proxy(derive_seed(SEED, i)));
        let r = report(&params);
        let (in_d, in_c) = (r.y_in_d.is_monotone(), r.y_in_c.is_monotone());
        d_not_c += (in_d && !in_c) as u64;
        c_not_d += (in_c && !in_d) as u64;
        if in_d && !in_between(&summarize(&params), 1e-12) {
            between_bad += 1;
        }
        let o = Oracle::of(&params);
        if o.min_abs_y_gap_in_d() > 1e-9 && o.y_monotone_in_d() != in_d {
            oracle_disagree += 1;
        }
        if o.y_monotone_in_c() != in_c {
            oracle_disagree += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        d_not_c == 0
            && c_not_d == 0
            && between_bad == 0
            && oracle_disagree == 0
            && elapsed < Duration::from_secs(30),
        format!(
            "draws={n} monotone_d_not_c={d_not_c} monotone_c_not_d={c_not_d} \
             in_between_violations={between_bad} oracle_disagreements={oracle_disagree} runtime={:.2}s",
            secs(elapsed)
        ),
    )
}

fn a3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for suite in [
        Suite::Chain,
        Suite::ReversedChain,
        Suite::Dominance,
        Suite::ReversedDominance,
    ] {
        let r = run_suite(suite, 10_000, SEED);
        pass &= r.passed() && r.applicable == 10_000;
        parts.push(format!("{suite}={}", r.violations));
    }
    let frac = run_suite(Suite::Dominance, 100_000, SEED)
        .crude_ge_obs_fraction
        .unwrap_or(f64::NAN);
    pass &= (frac - 0.90).abs() <= 0.03;
    outcome(
        pass,
        format!("violations {} crude>=obs={frac:.4}", parts.join(" ")),
    )
}

fn a4() -> Outcome {
    let r = run_suite(Suite::Driver, 10_000, SEED);
    let mut max_diff = 0.0f64;
    for i in 0..10_000 {
        let driver = sample_driver(derive_seed(SEED, i));
        let x = summarize(&Params::Driver(driver));
        let y = summarize(&Params::Proxy(driver.to_proxy()));
        for (u, v) in [
            (x.rd_true, y.rd_true),
            (x.rd_obs, y.rd_obs),
            (x.rd_crude, y.rd_crude),
            (x.e_y_do.treated, y.e_y_do.treated),
            (x.e_y_do.untreated, y.e_y_do.untreated),
            (x.s.treated, y.s.treated),
            (x.s.untreated, y.s.untreated),
        ] {
            max_diff = max_diff.max((u - v).abs());
        }
    }
    outcome(
        r.passed() && max_diff <= 1e-12,
        format!(
            "draws=10000 violations={} max_summary_diff={max_diff:.2e}",
            r.violations
        ),
    )
}

fn a5() -> Outcome {
    let r = run_suite(Suite::Bounds, 10_000, SEED);
    let mut oracle_bad = 0u64;
    for i in 0..10_000u64 {
        let seed = derive_seed(SEED ^ 0xb0, i);
        let params = if i % 2 == 0 {
            Params::Proxy(sample_proxy(seed))
        } else {
            Params::Driver(sample_driver(seed))
        };
        let v = bounds_verdict(&params);
        let o = Oracle::of(&params);
        for (bound, a) in [(v.treated, 1), (v.untreated, 0)] {
            let gap = o.s(a) - o.e_y_do(a);
            let ok = match bound {
                Bound::Upper => gap >= -1e-12,
                Bound::Lower => gap <= 1e-12,
            };
            oracle_bad += (!ok) as u64;
        }
    }
    outcome(
        r.passed() && oracle_bad == 0,
        format!(
            "draws=10000 suite_violations={} oracle_violations={oracle_bad}",
            r.violations
        ),
    )
}

fn oracle_mismatch<P: CausalParams>(p: &P, params: &Params) -> f64 {
    let o = Oracle::of(params);
    let s = summarize(params);
    let mut worst = 0.0f64;
    let mut check = |x: f64, y: f64| worst = worst.max((x - y).abs());
    for a in [false, true] {
        let ai = a as usize;
        for d in [false, true] {
            let di = d as usize;
            check(posterior_c(p, a, d), o.posterior_c(ai, di));
            check(cond_mean_y_ad(p, a, d), o.e_y_ad(ai, di));
        }
        check(cond_mean_y_a(p, a), o.e_y_a(ai));
        check(p_d_given_a(p, a), o.p_d_given_a(ai));
        check(e_a_given_d(p, a), o.e_a_d(ai));
        check(s.s.at(a), o.s(ai));
        check(s.e_y_do.at(a), o.e_y_do(ai));
    }
    check(p_d(p), o.p_d());
    check(s.rd_true, o.rd_true());
    check(s.rd_obs, o.rd_obs());
    check(s.rd_crude, o.rd_crude());
    worst
}

fn a6() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..1_000u64 {
        let proxy = sample_proxy(derive_seed(SEED ^ 0xa6, i));
        worst = worst.max(oracle_mismatch(&proxy, &Params::Proxy(proxy)));
        let driver = sample_driver(derive_seed(SEED ^ 0xa6, i));
        worst = worst.max(oracle_mismatch(&driver, &Params::Driver(driver)));
    }
    outcome(
        worst <= 1e-12,
        format!("draws=1000 per graph max_abs_diff={worst:.2e}"),
    )
}

/// Delta-method standard errors of the plug-in `rd_obs` and `rd_crude`
/// under Bernoulli outcomes.
fn standard_errors(o: &Oracle, n: f64) -> (f64, f64) {
    let bern_var = |m: f64| m * (1.0 - m);
    let pd = o.p_d();
    let mut var_obs = 0.0;
    for d in 0..2 {
        let w = if d == 1 { pd } else { 1.0 - pd };
        for a in 0..2 {
            let n_ad = n * o.prob(Some(a), None, Some(d));
            var_obs += w * w * bern_var(o.e_y_ad(a, d)) / n_ad;
        }
    }
    let delta = |d: usize| o.e_y_ad(1, d) - o.e_y_ad(0, d);
    var_obs += (delta(1) - delta(0)).powi(2) * pd * (1.0 - pd) / n;
    let var_crude: f64 = (0..2)
        .map(|a| bern_var(o.e_y_a(a)) / (n * o.prob(Some(a), None, None)))
        .sum();
    (var_obs.sqrt(), var_crude.sqrt())
}

fn a7_consistency() -> (u32, String) {
    let n = 1_000_000u64;
    let mut within = 0;
    let mut zs = Vec::new();
    for k in 0..10u64 {
        let seed = derive_seed(SEED ^ 0xa7, k);
        let params = if k % 2 == 0 {
            Params::Proxy(sample_proxy(seed))
        } else {
            Params::Driver(sample_driver(seed))
        };
        let est = estimate::ingest(estimate::generate(&params, n, seed).expect("valid"))
            .and_then(|ds| ds.estimate())
            .expect("all strata populated");
        let rds = data_report(&est).rds;
        let o = Oracle::of(&params);
        let (se_obs, se_crude) = standard_errors(&o, n as f64);
        let z_obs = (rds.rd_obs - o.rd_obs()) / se_obs;
        let z_crude = (rds.rd_crude - o.rd_crude()) / se_crude;
        if z_obs.abs() <= 3.0 && z_crude.abs() <= 3.0 {
            within += 1;
        }
        zs.push(format!("{:.1}/{:.1}", z_obs, z_crude));
    }
    (within, zs.join(","))
}

fn uniform_pair<R: Rng>(rng: &mut R, min_gap: f64) -> BinaryConditional {
    loop {
        let (x, y) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        if f64::abs(x - y) >= min_gap {
            return BinaryConditional {
                given: x,
                given_not: y,
            };
        }
    }
}

fn outcome_means<R: Rng>(rng: &mut R, min_gap: f64) -> OutcomeMeans {
    let row = |rng: &mut R| {
        let p = uniform_pair(rng, min_gap);
        [p.given_not, p.given]
    };
    OutcomeMeans([row(rng), row(rng)])
}

/// Target, outcome-source and treatment-source populations share `p(C|D)`;
/// the first source also shares the outcome means, the second the
/// treatment policy.
fn a7_transport() -> (u32, u32, u32) {
    let n = 200_000u64;
    let (mut conclusive, mut matched, mut scenarios) = (0, 0, 0);
    let mut rng = rng_from_seed(derive_seed(SEED, 0x7a));
    for k in 0..10u64 {
        let p_c_given_d = uniform_pair(&mut rng, 0.3);
        let target = DriverParams {
            p_d: rng.gen_range(0.2..0.8),
            p_c_given_d,
            p_a_given_c: uniform_pair(&mut rng, 0.3),
            mu: outcome_means(&mut rng, 0.2),
        };
        let pop1 = DriverParams {
            p_d: rng.gen_range(0.2..0.8),
            p_a_given_c: uniform_pair(&mut rng, 0.3),
            ..target
        };
        let pop2 = DriverParams {
            p_d: rng.gen_range(0.2..0.8),
            mu: outcome_means(&mut rng, 0.2),
            ..target
        };
        let load = |p: DriverParams, s: u64| {
            estimate::ingest(estimate::generate(&Params::Driver(p), n, s).expect("valid"))
                .and_then(|ds| ds.estimate())
                .expect("all strata populated")
        };
        let t = transport(&load(pop1, 2 * k), &load(pop2, 2 * k + 1));
        let o = Oracle::driver(&target);
        scenarios += 1;
        if t.verdict != Verdict::Inconclusive {
            conclusive += 1;
            matched += t.verdict.consistent_with(o.rd_obs(), o.rd_true(), 0.0) as u32;
        }
    }
    (scenarios, conclusive, matched)
}

fn a7() -> Outcome {
    let (within, zs) = a7_consistency();
    let (scenarios, conclusive, matched) = a7_transport();
    outcome(
        within >= 9 && conclusive == matched,
        format!(
            "within_3se={within}/10 z(obs/crude)=[{zs}] transport conclusive={conclusive}/{scenarios} \
             matched={matched}"
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let (a1, a8) = a1_a8();
    let results = [
        ("A1", a1),
        ("A2", a2()),
        ("A3", a3()),
        ("A4", a4()),
        ("A5", a5()),
        ("A6", a6()),
        ("A7", a7()),
        ("A8", a8),
    ];
    let mut failed = Vec::new();
    for (id, o) in &results {
        println!("{id} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn oracle_sanity() {
    let p = ProxyParams {
        p_c: 0.5,
        p_d_given_c: BinaryConditional {
            given: 0.9,
            given_not: 0.1,
        },
        p_a_given_c: BinaryConditional {
            given: 0.6,
            given_not: 0.3,
        },
        mu: OutcomeMeans([[0.2, 0.4], [0.5, 0.8]]),
    };
    let o = Oracle::proxy(&p);
    assert!(close(o.total(), 1.0, 1e-15));
    assert!(close(o.cell(1, 1, 1), 0.5 * 0.9 * 0.6, 1e-15));
    assert!(close(o.rd_true(), 0.5 * (0.3 + 0.4), 1e-15));
    assert!(close(o.p_c(), 0.5, 1e-15));
}
