//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use meanpay_core::exact::to_f64;
use meanpay_core::mec::{bounded_quotient, mec_quotient, weighted_quotient};
use meanpay_core::ondemand::on_demand_vi_observed;
use meanpay_core::oracle::{brute_force_mecs, exact_gain, exact_reach, DEFAULT_STRATEGY_LIMIT};
use meanpay_core::random::{random_mdp, random_model_pair, RandomModelSpec};
use meanpay_core::report::{solve, ModelSource, SolveOptions};
use meanpay_core::text::parse_document;
use meanpay_core::{
    compute_mecs, fixtures, generate, local_vi, on_demand_vi, run_vi, span, vi_step, Algorithm, BigRational,
    Criterion, GeneratorSpec, Heuristic, LocalViOptions, Mdp, OdvOptions, StopRule, ViOptions, ViState,
};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(limit: Duration, what: &str, f: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(out)
}

fn random_pairs(count: usize, seed: u64, spec: &RandomModelSpec) -> Vec<(Mdp, Mdp<BigRational>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_model_pair(&mut rng, spec)).collect()
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn fixture_correctness() -> Outcome {
    let m = fixtures::three_mec();
    let second = Duration::from_secs(1);
    let mecs = compute_mecs(&m);
    for (mec, want) in mecs.iter().zip([4.0, 5.0, 10.0]) {
        let r = mdp_restrict(&m, mec)?;
        let v = timed(second, "per-MEC VI", || run_vi(&r, Criterion::sc1(1e-6).unwrap(), &ViOptions::default()))?
            .map_err(|e| e.to_string())?;
        ensure((v.value - want).abs() < 1e-6, || format!("MEC {:?}: {} vs {want}", mec.states(), v.value))?;
    }
    let lv = timed(second, "local-vi", || local_vi(&m, &LocalViOptions::new(1e-6)))?.map_err(|e| e.to_string())?;
    ensure((lv.value - 5.005).abs() < 1e-6, || format!("local-vi {}", lv.value))?;
    let mut runs = 0;
    for h in Heuristic::ALL {
        for seed in 1..=5 {
            let opts = OdvOptions {
                heuristic: h,
                seed,
                ..OdvOptions::new(1e-6)
            };
            let r = timed(second, "odv", || on_demand_vi(&m, &opts))?.map_err(|e| e.to_string())?;
            ensure((r.value - 5.005).abs() < 1e-6, || format!("odv {h} seed {seed}: {}", r.value))?;
            runs += 1;
        }
    }
    Ok(format!("MEC gains 4/5/10, local-vi {:.9}, {runs} odv runs at 5.005", lv.value))
}

fn mdp_restrict(m: &Mdp, mec: &meanpay_core::Mec) -> Result<Mdp, String> {
    m.restrict_to_mec(mec, mec.states()[0])
        .map(|r| r.mdp)
        .map_err(|e| e.to_string())
}

fn refutation() -> Outcome {
    let start = Instant::now();
    for alpha in [10.0, 100.0, 1000.0] {
        let m = fixtures::span_trap(alpha);
        let t1 = vi_step(&m, &ViState::new(2));
        let t2 = vi_step(&m, &t1);
        let want = [0.9 * alpha, alpha];
        ensure(t1.delta() == want && t2.delta() == want, || {
            format!("alpha {alpha}: Δ1 {:?}, Δ2 {:?}", t1.delta(), t2.delta())
        })?;
        for rule in [StopRule::Sc2, StopRule::Sc3] {
            let r = run_vi(&m, Criterion::new(rule, 0.1).unwrap(), &ViOptions::default()).map_err(|e| e.to_string())?;
            ensure(r.iterations == 2 && r.criterion_unsound, || {
                format!("alpha {alpha} {}: n = {}", rule.as_str(), r.iterations)
            })?;
            let err = (alpha - r.value).abs();
            ensure(err == alpha / 10.0, || format!("alpha {alpha} {}: error {err}", rule.as_str()))?;
        }
        let r = run_vi(&m, Criterion::sc1(0.1).unwrap(), &ViOptions::default()).map_err(|e| e.to_string())?;
        ensure((r.value - alpha).abs() <= 0.05, || format!("alpha {alpha} sc1: {}", r.value))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_millis(100), || format!("took {took:?}"))?;
    Ok(format!("SC2/SC3 stop at n = 2 with error α/10; SC1 within 0.05 ({took:?})"))
}

fn weighted_identity(models: &[(Mdp, Mdp<BigRational>)]) -> Outcome {
    let start = Instant::now();
    for (i, (_, exact)) in models.iter().enumerate() {
        let gain = exact_gain(exact, DEFAULT_STRATEGY_LIMIT).map_err(|e| e.to_string())?;
        let r_max = exact.max_reward();
        if r_max.is_zero() {
            ensure(gain.is_zero(), || format!("model {i}: zero rewards but gain {gain}"))?;
            continue;
        }
        let mecs = compute_mecs(exact);
        let mut f = Vec::with_capacity(mecs.len());
        for mec in &mecs {
            let r = exact.restrict_to_mec(mec, mec.states()[0]).map_err(|e| e.to_string())?;
            let g = exact_gain(&r.mdp, DEFAULT_STRATEGY_LIMIT).map_err(|e| e.to_string())?;
            f.push(g / &r_max);
        }
        let quotient = weighted_quotient(exact, &mecs, &f).map_err(|e| e.to_string())?;
        let p = exact_reach(&quotient.model, &[quotient.plus.unwrap()], DEFAULT_STRATEGY_LIMIT)
            .map_err(|e| e.to_string())?;
        ensure(&r_max * &p == gain, || format!("model {i}: r_max·p = {} but gain {gain}", &r_max * &p))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{} models, exact equality ({took:?})", models.len()))
}

fn local_vi_end_to_end(models: &[(Mdp, Mdp<BigRational>)]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, (m, exact)) in models.iter().enumerate() {
        let gain = to_f64(&exact_gain(exact, DEFAULT_STRATEGY_LIMIT).map_err(|e| e.to_string())?);
        for eps in [1e-3, 1e-6] {
            let r = local_vi(m, &LocalViOptions::new(eps)).map_err(|e| format!("model {i}: {e}"))?;
            let err = (r.value - gain).abs();
            ensure(err < eps, || format!("model {i}, eps {eps}: {} vs {gain}", r.value))?;
            worst = worst.max(err / eps);
        }
    }
    Ok(format!("{} models × 2 precisions, worst error {worst:.3}·ε", models.len()))
}

fn odv_sandwich() -> Outcome {
    let mut episodes = 0u64;
    let models = random_pairs(100, 5, &RandomModelSpec::default());
    for eps in [1e-3, 1e-6] {
        for (i, (m, exact)) in models.iter().enumerate() {
            let gain = exact_gain(exact, DEFAULT_STRATEGY_LIMIT).map_err(|e| e.to_string())?;
            let opts = OdvOptions {
                heuristic: Heuristic::ALL[i % 3],
                seed: i as u64,
                ..OdvOptions::new(eps)
            };
            let mut violation = None;
            let r = on_demand_vi_observed(m, &opts, |s| {
                if violation.is_none() && !(q(s.lower) <= gain && gain <= q(s.upper)) {
                    violation = Some(*s);
                }
            })
            .map_err(|e| e.to_string())?;
            ensure(violation.is_none(), || format!("model {i}, eps {eps}: {violation:?} vs gain {gain}"))?;
            ensure(r.converged && r.upper - r.lower < 2.0 * eps, || format!("model {i}, eps {eps}: {r:?}"))?;
            ensure(q(r.lower) <= gain && gain <= q(r.upper), || format!("model {i}, eps {eps}: final {r:?}"))?;
            episodes += r.episodes;
        }
    }
    Ok(format!("100 models × 2 precisions, {episodes} episode boundaries checked"))
}

fn mec_decomposition() -> Outcome {
    let spec = RandomModelSpec {
        max_states: 6,
        ..RandomModelSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..500 {
        let m = random_mdp(&mut rng, &spec);
        let mecs = compute_mecs(&m);
        ensure(mecs == brute_force_mecs(&m), || format!("model {i}: decomposition differs"))?;
        let half = vec![0.5; mecs.len()];
        let quarter = vec![0.25; mecs.len()];
        let plain = mec_quotient(&m, &mecs).map_err(|e| e.to_string())?;
        ensure(compute_mecs(&plain.model).is_empty(), || format!("model {i}: plain quotient has an EC"))?;
        for qm in [
            weighted_quotient(&m, &mecs, &half).map_err(|e| e.to_string())?,
            bounded_quotient(&m, &mecs, &quarter, &half).map_err(|e| e.to_string())?,
        ] {
            let specials = [qm.plus, qm.minus, qm.unknown];
            for mec in compute_mecs(&qm.model) {
                ensure(mec.len() == 1 && specials.contains(&Some(mec.states()[0])), || {
                    format!("model {i}: quotient EC on {:?}", mec.states())
                })?;
            }
        }
    }
    Ok("500 models match brute force; quotients EC-free".into())
}

fn partial_exploration() -> Outcome {
    let spec: GeneratorSpec = "rare-branch:1000,0.001".parse().unwrap();
    let start = Instant::now();
    let m = generate(&spec);
    let exact = meanpay_core::exact::to_exact(&m).map_err(|e| e.to_string())?;
    let gain = to_f64(&exact_gain(&exact, DEFAULT_STRATEGY_LIMIT).map_err(|e| e.to_string())?);
    let r = on_demand_vi(&spec, &OdvOptions::new(0.1)).map_err(|e| e.to_string())?;
    let lv = local_vi(&m, &LocalViOptions::new(0.1)).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let n = m.num_states();
    ensure((r.value - gain).abs() < 0.1, || format!("odv {} vs oracle {gain}", r.value))?;
    ensure(2 * r.explored_states < n, || format!("odv explored {} of {n}", r.explored_states))?;
    ensure(lv.stats.touched_states == n, || format!("local-vi touched {}", lv.stats.touched_states))?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!(
        "odv {:.4} vs oracle {gain}, explored {} of {n}; local-vi touched {n} ({took:?})",
        r.value, r.explored_states
    ))
}

fn span_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let m = random_mdp(&mut rng, &RandomModelSpec::default());
        let mut s = vi_step(&m, &ViState::new(m.num_states()));
        let mut prev = span(s.delta()).unwrap();
        for n in 1..10_000 {
            s.advance(&m);
            let sp = span(s.delta()).unwrap();
            ensure(sp <= prev + 1e-12, || format!("model {i}, step {n}: {sp} > {prev}"))?;
            worst = worst.max(sp - prev);
            prev = sp;
        }
    }
    Ok(format!("50 models × 10^4 steps, largest increase {worst:e}"))
}

fn determinism() -> Outcome {
    let three = ModelSource::Document {
        name: "three_mec.mdp".into(),
        document: parse_document(fixtures::THREE_MEC_TEXT).unwrap(),
    };
    let grid = ModelSource::Generated("grid:4,3".parse().unwrap());
    let rare = ModelSource::Generated("rare-branch:1000,0.001".parse().unwrap());
    let trap = ModelSource::Generated("span-trap:1000".parse().unwrap());
    let chain = ModelSource::Generated("mec-chain:5,4".parse().unwrap());
    let base = SolveOptions::default();
    let mut cells: Vec<(&ModelSource, SolveOptions)> = vec![
        (&grid, SolveOptions { algorithm: Algorithm::Nvi, ..base }),
        (&trap, SolveOptions { algorithm: Algorithm::Nvi, criterion: StopRule::Sc3, epsilon: 0.1, ..base }),
        (&three, SolveOptions { algorithm: Algorithm::LocalVi, ..base }),
        (&rare, SolveOptions { algorithm: Algorithm::LocalVi, epsilon: 0.1, ..base }),
        (&three, SolveOptions { algorithm: Algorithm::Oracle, ..base }),
    ];
    for h in Heuristic::ALL {
        for (src, epsilon) in [(&three, 1e-6), (&chain, 1e-3), (&rare, 0.1)] {
            cells.push((src, SolveOptions { algorithm: Algorithm::Odv, heuristic: h, seed: 7, epsilon, ..base }));
        }
    }
    for (src, opts) in &cells {
        let render = || -> Result<String, String> {
            let mut r = solve(src, opts).map_err(|e| e.to_string())?;
            r.wall_ms = 0.0;
            Ok(r.to_json())
        };
        let a = render()?;
        let b = render()?;
        ensure(a == b, || format!("{} on {}: reports differ", opts.algorithm, src.name()))?;
    }
    Ok(format!("{} configurations, all four algorithms", cells.len()))
}

fn main() -> ExitCode {
    let shared = random_pairs(300, 3, &RandomModelSpec::default());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("fixture correctness", Box::new(fixture_correctness)),
        ("difference criteria refuted", Box::new(refutation)),
        ("weighted quotient identity", Box::new(|| weighted_identity(&shared))),
        ("local-vi within epsilon", Box::new(|| local_vi_end_to_end(&shared))),
        ("on-demand bounds sandwich", Box::new(odv_sandwich)),
        ("MEC decomposition", Box::new(mec_decomposition)),
        ("partial exploration", Box::new(partial_exploration)),
        ("span monotonicity", Box::new(span_monotonicity)),
        ("deterministic reports", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{took:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{took:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
