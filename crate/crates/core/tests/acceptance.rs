//! One line per acceptance criterion; the test fails if any criterion does.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use sfr_inertia::estimators::{
    estimate_inoue, estimate_sliding_window, fit_sfr, polynomial_rocof, rocof_sliding_window,
    sfr_predict, swing_inertia, sweep_poly_orders, sweep_window_lengths, Direction,
    Discretization, FitOptions, SfrInputs, DEFAULT_FIT_HORIZON,
};
use sfr_inertia::preprocess::{remove_inertial, WashoutConfig};
use sfr_inertia::sim::{simulate_event, ScenarioConfig};
use sfr_inertia::timeseries::EventDataset;
use sfr_inertia::{Unit, UniformTrace};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(results: &mut Vec<bool>, id: usize, name: &str, outcome: Outcome) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id} ({name}): {}", outcome.detail);
    results.push(outcome.pass);
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn clean_case1() -> EventDataset {
    simulate_event(&ScenarioConfig::case1_analog().without_machine_inertia())
        .unwrap()
        .dataset
}

fn oracle_identity() -> Outcome {
    let ds = clean_case1();
    let predicted = sfr_predict(1522.0, 4.0, &ds).unwrap();
    let k0 = ds.onset_index();
    let mut values = vec![50.0; k0];
    values.extend_from_slice(predicted.values());
    let ds = ds
        .with_frequency(ds.frequency().with_values(values).unwrap())
        .unwrap();
    let start = Instant::now();
    let fit = fit_sfr(&ds, &FitOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let ke_err = (fit.ke - 1522.0).abs() / 1522.0;
    let d_err = (fit.d - 4.0).abs();
    Outcome {
        pass: ke_err <= 1e-3 && d_err <= 0.01 && elapsed < Duration::from_secs(5),
        detail: format!(
            "ke {:.4} (rel err {ke_err:.2e} <= 1e-3), d {:.5} (err {d_err:.2e} <= 0.01), {elapsed:.2?} < 5 s",
            fit.ke, fit.d
        ),
    }
}

fn cross_integrator() -> Outcome {
    let event = simulate_event(&ScenarioConfig::case1_analog().without_machine_inertia()).unwrap();
    let predicted = sfr_predict(1522.0, 4.0, &event.dataset).unwrap();
    let k0 = event.dataset.onset_index();
    let err = max_abs_diff(predicted.values(), &event.truth.frequency.values()[k0..]);
    Outcome {
        pass: err <= 1e-4,
        detail: format!("max |dev| {err:.3e} Hz <= 1e-4 Hz at dt = 0.01 s"),
    }
}

fn percentile_95(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let rank = (0.95 * values.len() as f64).ceil() as usize;
    values[rank - 1]
}

fn noise_robustness() -> Outcome {
    let seeds = 0..24u64;
    let n = seeds.clone().count();
    let (ke_errs, d_errs): (Vec<f64>, Vec<f64>) = seeds
        .map(|seed| {
            let mut config = ScenarioConfig::case1_analog().without_machine_inertia();
            config.artifacts.noise_sigma_hz = 0.003;
            config.seed = seed;
            let ds = simulate_event(&config).unwrap().dataset;
            let fit = fit_sfr(&ds, &FitOptions::default()).unwrap();
            ((fit.ke - 1522.0).abs() / 1522.0, (fit.d - 4.0).abs())
        })
        .unzip();
    let ke95 = percentile_95(ke_errs);
    let d95 = percentile_95(d_errs);
    Outcome {
        pass: ke95 <= 0.09 && d95 <= 1.0,
        detail: format!(
            "{n} seeds at 3 mHz: p95 ke err {:.2}% <= 9%, p95 d err {d95:.3} <= 1.0 %/Hz",
            100.0 * ke95
        ),
    }
}

fn sliding_window_pathology() -> Outcome {
    let truth = 78270.0;
    let osc = simulate_event(&ScenarioConfig::case2_oscillatory()).unwrap().dataset;
    let windows: Vec<f64> = (1..=50).map(|k| k as f64 * 0.02).collect();
    let sweep = sweep_window_lengths(&osc, &windows).unwrap();
    let errs: Vec<f64> = sweep
        .estimates
        .iter()
        .map(|e| e.map_or(f64::INFINITY, |e| (e.ke - truth).abs()))
        .collect();
    let best = errs.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = errs[0] / best;

    let ffr = simulate_event(&ScenarioConfig::case3_ffr().without_machine_inertia())
        .unwrap()
        .dataset;
    let long: Vec<f64> = (10..=50).map(|k| k as f64 * 0.02).collect();
    let ke: Vec<f64> = sweep_window_lengths(&ffr, &long)
        .unwrap()
        .estimates
        .iter()
        .map(|e| e.unwrap().ke)
        .collect();
    let monotone = ke.windows(2).all(|w| w[1] > w[0]);
    Outcome {
        pass: ratio >= 3.0 && monotone,
        detail: format!(
            "oscillatory 20 ms error / best error = {ratio:.1} >= 3; FFR estimates strictly rising over 0.2..1.0 s: {monotone} ({:.0} -> {:.0} MW.s)",
            ke[0],
            ke[ke.len() - 1]
        ),
    }
}

fn inoue_pathology() -> Outcome {
    let config = ScenarioConfig::case5_fault_transient();
    let floor = config.machine_inertia();
    let truth = config.ke_true_mws;
    let ds = simulate_event(&config).unwrap().dataset;
    let orders: Vec<usize> = (2..=30).collect();
    let sweep = sweep_poly_orders(&ds, &orders, DEFAULT_FIT_HORIZON).unwrap();
    let points: Vec<(f64, f64)> = sweep.points().collect();
    let below: Vec<usize> = points
        .iter()
        .filter(|(o, ke)| *o > 15.0 && *ke < floor)
        .map(|(o, _)| *o as usize)
        .collect();
    let close: Vec<usize> = points
        .iter()
        .filter(|(o, ke)| *o <= 12.0 && (ke - truth).abs() <= 0.15 * truth)
        .map(|(o, _)| *o as usize)
        .collect();
    Outcome {
        pass: !below.is_empty() && !close.is_empty(),
        detail: format!(
            "orders > 15 below {floor} MW.s floor: {below:?}; orders <= 12 within 15% of {truth}: {close:?}"
        ),
    }
}

fn washout_filter() -> Outcome {
    let event = simulate_event(&ScenarioConfig::case1_analog()).unwrap();
    let inertias: BTreeMap<String, f64> = event
        .config
        .governors
        .iter()
        .map(|g| (g.id.clone(), g.inertia_mws))
        .collect();
    let error_at = |t_w: f64| {
        let config = WashoutConfig::new(t_w, inertias.clone(), 50.0).unwrap();
        let channel = &event.dataset.pfr_channels()[0];
        let cleaned = remove_inertial(channel, event.dataset.frequency(), &config).unwrap();
        let dispatch = event.config.governors[0].dispatch_mw;
        let truth = event.truth.governors[0].values();
        let sq: f64 = cleaned
            .values()
            .iter()
            .zip(truth)
            .map(|(c, t)| (c - dispatch - t).powi(2))
            .sum();
        let peak = truth.iter().map(|v| v.abs()).fold(0.0, f64::max);
        (sq / truth.len() as f64).sqrt() / peak
    };
    let fast = error_at(0.06);
    let slow = error_at(0.2);
    Outcome {
        pass: fast < 0.05 && slow > fast,
        detail: format!(
            "RMSE/peak {:.2}% < 5% at t_w = 0.06 s; {:.2}% at t_w = 0.2 s is larger",
            100.0 * fast,
            100.0 * slow
        ),
    }
}

fn affine(slope: f64, len: usize) -> UniformTrace {
    let values = (0..len).map(|i| 50.0 + slope * i as f64 * 0.01).collect();
    UniformTrace::new(0.0, 0.01, values, Unit::Hz, "f").unwrap()
}

fn property_suites() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 64,
        failure_persistence: None,
        ..Config::default()
    });
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };

    check(
        "scale invariance",
        runner
            .run(&(1.0f64..1e4, -10.0f64..-1e-3, 1e-3f64..1e3), |(p, r, a)| {
                let x = swing_inertia(50.0, p, r).unwrap();
                let y = swing_inertia(50.0, a * p, a * r).unwrap();
                prop_assert!((x - y).abs() <= 1e-12 * x);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check(
        "per-unit homogeneity",
        runner
            .run(&(500.0f64..5e4, 0.0f64..10.0, 0.1f64..10.0), |(ke, d, s)| {
                let pfr: Vec<f64> = (0..300).map(|k| 60.0 * (1.0 - (-(k as f64) / 150.0).exp())).collect();
                let make = |scale: f64| SfrInputs {
                    f_n: 50.0,
                    p_load: 315.0 * scale,
                    dt: 0.01,
                    pfr: pfr.iter().map(|v| v * scale).collect(),
                    lost: vec![85.0 * scale; 300],
                };
                for scheme in [Discretization::Trapezoidal, Discretization::ForwardEuler] {
                    let a = make(1.0).deviation(ke, d, 300, scheme).unwrap();
                    let b = make(s).deviation(ke * s, d, 300, scheme).unwrap();
                    prop_assert!(max_abs_diff(&a, &b) <= 1e-12);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check("steady-state balance", {
        let mut config = ScenarioConfig::case1_analog().without_machine_inertia();
        config.duration_s = 150.0;
        let e = simulate_event(&config).unwrap();
        let df = e.truth.frequency.values().last().unwrap() - 50.0;
        let gov = e.truth.governor_total.values().last().unwrap();
        let residual = gov - 85.0 - 0.04 * 315.0 * df;
        if residual.abs() < 0.1 {
            Ok(())
        } else {
            Err(format!("residual {residual} MW"))
        }
    });

    check(
        "exact ramp RoCoF",
        runner
            .run(&(-3.0f64..-1e-3, 2usize..100), |(slope, w)| {
                let f = affine(slope, 500);
                let r = rocof_sliding_window(&f, 1.0, w as f64 * 0.01, 2.5, Direction::Falling).unwrap();
                prop_assert!((r - slope).abs() <= 1e-9 * slope.abs().max(1.0));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check(
        "polynomial derivative",
        runner
            .run(&proptest::collection::vec(-0.5f64..0.5, 1..=6), |coeffs| {
                let values = (0..600)
                    .map(|i| {
                        let t = (i as f64 - 50.0).max(0.0) * 0.01 / 5.0;
                        50.0 + coeffs.iter().enumerate().map(|(j, c)| c * t.powi(j as i32 + 1)).sum::<f64>()
                    })
                    .collect();
                let f = UniformTrace::new(0.0, 0.01, values, Unit::Hz, "f").unwrap();
                let r = polynomial_rocof(&f, 0.5, coeffs.len(), 5.0).unwrap();
                prop_assert!((r - coeffs[0] / 5.0).abs() <= 1e-9);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check("seeded reproducibility", {
        let mut config = ScenarioConfig::case3_ffr();
        config.artifacts.noise_sigma_hz = 0.003;
        config.artifacts.power_noise_sigma_mw = 0.5;
        let a = simulate_event(&config).unwrap();
        let b = simulate_event(&config).unwrap();
        let fa = fit_sfr(&a.dataset, &FitOptions::default()).unwrap();
        let fb = fit_sfr(&b.dataset, &FitOptions::default()).unwrap();
        let sa = estimate_sliding_window(&a.dataset, 0.5).unwrap();
        let sb = estimate_sliding_window(&b.dataset, 0.5).unwrap();
        let ia = estimate_inoue(&a.dataset, 12, 5.0).unwrap();
        let ib = estimate_inoue(&b.dataset, 12, 5.0).unwrap();
        if a == b && fa == fb && sa == sb && ia == ib {
            Ok(())
        } else {
            Err("runs differ".into())
        }
    });

    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "scale invariance, per-unit homogeneity, steady-state balance, exact ramp, polynomial derivative, seeded reproducibility".into()
        } else {
            failures.join("; ")
        },
    }
}

fn main() {
    let start = Instant::now();
    let mut results = Vec::new();
    report(&mut results, 1, "oracle identity", oracle_identity());
    report(&mut results, 2, "cross-integrator agreement", cross_integrator());
    report(&mut results, 3, "noise robustness", noise_robustness());
    report(&mut results, 4, "sliding-window pathology", sliding_window_pathology());
    report(&mut results, 5, "polynomial-fit pathology", inoue_pathology());
    report(&mut results, 6, "washout filter", washout_filter());
    report(&mut results, 7, "property suites", property_suites());
    println!("acceptance suite ran in {:.2?}", start.elapsed());
    let failed = results.iter().filter(|p| !**p).count();
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
