//! Acceptance suite: twelve criteria, one PASS/FAIL line each with runtime.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero when any
//! criterion fails or exceeds its time budget.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use blowup_core::analysis::{barometer_scan, classify_growth_law, default_lower_limit, ClassifierOptions, Verdict};
use blowup_core::ensemble::{
    pathwise_growth_slope, run_ensemble_with, volatility_masking_scan, EnsembleSpec, Execution, MaskingTemplate,
};
use blowup_core::model::{self, ScenarioParams};
use blowup_core::ode::{self, estimate_blowup_time, BlowUpSearch, FnField, IntegrationOptions, VectorField};
use blowup_core::sde::{em_path, ergodicity_check, gbm_model, hyperbolic_sde_model, EmOptions, ERGODICITY_TOLERANCE};
use blowup_core::GrowthLaw;

type Check = Result<String, String>;
/// Name, time budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name} = {got}, want {want} ± {tol}")
    })
}

fn blowup(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(args)
        .output()
        .map_err(|e| format!("cannot run blowup: {e}"))?;
    ensure(out.status.success(), || {
        format!("blowup {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn headline() -> Check {
    let v: serde_json::Value =
        serde_json::from_slice(&blowup(&["reproduce", "headline"])?).map_err(|e| e.to_string())?;
    let get = |key: &str| v[key].as_f64().ok_or_else(|| format!("headline lacks `{key}`"));
    let (t1, t2, k, ts) = (get("t1")?, get("t2")?, get("k")?, get("t_s")?);
    near("t1", t1, 9.968, 0.01)?;
    near("t2", t2, 2.165, 0.01)?;
    near("k", k, 0.004620, 1e-5)?;
    near("t_s", ts, 12.13, 0.02)?;
    Ok(format!("t1={t1:.4} t2={t2:.4} k={k:.6} t_s={ts:.4}"))
}

fn deterministic_blowup() -> Check {
    let opts = IntegrationOptions::default();
    let mut notes = Vec::new();
    for (k, want, tol) in [(0.01, 100.0, 0.1), (0.05, 20.0, 0.05)] {
        let start = Instant::now();
        let search = estimate_blowup_time(&GrowthLaw::power(k, 2.0), &[1.0], 1e3, &opts).map_err(|e| e.to_string())?;
        let t = search.estimate().ok_or_else(|| format!("k = {k}: no blow-up found"))?;
        near(&format!("t* (k = {k})"), t, want, tol)?;
        ensure(start.elapsed() < Duration::from_secs(1), || {
            format!("k = {k} took {:?}", start.elapsed())
        })?;
        notes.push(format!("{t:.6}"));
    }
    Ok(format!("t* = {}", notes.join(", ")))
}

/// Largest relative error against `oracle` at 20 evenly spaced checkpoints.
fn oracle_error(
    field: &dyn VectorField,
    y0: &[f64],
    comp: usize,
    t_max: f64,
    oracle: impl Fn(f64) -> f64,
) -> Result<f64, String> {
    let checkpoints: Vec<f64> = (1..=20).map(|j| t_max * j as f64 / 20.0).collect();
    let opts = IntegrationOptions::default().with_output_times(checkpoints.clone());
    let traj = ode::integrate(field, y0, t_max, &opts).map_err(|e| e.to_string())?;
    checkpoints.iter().try_fold(0.0f64, |worst, &t| {
        let got = traj.state_at(t).ok_or_else(|| format!("no sample at t = {t}"))?[comp];
        let want = oracle(t);
        Ok(worst.max((got - want).abs() / want.abs()))
    })
}

fn oracle_agreement() -> Check {
    let p = ScenarioParams::default();
    let (k, i) = (p.k, p.intelligence);
    let t1 = model::phase1_duration(p.growth_factor, i).unwrap();
    let mut errs = vec![(
        "exponential".to_string(),
        oracle_error(&GrowthLaw::exponential(k * i), &[p.c], 0, t1, |t| {
            model::exp_phase_solution(&p, t).unwrap()
        })?,
    )];
    let t_star = 1.0 / (k * i);
    errs.push((
        "hyperbolic".into(),
        oracle_error(&GrowthLaw::power(k, 2.0), &[i], 0, 0.99 * t_star, |t| {
            model::hyperbolic_solution(k, i, t).unwrap()
        })?,
    ));
    for n in [1.5, 3.0] {
        let ts = model::powerlaw_blowup_time(k, i, n).unwrap().t_star().unwrap();
        errs.push((
            format!("power n={n}"),
            oracle_error(&GrowthLaw::power(k, n), &[i], 0, 0.99 * ts, |t| {
                model::powerlaw_solution(k, i, n, t).unwrap()
            })?,
        ));
    }
    let (c, kl) = (0.2, 0.3);
    errs.push((
        "log law".into(),
        oracle_error(
            &GrowthLaw::log_law(kl),
            &[model::loglaw_solution(c, kl, 0.0).unwrap()],
            0,
            5.0,
            |t| model::loglaw_solution(c, kl, t).unwrap(),
        )?,
    ));
    let (k1, k2) = (p.k1, p.k2);
    let coupled = FnField::new(2, move |s: &[f64], r: &mut [f64]| {
        r[0] = k1 * s[0] * s[1];
        r[1] = k2 * s[0] * s[1];
    });
    errs.push((
        "coupled".into(),
        oracle_error(&coupled, &[k1 / k2, 1.0], 1, 0.99 / k1, |t| {
            model::coupled_gdp_solution(k1, t).unwrap()
        })?,
    ));
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("relative errors {errs:?}"))?;
    Ok(format!("6 closed forms, worst rel. error {worst:.2e}"))
}

fn powerlaw_limits() -> Check {
    let times: Vec<f64> = [1.0001, 1.5, 2.0, 3.0, 10.0, 100.0]
        .iter()
        .map(|&n| model::powerlaw_blowup_time(0.01, 100.0, n).unwrap().t_star().unwrap())
        .collect();
    ensure(times.windows(2).all(|w| w[1] < w[0]), || {
        format!("not decreasing: {times:?}")
    })?;
    let decades = (times[0] / times[5]).log10();
    ensure(decades >= 6.0, || format!("spans only {decades:.2} decades"))?;
    Ok(format!("spans {decades:.1} decades"))
}

fn gbm_time_average() -> Check {
    let model = gbm_model(0.05, 1.0, 0.1).map_err(|e| e.to_string())?;
    let opts = EmOptions {
        threshold: f64::MAX,
        record_stride: 1,
    };
    let path = em_path(&model, 1.0, 0.01, 2000.0, 42, &opts).map_err(|e| e.to_string())?;
    let slope = pathwise_growth_slope(&path).map_err(|e| e.to_string())?;
    near("log-slope", slope, 0.045, 0.01)?;
    Ok(format!("slope {slope:.5}"))
}

fn dispersion() -> Check {
    let spec = EnsembleSpec::new(hyperbolic_sde_model(0.05, 0.05).unwrap(), 200.0, 1000, 42);
    let stats = run_ensemble_with(&spec, Execution::Parallel).map_err(|e| e.to_string())?;
    let f = stats.exploded_fraction;
    ensure(f > 0.0 && f < 1.0, || format!("exploded fraction {f}"))?;
    let iqr = stats.blowup_quantiles.ok_or("no explosions")?.iqr();
    ensure(iqr >= 5.0, || format!("IQR {iqr}"))?;
    Ok(format!("exploded {f:.3}, IQR {iqr:.2} periods"))
}

fn non_explosion() -> Check {
    let spec = EnsembleSpec::new(hyperbolic_sde_model(0.01, 0.1).unwrap(), 200.0, 1000, 42);
    let stats = run_ensemble_with(&spec, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(stats.survived_fraction >= 0.1, || {
        format!("survived {}", stats.survived_fraction)
    })?;
    let det = estimate_blowup_time(
        &GrowthLaw::power(0.01, 2.0),
        &[1.0],
        1e3,
        &IntegrationOptions::default(),
    )
    .map_err(|e| e.to_string())?
    .estimate()
    .ok_or("deterministic counterpart does not blow up")?;
    near("deterministic t*", det, 100.0, 0.1)?;
    Ok(format!(
        "survived {:.3}, deterministic t* {det:.4}",
        stats.survived_fraction
    ))
}

fn ergodicity() -> Check {
    let (k, s) = (0.05, 0.05);
    let grid: Vec<f64> = (1..=100).map(f64::from).collect();
    let hyp = ergodicity_check(&hyperbolic_sde_model(k, s).unwrap(), &grid, ERGODICITY_TOLERANCE)
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (a, au) in grid.iter().zip(&hyp.drift_of_u) {
        let want = (k - s * s * a) / s;
        // Scale by k / sigma where the oracle itself crosses zero (A = 20).
        worst = worst.max((au - want).abs() / want.abs().max(k / s));
    }
    ensure(worst <= 1e-4, || format!("a_u rel. error {worst:e}"))?;
    ensure(!hyp.transform_exists, || {
        "hyperbolic SDE reported as transformable".into()
    })?;
    let gbm = ergodicity_check(&gbm_model(0.05, 1.0, 0.1).unwrap(), &grid, ERGODICITY_TOLERANCE)
        .map_err(|e| e.to_string())?;
    ensure(gbm.transform_exists, || "GBM reported as not transformable".into())?;
    Ok(format!("a_u rel. error {worst:.1e}; hyperbolic: none; GBM: exists"))
}

fn classifier_corpus() -> Check {
    let opts = ClassifierOptions::default();
    let corpus: Vec<(GrowthLaw, Verdict, Option<f64>)> = vec![
        (GrowthLaw::power(1.0, 2.0), Verdict::FiniteTime, Some(1.0)),
        (GrowthLaw::power(1.0, 1.5), Verdict::FiniteTime, Some(2.0)),
        (GrowthLaw::power(1.0, 1.0), Verdict::InfiniteTime, None),
        (GrowthLaw::power(1.0, 0.5), Verdict::InfiniteTime, None),
        (GrowthLaw::new("A*ln(A)", |a| a * a.ln()), Verdict::InfiniteTime, None),
        (
            GrowthLaw::new("A*ln(A)^2", |a| a * a.ln().powi(2)),
            Verdict::FiniteTime,
            None,
        ),
    ];
    for (law, want, time) in corpus {
        let a0 = default_lower_limit(&law);
        let v = classify_growth_law(&law, a0, &opts).map_err(|e| e.to_string())?;
        ensure(v.verdict == want, || {
            format!("{}: {:?}, want {want:?}", law.label(), v.verdict)
        })?;
        if let Some(t) = time {
            near(
                &format!("{} time", law.label()),
                v.singularity_time_estimate.unwrap_or(f64::NAN),
                t,
                1e-3,
            )?;
        }
        let sim = estimate_blowup_time(&law, &[a0], 1e4, &IntegrationOptions::default()).map_err(|e| e.to_string())?;
        match (&sim, v.verdict) {
            (BlowUpSearch::Found(ev), Verdict::FiniteTime) => {
                let t = v.singularity_time_estimate.unwrap();
                ensure((ev.estimate - t).abs() <= 0.01 * t, || {
                    format!("{}: simulator {} vs classifier {t}", law.label(), ev.estimate)
                })?;
            }
            (BlowUpSearch::NotFound { .. }, Verdict::InfiniteTime) => {}
            other => return Err(format!("{}: simulator disagrees: {other:?}", law.label())),
        }
    }
    Ok("6/6 verdicts, all matching the simulator".into())
}

fn barometer_discrimination() -> Check {
    let z = blowup_core::analysis::DEFAULT_Z_THRESHOLD;
    let mut windows = 0;
    for r in [1.05f64, 1.5872, 2.5] {
        let t: Vec<f64> = (0..120).map(|i| i as f64 * 0.25).collect();
        let a: Vec<f64> = t.iter().map(|t| r.powf(*t)).collect();
        for w in [8, 16, 32, 64] {
            for rep in barometer_scan(&t, &a, w, z).map_err(|e| e.to_string())? {
                ensure(!rep.flagged, || format!("exponential R = {r} flagged: {rep:?}"))?;
                windows += 1;
            }
        }
    }
    for k in [0.01, 0.05, 0.2] {
        let t_star = 1.0 / k;
        let t: Vec<f64> = (0..200).map(|i| 0.95 * t_star * i as f64 / 199.0).collect();
        let a: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 - k * t)).collect();
        for w in [8, 16, 32, 64] {
            for rep in barometer_scan(&t, &a, w, z).map_err(|e| e.to_string())? {
                if rep.t_end > 0.5 * t_star {
                    ensure(rep.flagged, || format!("hyperbolic k = {k} not flagged: {rep:?}"))?;
                    windows += 1;
                }
            }
        }
    }
    Ok(format!("{windows} windows classified correctly"))
}

fn volatility_masking() -> Check {
    let k = 0.01;
    let sigmas = [0.0, k, 2.0 * k, 5.0 * k, 10.0 * k];
    let rows = volatility_masking_scan(k, &sigmas, &MaskingTemplate::default()).map_err(|e| e.to_string())?;
    let fractions: Vec<f64> = rows.iter().map(|r| r.flagged_fraction).collect();
    let rises: Vec<f64> = fractions.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    ensure(rises.len() <= 1 && rises.iter().all(|d| *d <= 0.02), || {
        format!("flagged fractions {fractions:?}")
    })?;
    let shown: Vec<String> = fractions.iter().map(|f| format!("{f:.3}")).collect();
    Ok(format!("flagged fractions [{}]", shown.join(", ")))
}

fn same_bytes(args: &[&str]) -> Result<(), String> {
    ensure(blowup(args)? == blowup(args)?, || {
        format!("blowup {args:?} differs between runs")
    })
}

fn same_dirs(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let (x, y) = (fs::read(a.join(name)), fs::read(b.join(name)));
        ensure(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), || {
            format!("{name:?} differs between runs")
        })?;
    }
    Ok(names.len())
}

fn determinism() -> Check {
    same_bytes(&[
        "ensemble", "--k", "0.05", "--sigma", "0.05", "--paths", "300", "--seed", "42",
    ])?;
    same_bytes(&["ensemble", "--paths", "1", "--sigma", "0.1", "--seed", "7"])?;
    same_bytes(&[
        "simulate",
        "--dsl",
        "dY = 0.05*Y*A; dA = 0.1*Y*A",
        "--init",
        "Y=0.5,A=1",
        "--t-max",
        "25",
    ])?;
    same_bytes(&["classify", "--dsl", "A*ln(A)^2"])?;

    let tmp = std::env::temp_dir().join(format!("blowup-acceptance-{}", std::process::id()));
    let (a, b) = (tmp.join("a"), tmp.join("b"));
    for dir in [&a, &b] {
        blowup(&["reproduce", "all", "--seed", "42", "--out", dir.to_str().unwrap()])?;
        blowup(&[
            "ensemble",
            "--k",
            "0.05",
            "--sigma",
            "0.05",
            "--paths",
            "200",
            "--out",
            dir.to_str().unwrap(),
        ])?;
    }
    let files = same_dirs(&a, &b);
    let _ = fs::remove_dir_all(&tmp);
    let files = files?;

    let spec = EnsembleSpec::new(hyperbolic_sde_model(0.05, 0.05).unwrap(), 200.0, 1000, 42);
    let serial = run_ensemble_with(&spec, Execution::Serial).map_err(|e| e.to_string())?;
    let parallel = run_ensemble_with(&spec, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(serial == parallel, || "serial and parallel ensembles differ".into())?;
    Ok(format!(
        "4 stdout reruns and {files} files identical; serial == parallel over 1000 paths"
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("headline reproduction", 1, headline),
        ("deterministic blow-up", 2, deterministic_blowup),
        ("oracle agreement", 10, oracle_agreement),
        ("power-law limits", 1, powerlaw_limits),
        ("GBM time average", 30, gbm_time_average),
        ("stochastic dispersion", 60, dispersion),
        ("non-explosion regime", 60, non_explosion),
        ("ergodicity check", 1, ergodicity),
        ("classifier corpus", 30, classifier_corpus),
        ("barometer discrimination", 5, barometer_discrimination),
        ("volatility masking trend", 120, volatility_masking),
        ("determinism", 60, determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} {:>2} {name:<26} {:>8.3} s  {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
