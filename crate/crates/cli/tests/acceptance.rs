//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use fracdyn::commands::simulate;
use fracdyn::config::{ExperimentConfig, InitialState};
use fracdyn_core::numkit::{eigenvalues, mittag_leffler, multiset_distance, poly_roots, Complex64};
use fracdyn_core::solver::{convergence_order, integrate, PredictorAnchor, SolverConfig};
use fracdyn_core::stability::{
    classify_equilibrium, cubic_from_gains_squared, e2_deltas_exact, e2_gain_condition, routh_hurwitz_cubic,
    MatignonConfig, RhClass, Verdict,
};
use fracdyn_core::system::{linear_decay, FracOrder, GainVector};
use fracdyn_maxwell_bloch::*;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn criterion_1() -> Outcome {
    let (d1, d2) = e2_deltas_exact(q(1, 4), q(3, 2), q(1, 4), q(2, 3), q(-1, 8));
    ensure(d1 == q(-1, 2) && d2 == q(7, 36), || format!("Δ1 = {d1}, Δ2 = {d2}"))?;

    let k = GainVector::new(vec![0.25, 1.5, 0.25, 2.0 / 3.0, 1.0]).unwrap();
    let m = -0.125;
    let report = e2_gain_condition(&k, m).map_err(|e| e.to_string())?;
    let (s2, s7) = (2f64.sqrt(), 7f64.sqrt());
    // −13/12 ± √7/12 are real: Δ₂ > 0 puts the pair on the real axis
    let expected = [
        Complex64::new(-1.0, 0.0),
        Complex64::new(-0.25, s2 / 4.0),
        Complex64::new(-0.25, -s2 / 4.0),
        Complex64::new(-13.0 / 12.0 + s7 / 12.0, 0.0),
        Complex64::new(-13.0 / 12.0 - s7 / 12.0, 0.0),
    ];
    let d = multiset_distance(&report.eigenvalues, &expected).ok_or("eigenvalue count")?;
    ensure(d <= 1e-12, || format!("closed-form eigenvalues off by {d:e}"))?;
    let j = mb_controlled_jacobian(&MbState::new([0.0, 0.0, 0.0, 0.0, m]).unwrap(), &k).map_err(|e| e.to_string())?;
    let numeric = eigenvalues(&j).map_err(|e| e.to_string())?;
    let dn = multiset_distance(&numeric, &expected).ok_or("eigenvalue count")?;
    ensure(dn <= 1e-12, || format!("numeric eigenvalues off by {dn:e}"))?;
    for a in [0.3, 0.65, 1.0] {
        let v = report.verdict(order(a), Some(&j)).map_err(|e| e.to_string())?.verdict;
        ensure(v == Verdict::AsymptoticallyStable, || format!("α = {a}: {v}"))?;
    }
    Ok(format!("Δ1 = {d1}, Δ2 = {d2}, eigenvalue error {:.1e}; λ4,5 = −13/12 ± √7/12 (real pair)", d.max(dn)))
}

fn criterion_2() -> Outcome {
    let c = cubic_from_gains_squared(0.5, 0.5, 0.0, 3.0 / 16.0, 1.0 / 16.0).map_err(|e| e.to_string())?;
    ensure((c.a1, c.a2, c.a3) == (1.0, 0.5, 0.125), || format!("a = ({}, {}, {})", c.a1, c.a2, c.a3))?;
    ensure((c.discriminant + 3.0 / 64.0).abs() <= 1e-15, || format!("D = {}", c.discriminant))?;
    let roots = poly_roots(&c.polynomial()).map_err(|e| e.to_string())?;
    let want = [
        Complex64::new(-0.5, 0.0),
        Complex64::new(-0.25, 3f64.sqrt() / 4.0),
        Complex64::new(-0.25, -3f64.sqrt() / 4.0),
    ];
    let d = multiset_distance(&roots, &want).ok_or("root count")?;
    ensure(d <= 1e-9, || format!("roots off by {d:e}"))?;
    let rh = routh_hurwitz_cubic(&c, order(0.5)).map_err(|e| e.to_string())?;
    ensure(rh.class == RhClass::StableAlphaBelowTwoThirds && rh.class.alpha_range() == "(0, 2/3)", || {
        format!("class {}", rh.class)
    })?;
    Ok(format!("D = {}, roots within {d:.1e}, stable for α ∈ {}", c.discriminant, rh.class.alpha_range()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = system();
    let cfg = MatignonConfig::default();
    let mut points = Vec::new();
    for _ in 0..50 {
        let r = rng.gen_range(0.01f64..=4.0).sqrt();
        let theta = rng.gen_range(0.0..2.0 * PI);
        points.push(EquilibriumFamily::E1 { m: r * theta.cos(), n: r * theta.sin() });
    }
    for _ in 0..50 {
        let mut m = 0.0;
        while m == 0.0 {
            m = rng.gen_range(-2.0..=2.0);
        }
        points.push(EquilibriumFamily::E2 { m });
    }
    let mut checked = 0;
    for a in [0.3, 0.65, 0.95] {
        for fam in &points {
            let x = mb_equilibria(*fam).map_err(|e| e.to_string())?;
            let r = classify_equilibrium(&sys, &x, order(a), &cfg).map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Unstable, || format!("{fam} at α = {a}: {}", r.verdict))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} classifications, all Unstable"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = MbState::new(std::array::from_fn(|_| rng.gen_range(-5.0..=5.0))).unwrap();
        let (a, b) = (mb_field(&x), mb_field_matrix_form(&x));
        worst = (0..DIM).map(|i| (a[i] - b[i]).abs()).fold(worst, f64::max);
    }
    ensure(worst <= 1e-14, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 states, max deviation {worst:e}"))
}

fn criterion_5() -> Outcome {
    let sys = linear_decay(1.0);
    let cfg = SolverConfig::new(order(1.0), 0.01, 100, vec![1.0]).map_err(|e| e.to_string())?;
    let traj = integrate(&sys, &cfg, false).map_err(|e| e.to_string())?;
    let err = (traj.final_state()[0] - (-1f64).exp()).abs();
    ensure(err <= 1e-4, || format!("|x[N] − e^−1| = {err:e}"))?;
    let exact = |t: f64| vec![(-t).exp()];
    let r = convergence_order(&sys, order(1.0), &[1.0], 1.0, &exact, &[0.04, 0.02, 0.01, 0.005])
        .map_err(|e| e.to_string())?;
    let slope = r.slope.ok_or("no slope")?;
    ensure((slope - 2.0).abs() <= 0.2, || format!("order {slope}"))?;
    Ok(format!("|x[N] − e^−1| = {err:.2e}, order {slope:.3}"))
}

fn criterion_6() -> Outcome {
    let alpha = 0.65;
    let exact = |t: f64| vec![mittag_leffler(alpha, -t.powf(alpha)).unwrap()];
    let r = convergence_order(&linear_decay(1.0), order(alpha), &[1.0], 1.0, &exact, &[0.02, 0.01, 0.005, 0.0025])
        .map_err(|e| e.to_string())?;
    let slope = r.slope.ok_or("no slope")?;
    ensure(slope >= 1.4, || format!("order {slope}"))?;
    Ok(format!(
        "order {slope:.3} on nodes shared by all meshes (full-mesh order {:.3}; ideal 1.65)",
        r.slope_full.unwrap_or(f64::NAN)
    ))
}

fn figure_config(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        system: CONTROLLED_NAME.into(),
        alpha: 0.65,
        h: 0.01,
        steps: 500,
        x0: InitialState::EquilibriumPlusEpsilon(0.01),
        gains: Some(vec![1.2, 1.2, 0.5, 0.5, 0.0]),
        target: Some(EquilibriumFamily::E1 { m: 3f64.sqrt() / 4.0, n: 0.25 }),
        seed: 7,
        output_dir: dir.to_path_buf(),
        predictor_anchor: PredictorAnchor::WithX0,
    }
}

fn criterion_7() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|d| simulate(&figure_config(&tmp.path().join(d))).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let o = &runs[0];
    let d = o.distances.as_ref().ok_or("no target distances")?;
    let (first, last) = (d[0], d[d.len() - 1]);
    ensure(last < first, || format!("final {last:e} ≥ initial {first:e}"))?;
    ensure(o.decreasing_tail(100) == Some(true), || "distance not decreasing over the last 100 steps".into())?;
    ensure(last < 1e-2, || format!("final distance {last:e}"))?;
    let mut names: Vec<String> = (1..=5).map(|i| format!("fig{i}.svg")).collect();
    names.push("trajectory.csv".into());
    for name in &names {
        let a = fs::read(tmp.path().join("a").join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = fs::read(tmp.path().join("b").join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(a == b, || format!("{name} differs between identical runs"))?;
    }
    Ok(format!("distance {first:.4e} → {last:.4e}, 5 SVGs and CSV byte-identical across runs"))
}

fn criterion_8() -> Outcome {
    let x0 = vec![0.1, 0.2, 0.3, 0.1, 0.5];
    let cfg = SolverConfig::new(order(1.0), 1e-3, 1000, x0.clone()).map_err(|e| e.to_string())?;
    let traj = integrate(&system(), &cfg, false).map_err(|e| e.to_string())?;
    let (c1, c2) = (invariant_c1(&x0), invariant_c2(&x0));
    let (mut d1, mut d2): (f64, f64) = (0.0, 0.0);
    for x in traj.states() {
        d1 = d1.max((invariant_c1(x) - c1).abs());
        d2 = d2.max((invariant_c2(x) - c2).abs());
    }
    ensure(d1 <= 1e-4 && d2 <= 1e-4, || format!("drift C1 {d1:e}, C2 {d2:e}"))?;
    Ok(format!("max drift C1 {d1:.1e}, C2 {d2:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let delta = 1.0;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..10 {
        let c = MbState::new(std::array::from_fn(|_| rng.gen_range(-2.0..=2.0))).unwrap();
        let l = mb_lipschitz_bound(&c, delta).map_err(|e| e.to_string())?;
        for _ in 0..500 {
            let mut sample =
                || MbState::new(std::array::from_fn(|i| c.as_array()[i] + rng.gen_range(-delta..=delta))).unwrap();
            let (x, y) = (sample(), sample());
            ensure(in_lipschitz_domain(&c, delta, &x) && in_lipschitz_domain(&c, delta, &y), || {
                "sample outside the domain".into()
            })?;
            let (fx, fy) = (mb_field(&x), mb_field(&y));
            let df = (0..DIM).map(|i| (fx[i] - fy[i]).powi(2)).sum::<f64>().sqrt();
            let dx = (0..DIM).map(|i| (x.as_array()[i] - y.as_array()[i]).powi(2)).sum::<f64>().sqrt();
            if df > l * dx {
                violations += 1;
            }
            worst_ratio = worst_ratio.max(df / (l * dx));
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("5000 pairs, 0 violations, max |Δf|/(L|Δx|) = {worst_ratio:.3}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let k: Vec<f64> = (0..5).map(|_| rng.gen_range(1e-3..=2.0)).collect();
        let m = rng.gen_range(-2.0..=2.0);
        let gains = GainVector::new(k).unwrap();
        let closed = e2_gain_condition(&gains, m).map_err(|e| e.to_string())?.eigenvalues;
        let j = mb_controlled_jacobian(&MbState::new([0.0, 0.0, 0.0, 0.0, m]).unwrap(), &gains)
            .map_err(|e| e.to_string())?;
        let numeric = eigenvalues(&j).map_err(|e| e.to_string())?;
        let d = multiset_distance(&closed, &numeric).ok_or("eigenvalue count")?;
        ensure(d <= 1e-8, || format!("k = {:?}, m = {m}: mismatch {d:e}", gains.as_slice()))?;
        worst = worst.max(d);
    }
    Ok(format!("200 draws, max multiset distance {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("E2 example reproduction", criterion_1, Duration::from_secs(1)),
        ("E1 cubic example reproduction", criterion_2, Duration::from_secs(1)),
        ("uncontrolled instability sweep", criterion_3, Duration::from_secs(2)),
        ("matrix-form equivalence", criterion_4, Duration::from_secs(1)),
        ("ABM correctness at α = 1", criterion_5, Duration::from_secs(1)),
        ("fractional convergence order", criterion_6, Duration::from_secs(10)),
        ("controlled figure experiment", criterion_7, Duration::from_secs(5)),
        ("conservation at α = 1", criterion_8, Duration::from_secs(2)),
        ("Lipschitz bound", criterion_9, Duration::from_secs(1)),
        ("closed-form vs numeric E2 spectrum", criterion_10, Duration::from_secs(1)),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name} ({elapsed:.2?}): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
