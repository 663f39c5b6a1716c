use fracdyn_core::numkit::{mittag_leffler, Matrix};
use fracdyn_core::solver::{corrector_weight, integrate, predictor_weight, AbmStepper, SolverConfig};
use fracdyn_core::system::{constant_field, linear_decay, linear_field, FracOrder, SystemDef};
use proptest::prelude::*;

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn rotation_damped() -> SystemDef {
    linear_field(Matrix::from_rows([[-0.2, 1.0], [-1.0, -0.1]]))
}

// The α = 1 specialisation written out directly: the predictor sums every
// past slope, the corrector is the composite trapezoid over the history.
fn classical_reduction(sys: &SystemDef, x0: &[f64], h: f64, steps: usize) -> Vec<Vec<f64>> {
    let mut xs = vec![x0.to_vec()];
    let mut fs = vec![sys.eval(x0)];
    for _ in 0..steps {
        let d = x0.len();
        let xp: Vec<f64> = (0..d).map(|i| x0[i] + h * fs.iter().map(|f| f[i]).sum::<f64>()).collect();
        let fp = sys.eval(&xp);
        let x: Vec<f64> = (0..d)
            .map(|i| {
                let inner: f64 = fs[1..].iter().map(|f| f[i]).sum();
                x0[i] + h / 2.0 * (fs[0][i] + 2.0 * inner + fp[i])
            })
            .collect();
        fs.push(sys.eval(&x));
        xs.push(x);
    }
    xs
}

#[test]
fn alpha_one_equals_full_history_trapezoid() {
    let sys = rotation_damped();
    let x0 = [1.0, -0.5];
    let cfg = SolverConfig::new(order(1.0), 0.01, 400, x0.to_vec()).unwrap();
    let traj = integrate(&sys, &cfg, false).unwrap();
    let reference = classical_reduction(&sys, &x0, 0.01, 400);
    for (j, want) in reference.iter().enumerate() {
        for (a, b) in traj.state(j).iter().zip(want) {
            assert!((a - b).abs() <= 1e-12, "step {j}");
        }
    }
}

#[test]
fn alpha_one_first_step_is_heun_and_later_steps_stay_close() {
    let sys = rotation_damped();
    let x0 = vec![1.0, -0.5];
    let h = 0.01;
    let cfg = SolverConfig::new(order(1.0), h, 200, x0.clone()).unwrap();
    let traj = integrate(&sys, &cfg, false).unwrap();
    // one-step predictor-corrector (explicit Euler + trapezoid)
    let mut x = x0.clone();
    let mut worst: f64 = 0.0;
    for j in 1..=200 {
        let f = sys.eval(&x);
        let xp: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + h * b).collect();
        let fp = sys.eval(&xp);
        x = (0..2).map(|i| x[i] + h / 2.0 * (f[i] + fp[i])).collect();
        let dev = x.iter().zip(traj.state(j)).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if j == 1 {
            assert_eq!(traj.state(1), &x[..]);
        }
        worst = worst.max(dev);
    }
    // both are second-order accurate, so they differ by O(h²)
    assert!(worst < 10.0 * h * h, "max deviation {worst}");
}

#[test]
fn predictor_is_stored_per_step() {
    let sys = linear_decay(1.0);
    let cfg = SolverConfig::new(order(0.6), 0.05, 10, vec![1.0]).unwrap();
    let traj = integrate(&sys, &cfg, true).unwrap();
    let mut stepper = AbmStepper::new(&sys, &cfg, false).unwrap();
    for j in 1..=10 {
        let (xp, x) = stepper.step().unwrap();
        assert_eq!(traj.predictor_state(j).unwrap(), &xp[..]);
        assert_eq!(traj.state(j), &x[..]);
    }
}

#[test]
fn fractional_decay_tracks_mittag_leffler() {
    let a = 0.65;
    let cfg = SolverConfig::new(order(a), 0.005, 200, vec![1.0]).unwrap();
    let traj = integrate(&linear_decay(1.0), &cfg, false).unwrap();
    let exact = mittag_leffler(a, -1.0).unwrap();
    assert!((traj.final_state()[0] - exact).abs() < 1e-4);
}

proptest! {
    #[test]
    fn weights_are_positive(alpha in 0.01f64..=1.0, n in 0usize..300, frac in 0.0f64..1.0) {
        let j = ((n as f64) * frac) as usize;
        prop_assert!(predictor_weight(j, n, order(alpha)).unwrap() > 0.0);
        prop_assert!(corrector_weight(j, n, order(alpha)).unwrap() > 0.0);
    }

    #[test]
    fn predictor_weights_sum_to_power(alpha in 0.01f64..=1.0, n in 0usize..2000) {
        let s: f64 = (0..=n).map(|j| predictor_weight(j, n, order(alpha)).unwrap()).sum();
        let want = ((n + 1) as f64).powf(alpha);
        prop_assert!((s - want).abs() <= 1e-12 * want.max(1.0) * (n as f64 + 1.0).sqrt());
    }

    #[test]
    fn corrector_weights_sum_to_power(alpha in 0.01f64..=1.0, n in 0usize..500) {
        // product trapezoid integrates constants exactly: Σ a + 1 = (α+1)(n+1)^α
        let s: f64 = (0..=n).map(|j| corrector_weight(j, n, order(alpha)).unwrap()).sum::<f64>() + 1.0;
        let want = (alpha + 1.0) * ((n + 1) as f64).powf(alpha);
        prop_assert!((s - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn constant_fields_are_integrated_exactly(alpha in 0.05f64..=1.0, c in -3.0f64..3.0, x0 in -2.0f64..2.0) {
        let cfg = SolverConfig::new(order(alpha), 0.02, 50, vec![x0]).unwrap();
        let traj = integrate(&constant_field(vec![c]), &cfg, false).unwrap();
        let g = fracdyn_core::numkit::gamma(alpha + 1.0).unwrap();
        for (j, x) in traj.states().enumerate() {
            let want = x0 + c * traj.time(j).powf(alpha) / g;
            prop_assert!((x[0] - want).abs() < 1e-11);
        }
    }

    #[test]
    fn reruns_are_bitwise_identical(alpha in 0.1f64..=1.0, x0 in -1.0f64..1.0) {
        let cfg = SolverConfig::new(order(alpha), 0.05, 40, vec![x0, 0.3]).unwrap();
        let sys = rotation_damped();
        prop_assert_eq!(integrate(&sys, &cfg, true).unwrap(), integrate(&sys, &cfg, true).unwrap());
    }
}
