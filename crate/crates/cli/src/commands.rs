//! The work behind each subcommand, independent of argument parsing.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fracdyn_core::numkit::{eigenvalues, Complex64};
use fracdyn_core::solver::{convergence_order, integrate, ConvergenceReport, SolverConfig, SolverError, Trajectory};
use fracdyn_core::stability::{
    alpha_stability_bound, classify_equilibrium, cubic_from_gains, e2_deltas_exact, e2_gain_condition,
    matignon_classify, routh_hurwitz_cubic, EquilibriumReport, MatignonConfig, RhClass, Verdict,
};
use fracdyn_core::system::{EquilibriumPoint, FracOrder, GainVector, DEFAULT_EQUILIBRIUM_TOL};
use fracdyn_maxwell_bloch::{self as mb, EquilibriumFamily, MbState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Real};
use crate::output::{kv_document, orbit_svg, trajectory_csv};
use crate::registry::{self, target_point};
use crate::CliError;

/// Number of trajectory states sampled for the Jacobian consistency check.
const JACOBIAN_SAMPLES: usize = 8;

fn order(alpha: f64) -> Result<FracOrder, CliError> {
    FracOrder::new(alpha).map_err(|e| CliError::Config(e.to_string()))
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::NonFinite { step, time, stage } => CliError::Numerical { step, time, stage },
        other => CliError::Config(other.to_string()),
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub trajectory: Trajectory,
    /// ‖x[n] − x_e‖ for every n, when a target is set.
    pub distances: Option<Vec<f64>>,
    /// Largest relative analytic-vs-finite-difference Jacobian deviation over
    /// the sampled states.
    pub jacobian_check: f64,
    pub seed: u64,
    pub files: Vec<PathBuf>,
    pub report: Vec<(String, String)>,
}

impl SimulationOutcome {
    /// Whether the distance to the target decreases over the last `window` steps.
    pub fn decreasing_tail(&self, window: usize) -> Option<bool> {
        let d = self.distances.as_ref()?;
        let start = d.len().saturating_sub(window + 1);
        Some(d[start..].windows(2).all(|w| w[1] < w[0]))
    }
}

/// Integrates `cfg`, writes the CSV, one SVG per component and `report.kv`
/// into `cfg.output_dir`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulationOutcome, CliError> {
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let sys = registry::system_for(cfg)?;
    let x0 = registry::initial_state(cfg)?;
    let solver_cfg = SolverConfig::new(order(cfg.alpha)?, cfg.h, cfg.steps, x0.clone())
        .map_err(solver_error)?
        .with_anchor(cfg.predictor_anchor);
    let traj = integrate(&sys, &solver_cfg, false).map_err(solver_error)?;

    let target = cfg.target.as_ref().map(target_point).transpose()?;
    let distances = target.as_ref().map(|xe| traj.states().map(|x| distance(x, xe)).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jacobian_check = (0..JACOBIAN_SAMPLES)
        .map(|_| sys.jacobian_fd_error(traj.state(rng.gen_range(0..traj.len()))))
        .fold(0.0, f64::max);

    let mut report = vec![
        ("system".to_string(), sys.name().to_string()),
        ("alpha".into(), cfg.alpha.to_string()),
        ("h".into(), cfg.h.to_string()),
        ("steps".into(), cfg.steps.to_string()),
        ("predictor_anchor".into(), cfg.predictor_anchor.as_str().into()),
        ("seed".into(), cfg.seed.to_string()),
        ("x0".into(), join_e(&x0)),
        ("final_state".into(), join_e(traj.final_state())),
        ("jacobian_fd_max_error".into(), format!("{jacobian_check:e}")),
    ];
    if let (Some(xe), Some(d)) = (&target, &distances) {
        report.push(("target".into(), join_e(xe)));
        report.push(("initial_distance".into(), format!("{:e}", d[0])));
        report.push(("final_distance".into(), format!("{:e}", d[d.len() - 1])));
    }

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        files.push(path);
        Ok(())
    };
    put("trajectory.csv".into(), trajectory_csv(&traj))?;
    for i in 0..traj.dim() {
        put(format!("fig{}.svg", i + 1), orbit_svg(&traj.component(i), i + 1))?;
    }
    put("report.kv".into(), kv_document(&report))?;

    Ok(SimulationOutcome { trajectory: traj, distances, jacobian_check, seed: cfg.seed, files, report })
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn join_e(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

/// Runs independent configurations concurrently. Output directories must be
/// pairwise distinct.
pub fn sweep(cfgs: &[ExperimentConfig]) -> Result<Vec<Result<SimulationOutcome, CliError>>, CliError> {
    let mut seen = HashSet::new();
    for c in cfgs {
        if !seen.insert(c.output_dir.clone()) {
            return Err(CliError::Config(format!("output directory {} used twice", c.output_dir.display())));
        }
    }
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().map(|c| scope.spawn(move || simulate(c))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    }))
}

/// Where to evaluate stability.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSpec {
    Family(EquilibriumFamily),
    Explicit(Vec<f64>),
}

pub fn stability(
    system: &str,
    alpha: f64,
    point: &PointSpec,
    gains: Option<&[f64]>,
) -> Result<EquilibriumReport, CliError> {
    let alpha = order(alpha)?;
    let x = match point {
        PointSpec::Family(f) => target_point(f)?,
        PointSpec::Explicit(v) => v.clone(),
    };
    let sys = match (system, gains) {
        (mb::SYSTEM_NAME, Some(k)) | (mb::CONTROLLED_NAME, Some(k)) => {
            let family = match point {
                PointSpec::Family(f) => *f,
                PointSpec::Explicit(v) => mb::family_of(v)
                    .ok_or_else(|| CliError::Config(format!("{v:?} is not an equilibrium of {system}")))?,
            };
            registry::build_system(mb::CONTROLLED_NAME, Some(k), Some(&family), 5)?
        }
        (name, None) => registry::build_system(name, None, None, x.len())?,
        (name, Some(_)) => return Err(CliError::Config(format!("system `{name}` takes no gains"))),
    };
    let residual = sys.residual(&x).map_err(|e| CliError::Config(e.to_string()))?;
    if residual > DEFAULT_EQUILIBRIUM_TOL {
        return Err(CliError::Config(format!("point is not an equilibrium of {}: ‖f(x)‖∞ = {residual:e}", sys.name())));
    }
    classify_equilibrium(&sys, &EquilibriumPoint::from_exact(x), alpha, &MatignonConfig::default())
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Text and key-value forms of a gain diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct GainsOutcome {
    pub kv: Vec<(String, String)>,
    pub text: String,
    pub verdict: Verdict,
}

fn fmt_eig(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:e}", z.re)
    } else {
        format!("{:e}{:+e}i", z.re, z.im)
    }
}

fn alpha_range(eigs: &[Complex64]) -> String {
    match alpha_stability_bound(eigs, MatignonConfig::default().zero_tol) {
        None => "none".into(),
        Some(b) if b >= 1.0 => "(0, 1]".into(),
        Some(b) => format!("(0, {b:.12})"),
    }
}

fn labels(v: &[usize]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(|l| format!("C{l}")).collect::<Vec<_>>().join(",")
    }
}

/// Gain conditions at E₂ (family `E2 { m }`, five positive gains) or E₁
/// (discriminant test on the cubic factor), with the authoritative
/// argument-test verdict at `alpha`.
pub fn gains_check(
    gains: &[Real],
    target: &EquilibriumFamily,
    m_exact: Option<Real>,
    alpha: f64,
) -> Result<GainsOutcome, CliError> {
    let alpha = order(alpha)?;
    let kvals: Vec<f64> = gains.iter().map(|r| r.value).collect();
    if kvals.len() != 5 {
        return Err(CliError::Config(format!("expected 5 gains, got {}", kvals.len())));
    }
    let k = GainVector::new(kvals.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = MatignonConfig::default();
    let mut kv: Vec<(String, String)> = vec![("alpha".into(), alpha.to_string())];
    let mut text = String::new();

    let verdict = match *target {
        EquilibriumFamily::E2 { m } => {
            let r = e2_gain_condition(&k, m).map_err(|e| CliError::Config(e.to_string()))?;
            let exact = match (gains.iter().map(|g| g.exact).collect::<Option<Vec<_>>>(), m_exact.and_then(|r| r.exact))
            {
                (Some(q), Some(mq)) => Some(e2_deltas_exact(q[0], q[1], q[2], q[3], mq)),
                _ => None,
            };
            let j = mb::mb_controlled_jacobian(&MbState::new([0.0, 0.0, 0.0, 0.0, m]).expect("finite"), &k)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let rep = r.verdict(alpha, Some(&j)).map_err(|e| CliError::Config(e.to_string()))?;
            kv.push(("family".into(), "E2".into()));
            kv.push(("m".into(), m.to_string()));
            kv.push(("delta1".into(), format!("{:e}", r.delta1)));
            kv.push(("delta2".into(), format!("{:e}", r.delta2)));
            if let Some((d1, d2)) = exact {
                kv.push(("delta1.exact".into(), d1.to_string()));
                kv.push(("delta2.exact".into(), d2.to_string()));
            }
            kv.push(("u".into(), format!("{:e}", r.u + 0.0)));
            kv.push(("v".into(), format!("{:e}", r.v + 0.0)));
            kv.push(("conditions.listed".into(), labels(&r.listed_labels())));
            kv.push(("conditions.derived".into(), labels(&r.derived_labels())));
            kv.push(("conditions.labels_disagree".into(), r.labels_disagree().to_string()));
            for (i, z) in r.eigenvalues.iter().enumerate() {
                kv.push((format!("eig.{}", i + 1), fmt_eig(*z)));
            }
            kv.push(("alpha_range".into(), alpha_range(&r.eigenvalues)));

            let _ = writeln!(text, "target: e2 with m = {m}");
            match exact {
                Some((d1, d2)) => {
                    let _ = writeln!(text, "Δ1 = {d1} ({:e})", r.delta1);
                    let _ = writeln!(text, "Δ2 = {d2} ({:e})", r.delta2);
                }
                None => {
                    let _ = writeln!(text, "Δ1 = {:e}", r.delta1);
                    let _ = writeln!(text, "Δ2 = {:e}", r.delta2);
                }
            }
            let _ = writeln!(text, "u = {:e}, v = {:e}", r.u + 0.0, r.v + 0.0);
            let _ = writeln!(text, "conditions holding (listed order): {}", labels(&r.listed_labels()));
            let _ = writeln!(text, "conditions holding (derivation order): {}", labels(&r.derived_labels()));
            if r.labels_disagree() {
                let _ = writeln!(text, "note: the two numberings label this case differently (C3 and C4 swap)");
            }
            let _ = writeln!(text, "closed-form eigenvalues:");
            for z in &r.eigenvalues {
                let _ = writeln!(text, "  {}", fmt_eig(*z));
            }
            let _ = writeln!(text, "stable for α in {}", alpha_range(&r.eigenvalues));
            rep.verdict
        }
        EquilibriumFamily::E1 { m, n } => {
            let c =
                cubic_from_gains(kvals[2], kvals[3], kvals[4], m, n).map_err(|e| CliError::Config(e.to_string()))?;
            let rh = routh_hurwitz_cubic(&c, alpha);
            let x_e = MbState::new([m, n, 0.0, 0.0, 0.0]).expect("finite");
            let j = mb::mb_controlled_jacobian(&x_e, &k).map_err(|e| CliError::Config(e.to_string()))?;
            let eigs = eigenvalues(&j).map_err(|e| CliError::Config(e.to_string()))?;
            let rep = matignon_classify(&eigs, alpha, Some(&j), &cfg).map_err(|e| CliError::Config(e.to_string()))?;
            kv.push(("family".into(), "E1".into()));
            kv.push(("m".into(), m.to_string()));
            kv.push(("n".into(), n.to_string()));
            kv.push(("a1".into(), c.a1.to_string()));
            kv.push(("a2".into(), c.a2.to_string()));
            kv.push(("a3".into(), c.a3.to_string()));
            kv.push(("discriminant".into(), c.discriminant.to_string()));
            let (class, range) = match &rh {
                Ok(o) => (o.class.to_string(), o.class.alpha_range().to_string()),
                Err(e) => (format!("precondition failed: {e}"), RhClass::NotDecided.alpha_range().to_string()),
            };
            kv.push(("routh_hurwitz".into(), class.clone()));
            kv.push(("routh_hurwitz.alpha_range".into(), range.clone()));
            for (i, z) in eigs.iter().enumerate() {
                kv.push((format!("eig.{}", i + 1), fmt_eig(*z)));
            }
            kv.push(("alpha_range".into(), alpha_range(&eigs)));

            let _ = writeln!(text, "target: e1 with m = {m}, n = {n}");
            let _ = writeln!(text, "a1 = {}, a2 = {}, a3 = {}", c.a1, c.a2, c.a3);
            let _ = writeln!(text, "D(P) = {}", c.discriminant);
            let _ = writeln!(text, "Routh-Hurwitz: {class}, stable for α in {range}");
            let _ = writeln!(text, "Jacobian eigenvalues:");
            for z in &eigs {
                let _ = writeln!(text, "  {}", fmt_eig(*z));
            }
            let _ = writeln!(text, "argument test: stable for α in {}", alpha_range(&eigs));
            rep.verdict
        }
    };
    kv.push(("verdict".into(), verdict.to_string()));
    let _ = writeln!(text, "verdict at α = {alpha}: {verdict}");
    Ok(GainsOutcome { kv, text, verdict })
}

/// Empirical order against the exact solution of `system` on [0, tau].
pub fn convergence(system: &str, alpha: f64, x0: &[f64], tau: f64, hs: &[f64]) -> Result<ConvergenceReport, CliError> {
    let alpha_o = order(alpha)?;
    let sys = registry::build_system(system, None, None, x0.len())?;
    if sys.dim() != x0.len() {
        return Err(CliError::Config(format!("x0 must have {} components", sys.dim())));
    }
    let exact = registry::oracle(system, alpha, x0)?;
    convergence_order(&sys, alpha_o, x0, tau, &*exact, hs).map_err(solver_error)
}

pub fn convergence_kv(r: &ConvergenceReport) -> Vec<(String, String)> {
    let mut kv = vec![("rows".to_string(), r.rows.len().to_string())];
    for (i, row) in r.rows.iter().enumerate() {
        kv.push((format!("row.{}.h", i + 1), row.h.to_string()));
        kv.push((format!("row.{}.max_error", i + 1), format!("{:e}", row.max_error)));
        kv.push((format!("row.{}.max_error_full", i + 1), format!("{:e}", row.max_error_full)));
    }
    if let Some(s) = r.slope {
        kv.push(("slope".into(), s.to_string()));
    }
    if let Some(s) = r.residual {
        kv.push(("fit_residual".into(), format!("{s:e}")));
    }
    if let Some(s) = r.slope_full {
        kv.push(("slope_full_mesh".into(), s.to_string()));
    }
    kv
}

pub fn convergence_text(r: &ConvergenceReport) -> String {
    let mut s = String::from("h            max error (shared nodes)  max error (full mesh)\n");
    for row in &r.rows {
        let _ = writeln!(s, "{:<12} {:<25.6e} {:.6e}", row.h, row.max_error, row.max_error_full);
    }
    match r.slope {
        Some(slope) => {
            let _ = writeln!(s, "fitted order: {slope:.4} (rms residual {:.2e})", r.residual.unwrap_or(0.0));
            if let Some(full) = r.slope_full {
                let _ = writeln!(s, "full-mesh order: {full:.4}");
            }
        }
        None => s.push_str("fitted order: not available (needs at least two step sizes)\n"),
    }
    s
}
