//! Monte-Carlo cross-checker.
//!
//! Simulates the diffusion associated with the 1-d form (drift b = ½(σ' +
//! σφ'/φ), reflection at 0 on the half line) by Euler–Maruyama and estimates
//! empirical recurrence statistics. A finite-horizon simulation cannot verify
//! recurrence — every report is labeled corroboration, not verification.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::maybe_par_map;
use crate::problem::{DriftField, ProblemSpec};
use crate::verdict::{RecurrenceVerdict, VerdictKind};

/// Run parameters for one simulation ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub x0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Return events are "path enters [target.0, target.1]".
    pub target: (f64, f64),
    pub reflect: bool,
}

impl SimConfig {
    pub fn from_spec(spec: &ProblemSpec) -> Result<SimConfig> {
        let s = &spec.options.sim;
        let cfg = SimConfig {
            x0: s.x0,
            dt: s.dt,
            horizon: s.horizon,
            n_paths: s.n_paths,
            seed: spec.options.seed,
            target: s.target,
            reflect: spec.is_half_line(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) || self.dt > self.horizon / 100.0 {
            return Err(CoreError::Simulation(format!(
                "need 0 < dt <= horizon/100, got dt = {}, horizon = {}",
                self.dt, self.horizon
            )));
        }
        if self.n_paths < 100 {
            return Err(CoreError::Simulation(
                "need at least 100 paths for confidence intervals".into(),
            ));
        }
        if !(self.target.0 < self.target.1) {
            return Err(CoreError::Simulation("target interval is empty".into()));
        }
        Ok(())
    }
}

/// Outcome of one simulated path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub index: usize,
    /// First time the path enters the target (0 if it starts there).
    pub first_return: Option<f64>,
    /// Total time spent inside the target.
    pub occupation: f64,
    pub final_x: f64,
    pub min_x: f64,
    /// Non-finite state reached; excluded from estimates.
    pub aborted: bool,
    /// dt-halving guard hit its floor near a singularity; excluded.
    pub unresolved: bool,
}

const DT_FLOOR_HALVINGS: i32 = 10;

/// One Euler–Maruyama path with its own RNG stream:
/// X_{k+1} = X_k + b(X_k)·dt + √(σ(X_k)·dt)·N(0,1).
///
/// dt is halved while |b|·dt > 0.1·√(σ·dt) (drift-dominated step near a
/// singularity); a path that still violates the guard at dt/2^10 is marked
/// unresolved and dropped from estimates.
pub fn simulate_path(
    b: &(dyn Fn(f64) -> f64 + Sync),
    sigma: &(dyn Fn(f64) -> f64 + Sync),
    cfg: &SimConfig,
    index: usize,
) -> PathSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let dt_floor = cfg.dt * 0.5f64.powi(DT_FLOOR_HALVINGS);
    let in_target = |x: f64| x >= cfg.target.0 && x <= cfg.target.1;

    let mut x = cfg.x0;
    let mut t = 0.0;
    let mut occupation = 0.0;
    let mut min_x = x;
    let mut first_return = if in_target(x) { Some(0.0) } else { None };
    let mut aborted = false;
    let mut unresolved = false;

    while t < cfg.horizon {
        let bv = b(x);
        let sv = sigma(x);
        if !bv.is_finite() || !sv.is_finite() || sv < 0.0 {
            aborted = true;
            break;
        }
        let mut dt = cfg.dt.min(cfg.horizon - t);
        while bv.abs() * dt > 0.1 * (sv * dt).sqrt() && dt > dt_floor {
            dt *= 0.5;
        }
        if bv.abs() * dt > 0.1 * (sv * dt).sqrt() {
            unresolved = true;
            break;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        x += bv * dt + (sv * dt).sqrt() * z;
        if cfg.reflect {
            x = x.abs();
        }
        if !x.is_finite() {
            aborted = true;
            break;
        }
        t += dt;
        min_x = min_x.min(x);
        if in_target(x) {
            occupation += dt;
            if first_return.is_none() {
                first_return = Some(t);
            }
        }
    }
    PathSummary {
        index,
        first_return,
        occupation,
        final_x: x,
        min_x,
        aborted,
        unresolved,
    }
}

/// Simulate the whole ensemble; paths are independent work items and each
/// carries its own RNG stream, so the result is scheduling-independent.
pub fn run_ensemble(drift: &DriftField, cfg: &SimConfig) -> Result<Vec<PathSummary>> {
    cfg.validate()?;
    let (b, sigma) = drift.compile();
    Ok(maybe_par_map((0..cfg.n_paths).collect::<Vec<usize>>(), |i| {
        simulate_path(b.as_ref(), sigma.as_ref(), cfg, i)
    }))
}

/// Sequential variant (kept unconditionally for benchmarking against the
/// parallel path; results are identical).
pub fn run_ensemble_serial(drift: &DriftField, cfg: &SimConfig) -> Result<Vec<PathSummary>> {
    cfg.validate()?;
    let (b, sigma) = drift.compile();
    Ok((0..cfg.n_paths)
        .map(|i| simulate_path(b.as_ref(), sigma.as_ref(), cfg, i))
        .collect())
}

/// Empirical recurrence statistics over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceEstimate {
    /// Fraction of completed paths that entered the target before the horizon.
    pub return_probability: f64,
    /// Normal-approximation 95% confidence half-width.
    pub ci_halfwidth: f64,
    /// Mean time spent in the target per completed path.
    pub mean_occupation: f64,
    pub n_completed: usize,
    pub n_aborted: usize,
    pub n_unresolved: usize,
    pub excursion_note: String,
}

/// Summarize an already-simulated ensemble.
pub fn summarize(paths: &[PathSummary], cfg: &SimConfig) -> Result<RecurrenceEstimate> {
    let completed: Vec<&PathSummary> = paths
        .iter()
        .filter(|p| !p.aborted && !p.unresolved)
        .collect();
    let n_aborted = paths.iter().filter(|p| p.aborted).count();
    let n_unresolved = paths.iter().filter(|p| p.unresolved).count();
    if completed.is_empty() {
        return Err(CoreError::Simulation(
            "no path completed; estimates are undefined".into(),
        ));
    }
    let n = completed.len() as f64;
    let hits = completed.iter().filter(|p| p.first_return.is_some()).count() as f64;
    let p = hits / n;
    let ci = 1.96 * (p * (1.0 - p) / n).sqrt();
    let mean_occupation = completed.iter().map(|s| s.occupation).sum::<f64>() / n;
    Ok(RecurrenceEstimate {
        return_probability: p,
        ci_halfwidth: ci,
        mean_occupation,
        n_completed: completed.len(),
        n_aborted,
        n_unresolved,
        excursion_note: format!(
            "finite horizon T = {}: fraction of paths entering [{}, {}] from x0 = {}",
            cfg.horizon, cfg.target.0, cfg.target.1, cfg.x0
        ),
    })
}

/// Simulate and estimate the finite-horizon return fraction.
pub fn estimate_return(drift: &DriftField, cfg: &SimConfig) -> Result<RecurrenceEstimate> {
    let paths = run_ensemble(drift, cfg)?;
    summarize(&paths, cfg)
}

/// Agreement report between an analytic verdict and the empirical estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorroborationReport {
    pub verdict_kind: VerdictKind,
    pub estimate: RecurrenceEstimate,
    pub consistent: bool,
    pub summary: String,
    pub caveat: String,
}

/// High return fractions corroborate Recurrent; low fractions corroborate a
/// transience flag; Inconclusive verdicts are consistent with anything.
pub fn corroborate(
    verdict: &RecurrenceVerdict,
    drift: &DriftField,
    cfg: &SimConfig,
) -> Result<CorroborationReport> {
    let estimate = estimate_return(drift, cfg)?;
    let p = estimate.return_probability;
    let (consistent, summary) = match verdict.kind {
        VerdictKind::Recurrent => (
            p >= 0.5,
            format!("Recurrent verdict vs empirical return fraction {p:.3}"),
        ),
        VerdictKind::TransientByScale => (
            p <= 0.5,
            format!("TransientByScale flag vs empirical return fraction {p:.3}"),
        ),
        VerdictKind::Inconclusive => (
            true,
            format!("Inconclusive verdict; empirical return fraction {p:.3} recorded"),
        ),
    };
    Ok(CorroborationReport {
        verdict_kind: verdict.kind,
        estimate,
        consistent,
        summary,
        caveat: "finite-horizon simulation is corroboration, not verification; the analytic \
                 recurrence statement is an infinite-horizon limit"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::problem::{Domain, ProblemSpec};

    fn brownian_drift() -> DriftField {
        ProblemSpec::one_dim(Domain::Line, Expr::constant(1.0), Expr::constant(1.0))
            .drift_from_coefficients()
            .unwrap()
    }

    fn bessel_drift(delta: f64) -> DriftField {
        ProblemSpec::one_dim(
            Domain::HalfLine,
            Expr::constant(1.0),
            Expr::power_abs(0.0, delta - 1.0),
        )
        .drift_from_coefficients()
        .unwrap()
    }

    fn small_cfg() -> SimConfig {
        SimConfig {
            x0: 2.0,
            dt: 1e-3,
            horizon: 2.0,
            n_paths: 400,
            seed: 7,
            target: (-1.0, 1.0),
            reflect: false,
        }
    }

    #[test]
    fn determinism_and_serial_parallel_equality() {
        let drift = brownian_drift();
        let cfg = small_cfg();
        let a = run_ensemble(&drift, &cfg).unwrap();
        let b = run_ensemble(&drift, &cfg).unwrap();
        assert_eq!(a, b);
        let s = run_ensemble_serial(&drift, &cfg).unwrap();
        assert_eq!(a, s);
    }

    #[test]
    fn brownian_terminal_variance_matches_horizon() {
        let drift = brownian_drift();
        let cfg = SimConfig {
            x0: 0.0,
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 10_000,
            seed: 1,
            target: (-0.5, 0.5),
            reflect: false,
        };
        let paths = run_ensemble(&drift, &cfg).unwrap();
        let n = paths.len() as f64;
        let mean = paths.iter().map(|p| p.final_x).sum::<f64>() / n;
        let var = paths
            .iter()
            .map(|p| (p.final_x - mean) * (p.final_x - mean))
            .sum::<f64>()
            / n;
        assert!(
            (var - cfg.horizon).abs() <= 0.05 * cfg.horizon,
            "terminal variance {var} deviates from horizon {}",
            cfg.horizon
        );
    }

    #[test]
    fn reflection_preserves_nonnegativity() {
        let drift = bessel_drift(1.5);
        let cfg = SimConfig {
            x0: 1.0,
            dt: 1e-3,
            horizon: 2.0,
            n_paths: 200,
            seed: 3,
            target: (0.0, 0.5),
            reflect: true,
        };
        let paths = run_ensemble(&drift, &cfg).unwrap();
        for p in &paths {
            assert!(p.min_x >= 0.0, "path {} went negative", p.index);
        }
    }

    #[test]
    fn return_probability_monotone_in_horizon() {
        // with a shared seed the shorter run is a prefix of the longer one
        let drift = brownian_drift();
        let mut cfg = small_cfg();
        cfg.horizon = 1.0;
        let short = estimate_return(&drift, &cfg).unwrap();
        cfg.horizon = 4.0;
        let long = estimate_return(&drift, &cfg).unwrap();
        assert!(long.return_probability >= short.return_probability);
    }

    #[test]
    fn degenerate_target_containing_x0() {
        let drift = brownian_drift();
        let mut cfg = small_cfg();
        cfg.target = (1.0, 3.0); // contains x0 = 2
        let est = estimate_return(&drift, &cfg).unwrap();
        assert_eq!(est.return_probability, 1.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg();
        cfg.dt = 1.0; // > horizon/100
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.n_paths = 10;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.target = (1.0, 1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn corroboration_brownian() {
        let spec = ProblemSpec::one_dim(Domain::Line, Expr::constant(1.0), Expr::constant(1.0));
        let dec =
            crate::hamza::detect_hamza_set(&spec, spec.options.window, spec.options.tol).unwrap();
        let verdict = crate::recur1d::classify_line(&spec, &dec).unwrap();
        let drift = spec.drift_from_coefficients().unwrap();
        let mut cfg = small_cfg();
        cfg.horizon = 10.0;
        let report = corroborate(&verdict, &drift, &cfg).unwrap();
        assert!(report.consistent);
        assert!(report.caveat.contains("not verification"));
    }
}
