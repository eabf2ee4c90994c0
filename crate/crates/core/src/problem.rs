//! Problem specifications: state space, coefficients, and run options.
//!
//! A spec is read from a versioned JSON file; expression trees use the
//! catalog in [`crate::expr`]. See the README for the documented schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::expr::{Expr, MultiExpr, SingularSupport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The full line ℝ.
    Line,
    /// The half line [0, ∞) with reflection at 0.
    HalfLine,
    /// ℝ^d, d ≥ 2.
    Euclidean { dim: usize },
}

/// Monte-Carlo run parameters (used by the simulator commands).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub x0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub target: (f64, f64),
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            x0: 2.0,
            dt: 1e-3,
            horizon: 100.0,
            n_paths: 10_000,
            target: (-1.0, 1.0),
        }
    }
}

/// Tolerances and search parameters. All thresholds that a verdict depends
/// on live here and are echoed into reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub n_max: u32,
    pub tol: f64,
    pub window: (f64, f64),
    pub divergence_floor: f64,
    pub fit_tol: f64,
    pub enable_scale_probe: bool,
    pub seed: u64,
    pub sim: SimOptions,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            n_max: 64,
            tol: 1e-8,
            window: (-16.0, 16.0),
            divergence_floor: 1e3,
            fit_tol: 1e-2,
            enable_scale_probe: false,
            seed: 0,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeInput {
    /// Radial bound ϕ with ‖A(x)‖φ(x) ≤ ϕ(|x|) outside the ball of radius rho.
    pub phi_bound: Expr,
    pub rho: f64,
}

/// A full problem specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub version: u32,
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<Expr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<Expr>,
    /// Density on ℝ^d (multidimensional specs only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi_nd: Option<MultiExpr>,
    /// Symmetric coefficient matrix, entries as functions of |x|.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<Vec<Vec<Expr>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope: Option<EnvelopeInput>,
    #[serde(default)]
    pub options: Options,
}

impl ProblemSpec {
    pub fn one_dim(domain: Domain, sigma: Expr, phi: Expr) -> ProblemSpec {
        ProblemSpec {
            version: 1,
            domain,
            sigma: Some(sigma),
            phi: Some(phi),
            phi_nd: None,
            matrix: None,
            envelope: None,
            options: Options::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(CoreError::Spec(format!(
                "unsupported spec version {}",
                self.version
            )));
        }
        match self.domain {
            Domain::Line | Domain::HalfLine => {
                if self.sigma.is_none() || self.phi.is_none() {
                    return Err(CoreError::Spec(
                        "one-dimensional specs require both sigma and phi".into(),
                    ));
                }
                if self.phi_nd.is_some() || self.matrix.is_some() {
                    return Err(CoreError::Spec(
                        "phi_nd/matrix are only valid for euclidean specs".into(),
                    ));
                }
            }
            Domain::Euclidean { dim } => {
                if dim < 2 {
                    return Err(CoreError::Spec("euclidean dimension must be >= 2".into()));
                }
                if self.phi_nd.is_none() {
                    return Err(CoreError::Spec("euclidean specs require phi_nd".into()));
                }
                if self.matrix.is_none() && self.envelope.is_none() {
                    return Err(CoreError::Spec(
                        "euclidean specs require a coefficient matrix or an envelope".into(),
                    ));
                }
                if let Some(m) = &self.matrix {
                    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                        return Err(CoreError::Spec(format!(
                            "matrix must be {dim}x{dim} for dimension {dim}"
                        )));
                    }
                    for i in 0..dim {
                        for j in (i + 1)..dim {
                            if m[i][j] != m[j][i] {
                                return Err(CoreError::Spec(format!(
                                    "matrix entries a[{i}][{j}] and a[{j}][{i}] differ; the \
                                     matrix must be symmetric"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The 1-d weight σφ.
    pub fn weight(&self) -> Result<Expr> {
        match (&self.sigma, &self.phi) {
            (Some(s), Some(p)) => Ok(Expr::product(vec![s.clone(), p.clone()])),
            _ => Err(CoreError::Spec(
                "weight requires a one-dimensional spec".into(),
            )),
        }
    }

    pub fn is_half_line(&self) -> bool {
        self.domain == Domain::HalfLine
    }

    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| CoreError::Spec(format!("parse error: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    /// Drift and diffusion coefficient of the associated diffusion,
    /// b = ½(σ' + σ φ'/φ).
    pub fn drift_from_coefficients(&self) -> Result<DriftField> {
        let sigma = self
            .sigma
            .clone()
            .ok_or_else(|| CoreError::Spec("drift requires a one-dimensional spec".into()))?;
        let phi = self.phi.clone().unwrap();
        let singular = Expr::product(vec![sigma.clone(), phi.clone()]).singular_support();
        let drift = match (sigma.derivative(), phi.derivative()) {
            (Some(ds), Some(dp)) => DriftEval::Analytic(Expr::product(vec![
                Expr::constant(0.5),
                Expr::sum(vec![
                    ds,
                    Expr::product(vec![sigma.clone(), dp, phi.clone().recip()]),
                ]),
            ])),
            _ => DriftEval::Numeric {
                sigma: sigma.clone(),
                phi: phi.clone(),
            },
        };
        Ok(DriftField {
            drift,
            sigma,
            singular,
        })
    }
}

/// How the drift is evaluated.
#[derive(Clone, Debug)]
pub enum DriftEval {
    Analytic(Expr),
    /// Central differences on σ and φ (tabulated or lattice coefficients).
    Numeric { sigma: Expr, phi: Expr },
}

/// Drift b(x) and diffusion coefficient σ(x) for the simulator.
#[derive(Clone, Debug)]
pub struct DriftField {
    pub drift: DriftEval,
    pub sigma: Expr,
    pub singular: SingularSupport,
}

impl DriftField {
    pub fn requires_derivatives(&self) -> bool {
        matches!(self.drift, DriftEval::Numeric { .. })
    }

    pub fn drift_raw(&self, x: f64) -> f64 {
        match &self.drift {
            DriftEval::Analytic(e) => e.eval_raw(x),
            DriftEval::Numeric { sigma, phi } => numeric_drift(sigma, phi, x),
        }
    }

    /// Checked evaluation; evaluation at a declared singular point is an
    /// error carrying the point.
    pub fn drift_at(&self, x: f64) -> Result<f64> {
        if self.singular.near(x, 1e-12 * (1.0 + x.abs())) {
            return Err(CoreError::Numerical(format!(
                "drift evaluated at singular point x = {x}"
            )));
        }
        let v = self.drift_raw(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CoreError::UndeclaredNonFinite { x })
        }
    }

    /// Compile (b, σ) into closures for the simulation hot loop.
    pub fn compile(
        &self,
    ) -> (
        Box<dyn Fn(f64) -> f64 + Send + Sync>,
        Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ) {
        let b: Box<dyn Fn(f64) -> f64 + Send + Sync> = match &self.drift {
            DriftEval::Analytic(e) => e.compile(),
            DriftEval::Numeric { sigma, phi } => {
                let s = sigma.clone();
                let p = phi.clone();
                Box::new(move |x| numeric_drift(&s, &p, x))
            }
        };
        (b, self.sigma.compile())
    }
}

fn numeric_drift(sigma: &Expr, phi: &Expr, x: f64) -> f64 {
    let h = 1e-6 * (1.0 + x.abs());
    let ds = (sigma.eval_raw(x + h) - sigma.eval_raw(x - h)) / (2.0 * h);
    let dp = (phi.eval_raw(x + h) - phi.eval_raw(x - h)) / (2.0 * h);
    0.5 * (ds + sigma.eval_raw(x) * dp / phi.eval_raw(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bessel_drift_closed_form() {
        // sigma = 1, phi = x^{delta-1} on (0, inf): b(x) = (delta-1)/(2x)
        let delta = 3.0;
        let spec = ProblemSpec::one_dim(
            Domain::HalfLine,
            Expr::constant(1.0),
            Expr::power_abs(0.0, delta - 1.0),
        );
        let d = spec.drift_from_coefficients().unwrap();
        assert!(!d.requires_derivatives());
        for &x in &[0.5, 1.0, 2.0, 7.5] {
            assert_relative_eq!(
                d.drift_at(x).unwrap(),
                (delta - 1.0) / (2.0 * x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn constant_coefficients_give_zero_drift() {
        let spec = ProblemSpec::one_dim(Domain::Line, Expr::constant(1.0), Expr::constant(1.0));
        let d = spec.drift_from_coefficients().unwrap();
        assert_eq!(d.drift_at(0.3).unwrap(), 0.0);
    }

    #[test]
    fn exponential_sigma_drift() {
        // sigma = e^x, phi = 1: b = sigma'/2 = e^x/2
        let spec = ProblemSpec::one_dim(
            Domain::Line,
            Expr::Exp {
                inner: Box::new(Expr::Polynomial {
                    coeffs: vec![0.0, 1.0],
                }),
            },
            Expr::constant(1.0),
        );
        let d = spec.drift_from_coefficients().unwrap();
        assert_relative_eq!(d.drift_at(1.0).unwrap(), 1.0f64.exp() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn analytic_drift_matches_central_difference() {
        // smooth catalog coefficients: agreement to O(h^2)
        let spec = ProblemSpec::one_dim(
            Domain::Line,
            Expr::Polynomial {
                coeffs: vec![1.0, 0.0, 1.0],
            },
            Expr::Exp {
                inner: Box::new(Expr::Polynomial {
                    coeffs: vec![0.0, 0.5],
                }),
            },
        );
        let d = spec.drift_from_coefficients().unwrap();
        let sigma = spec.sigma.clone().unwrap();
        let phi = spec.phi.clone().unwrap();
        for &x in &[-1.0, 0.2, 1.7] {
            let numeric = numeric_drift(&sigma, &phi, x);
            assert_relative_eq!(d.drift_at(x).unwrap(), numeric, max_relative = 1e-8);
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let spec = ProblemSpec {
            version: 1,
            domain: Domain::Euclidean { dim: 2 },
            sigma: None,
            phi: None,
            phi_nd: Some(MultiExpr::Constant { value: 1.0 }),
            matrix: Some(vec![
                vec![Expr::constant(1.0), Expr::constant(2.0)],
                vec![Expr::constant(3.0), Expr::constant(1.0)],
            ]),
            envelope: None,
            options: Options::default(),
        };
        assert!(matches!(spec.validate(), Err(CoreError::Spec(_))));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ProblemSpec::one_dim(
            Domain::HalfLine,
            Expr::constant(1.0),
            Expr::power_abs(0.0, 1.0),
        );
        let text = spec.to_json_pretty();
        let back = ProblemSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn missing_coefficients_rejected() {
        let text = r#"{"version":1,"domain":{"kind":"line"}}"#;
        assert!(ProblemSpec::from_json(text).is_err());
    }
}
