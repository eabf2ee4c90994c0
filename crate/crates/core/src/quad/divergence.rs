//! Divergence diagnosis for integral sequences.
//!
//! The recurrence criteria are stated as exact limits (`a_n → ∞`,
//! `b(..)/a_n → 0`); at finite `n_max` all we can do is fit the sampled
//! sequence against a small family of growth models and report the verdict
//! as numerical evidence. Every verdict carries the thresholds it used.

use serde::{Deserialize, Serialize};

use super::linfit;

/// Growth/decay model fitted to a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    /// a + b·log(n + shift)
    Logarithmic { alpha: f64, beta: f64, shift: f64 },
    /// a + b·(n + shift)^p
    Power {
        alpha: f64,
        beta: f64,
        p: f64,
        shift: f64,
    },
    /// constant over the tail of the sequence
    ConstantTail { alpha: f64 },
    /// a + b / log(n + 1)
    RecipLog { alpha: f64, beta: f64 },
    None,
}

impl FittedModel {
    /// Limit of the fitted model as n → ∞ (+∞/-∞ for growing models).
    pub fn limit(&self) -> f64 {
        match self {
            FittedModel::Logarithmic { beta, .. } => {
                if *beta > 0.0 {
                    f64::INFINITY
                } else if *beta < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            FittedModel::Power { alpha, beta, p, .. } => {
                if *p > 0.0 && *beta != 0.0 {
                    beta.signum() * f64::INFINITY
                } else {
                    *alpha
                }
            }
            FittedModel::ConstantTail { alpha } => *alpha,
            FittedModel::RecipLog { alpha, .. } => *alpha,
            FittedModel::None => f64::NAN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    DivergesToInfinity,
    Bounded,
    Undetermined,
}

/// Diagnosis of a sampled sequence, with the evidence that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceVerdict {
    pub kind: DivergenceKind,
    pub fitted_model: FittedModel,
    pub rel_residual: f64,
    /// Limit of the fitted model; `None` when it has no finite limit
    /// (diverging fits, or no fit at all).
    pub extrapolated_limit: Option<f64>,
    pub samples: Vec<(f64, f64)>,
    pub divergence_floor: f64,
    pub fit_tol: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FitOptions {
    /// A diverging verdict additionally requires the extrapolated limit of
    /// the fitted model to exceed this floor.
    pub divergence_floor: f64,
    /// Maximum relative residual for a fit to be trusted.
    pub fit_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            divergence_floor: 1e3,
            fit_tol: 1e-2,
        }
    }
}

struct Fit {
    model: FittedModel,
    rel_residual: f64,
}

fn rel_residual(resid_rss: f64, ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let rms_y = (ys.iter().map(|y| y * y).sum::<f64>() / n).sqrt();
    (resid_rss / n).sqrt() / rms_y.max(1e-300)
}

fn fit_against<FXs: Fn(f64) -> f64>(ns: &[f64], ys: &[f64], g: FXs) -> (f64, f64, f64) {
    let xs: Vec<f64> = ns.iter().map(|n| g(*n)).collect();
    let (b, a, _) = linfit(&xs, &ys.to_vec());
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (a + b * x);
            r * r
        })
        .sum();
    (a, b, rss)
}

fn candidate_fits(ns: &[f64], ys: &[f64]) -> Vec<Fit> {
    let mut fits = Vec::new();
    for shift in [0.0, 1.0] {
        if ns.iter().any(|n| n + shift <= 0.0) {
            continue;
        }
        let (a, b, rss) = fit_against(ns, ys, |n| (n + shift).ln());
        fits.push(Fit {
            model: FittedModel::Logarithmic {
                alpha: a,
                beta: b,
                shift,
            },
            rel_residual: rel_residual(rss, ys),
        });
    }
    let mut p: f64 = -3.0;
    while p <= 4.0 + 1e-9 {
        if p.abs() >= 0.025 {
            for shift in [0.0, 1.0] {
                let (a, b, rss) = fit_against(ns, ys, |n| (n + shift).powf(p));
                fits.push(Fit {
                    model: FittedModel::Power {
                        alpha: a,
                        beta: b,
                        p,
                        shift,
                    },
                    rel_residual: rel_residual(rss, ys),
                });
            }
        }
        p += 0.05;
    }
    // constant tail: judged on the second half of the sequence only
    let half = ys.len() / 2;
    let tail = &ys[half..];
    let alpha = tail.iter().sum::<f64>() / tail.len() as f64;
    let rss: f64 = tail.iter().map(|y| (y - alpha) * (y - alpha)).sum();
    fits.push(Fit {
        model: FittedModel::ConstantTail { alpha },
        rel_residual: rel_residual(rss, tail),
    });
    // reciprocal-log decay (used by the ratio conditions)
    let (a, b, rss) = fit_against(ns, ys, |n| 1.0 / (n + 1.0).ln().max(1e-12));
    fits.push(Fit {
        model: FittedModel::RecipLog { alpha: a, beta: b },
        rel_residual: rel_residual(rss, ys),
    });
    fits
}

/// Fit `a_n` samples against the model family and decide divergence.
pub fn divergence_diagnose(samples: &[(f64, f64)], opts: &FitOptions) -> DivergenceVerdict {
    let clean: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, a)| a.is_finite())
        .collect();
    if clean.len() < 8 {
        return DivergenceVerdict {
            kind: DivergenceKind::Undetermined,
            fitted_model: FittedModel::None,
            rel_residual: f64::MAX,
            extrapolated_limit: None,
            samples: samples.to_vec(),
            divergence_floor: opts.divergence_floor,
            fit_tol: opts.fit_tol,
        };
    }
    let ns: Vec<f64> = clean.iter().map(|(n, _)| *n).collect();
    let ys: Vec<f64> = clean.iter().map(|(_, a)| *a).collect();
    let fits = candidate_fits(&ns, &ys);
    let best = fits
        .into_iter()
        .min_by(|x, y| x.rel_residual.partial_cmp(&y.rel_residual).unwrap())
        .unwrap();

    let kind = if best.rel_residual > opts.fit_tol {
        DivergenceKind::Undetermined
    } else {
        match best.model {
            FittedModel::Logarithmic { beta, .. } if beta > 0.0 => {
                if best.model.limit() > opts.divergence_floor {
                    DivergenceKind::DivergesToInfinity
                } else {
                    DivergenceKind::Bounded
                }
            }
            FittedModel::Power { beta, p, .. } if beta > 0.0 && p > 0.0 => {
                if best.model.limit() > opts.divergence_floor {
                    DivergenceKind::DivergesToInfinity
                } else {
                    DivergenceKind::Bounded
                }
            }
            FittedModel::Power { .. }
            | FittedModel::ConstantTail { .. }
            | FittedModel::RecipLog { .. }
            | FittedModel::Logarithmic { .. } => DivergenceKind::Bounded,
            FittedModel::None => DivergenceKind::Undetermined,
        }
    };
    DivergenceVerdict {
        kind,
        rel_residual: best.rel_residual,
        extrapolated_limit: Some(best.model.limit()).filter(|l| l.is_finite()),
        fitted_model: best.model,
        samples: samples.to_vec(),
        divergence_floor: opts.divergence_floor,
        fit_tol: opts.fit_tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    DecaysToZero,
    Stalls,
    Grows,
    Undetermined,
}

/// Diagnosis of a ratio sequence `r_n` that a criterion requires to vanish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub kind: DecayKind,
    pub fitted_model: FittedModel,
    pub rel_residual: f64,
    /// Limit of the fitted model; `None` when it has no finite limit.
    pub extrapolated_limit: Option<f64>,
    pub samples: Vec<(f64, f64)>,
}

/// Decide whether `r_n → 0`, by the same fit machinery with the limit of the
/// best model compared against zero (at 5% of the sequence's peak).
pub fn decay_diagnose(samples: &[(f64, f64)], opts: &FitOptions) -> DecayVerdict {
    let clean: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, a)| a.is_finite())
        .collect();
    if clean.len() < 8 {
        return DecayVerdict {
            kind: DecayKind::Undetermined,
            fitted_model: FittedModel::None,
            rel_residual: f64::MAX,
            extrapolated_limit: None,
            samples: samples.to_vec(),
        };
    }
    let ns: Vec<f64> = clean.iter().map(|(n, _)| *n).collect();
    let ys: Vec<f64> = clean.iter().map(|(_, a)| *a).collect();
    let peak = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let fits = candidate_fits(&ns, &ys);
    let best = fits
        .into_iter()
        .min_by(|x, y| x.rel_residual.partial_cmp(&y.rel_residual).unwrap())
        .unwrap();
    let limit = best.model.limit();
    let kind = if best.rel_residual > opts.fit_tol {
        DecayKind::Undetermined
    } else if limit.is_infinite() && limit > 0.0 {
        DecayKind::Grows
    } else if limit.abs() <= 0.05 * peak.max(1e-300) {
        DecayKind::DecaysToZero
    } else {
        DecayKind::Stalls
    };
    DecayVerdict {
        kind,
        rel_residual: best.rel_residual,
        extrapolated_limit: Some(limit).filter(|l| l.is_finite()),
        fitted_model: best.model,
        samples: samples.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(f: impl Fn(f64) -> f64, n_max: usize) -> Vec<(f64, f64)> {
        (1..=n_max).map(|n| (n as f64, f(n as f64))).collect()
    }

    #[test]
    fn log_growth_diverges() {
        let v = divergence_diagnose(&seq(|n| n.ln(), 64), &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::DivergesToInfinity);
        assert!(matches!(v.fitted_model, FittedModel::Logarithmic { .. }));
    }

    #[test]
    fn linear_growth_diverges_with_unit_power() {
        let v = divergence_diagnose(&seq(|n| n, 64), &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::DivergesToInfinity);
        match v.fitted_model {
            FittedModel::Power { p, .. } => assert!((p - 1.0).abs() < 0.06, "p = {p}"),
            other => panic!("unexpected model {other:?}"),
        }
    }

    #[test]
    fn convergent_sequence_is_bounded() {
        let v = divergence_diagnose(&seq(|n| 1.0 - 1.0 / n, 64), &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::Bounded);
    }

    #[test]
    fn slow_root_decay_is_bounded() {
        // 2 - 2 (1+n)^{-1/2}, the Bessel delta = 2.5 shape
        let v = divergence_diagnose(
            &seq(|n| 2.0 - 2.0 / (1.0 + n).sqrt(), 64),
            &FitOptions::default(),
        );
        assert_eq!(v.kind, DivergenceKind::Bounded);
    }

    #[test]
    fn shifted_log_diverges() {
        let v = divergence_diagnose(&seq(|n| (1.0 + n).ln(), 64), &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::DivergesToInfinity);
    }

    #[test]
    fn erratic_samples_are_undetermined() {
        let samples: Vec<(f64, f64)> = (1..=32)
            .map(|n| (n as f64, if n % 2 == 0 { 10.0 } else { -3.0 * n as f64 }))
            .collect();
        let v = divergence_diagnose(&samples, &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::Undetermined);
    }

    #[test]
    fn too_few_samples_are_undetermined() {
        let v = divergence_diagnose(&seq(|n| n, 5), &FitOptions::default());
        assert_eq!(v.kind, DivergenceKind::Undetermined);
    }

    #[test]
    fn scale_equivariance_of_verdict() {
        for f in [|n: f64| n.ln(), |n: f64| n, |n: f64| 1.0 - 1.0 / n] as [fn(f64) -> f64; 3] {
            let base = divergence_diagnose(&seq(f, 64), &FitOptions::default());
            for k in [1e-3, 2.0, 1e3] {
                let scaled: Vec<(f64, f64)> =
                    seq(f, 64).into_iter().map(|(n, a)| (n, k * a)).collect();
                let v = divergence_diagnose(&scaled, &FitOptions::default());
                assert_eq!(v.kind, base.kind, "scale {k}");
            }
        }
    }

    #[test]
    fn ratio_reciprocal_log_decays() {
        let v = decay_diagnose(
            &seq(|n| 2.0 * std::f64::consts::PI / (1.0 + n).ln(), 64),
            &FitOptions::default(),
        );
        assert_eq!(v.kind, DecayKind::DecaysToZero);
    }

    #[test]
    fn growing_ratio_detected() {
        let v = decay_diagnose(&seq(|n| n * n / (1.0 + n).ln(), 64), &FitOptions::default());
        assert_eq!(v.kind, DecayKind::Grows);
    }

    #[test]
    fn stalling_ratio_detected() {
        let v = decay_diagnose(&seq(|n| 3.0 + 1.0 / n, 64), &FitOptions::default());
        assert_eq!(v.kind, DecayKind::Stalls);
    }
}
