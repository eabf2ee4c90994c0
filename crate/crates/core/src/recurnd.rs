//! Multidimensional recurrence criteria.
//!
//! Two sufficient criteria on ℝ^d, d ≥ 2. The radial criterion reduces the
//! form to the surface mass ψ(r) = ∫_{∂B_r} φ dS, reuses the half-line case
//! machinery on 1/ψ, and additionally requires the ellipticity envelope b(r)
//! to grow slower than the scale integrals: b(r_n)/a_n → 0. The envelope
//! criterion replaces ψ by a radial bound ϕ with ‖A(x)‖φ(x) ≤ ϕ(|x|) outside
//! a compact set and needs only a_n = d·vol_d(B_1)·∫_ρ^n s^{1-d}/ϕ(s) ds → ∞.

use crate::error::{CoreError, Result};
use crate::expr::{Expr, MultiExpr};
use crate::hamza::{detect_hamza_weight, IntervalDecomposition};
use crate::problem::{Domain, ProblemSpec};
use crate::quad::divergence::{
    decay_diagnose, divergence_diagnose, DecayKind, DivergenceKind, FitOptions,
};
use crate::quad::{integrate, integrate_with_breaks, EndpointFlags};
use crate::recur1d::{halfline_sequence_with_radii, SeqSample};
use crate::verdict::{
    standard_assumptions, EnergyPoint, RatioEvidence, RecurrenceVerdict, SequenceEvidence,
    VerdictKind,
};

/// Volume of the unit ball in ℝ^d (vol_0 = 1, vol_1 = 2, vol_d = vol_{d-2}·2π/d).
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Surface area of the unit sphere in ℝ^d: d·vol_d(B_1).
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

const THETA_PANELS_MAX: usize = 1 << 14;

/// Trapezoid rule on the periodic circle with panel doubling.
fn periodic_trapezoid(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n = 64;
    let mut prev = f64::NAN;
    while n <= THETA_PANELS_MAX {
        let mut s = 0.0;
        for i in 0..n {
            let v = f(two_pi * i as f64 / n as f64);
            if !v.is_finite() {
                return Err(CoreError::Quadrature(format!(
                    "non-finite surface integrand at angle index {i}/{n}"
                )));
            }
            s += v;
        }
        let value = s * two_pi / n as f64;
        if prev.is_finite() && (value - prev).abs() <= tol * value.abs().max(1.0) {
            return Ok(value);
        }
        prev = value;
        n *= 2;
    }
    Ok(prev)
}

/// Surface mass ψ(r) = ∫_{∂B_r} φ dS.
///
/// Radial φ reduces to φ(r)·d·vol_d(B_1)·r^{d-1}; otherwise the sphere
/// integral is computed directly (trapezoid on the circle for d = 2, the
/// area-preserving cylinder projection for d = 3).
pub fn surface_mass(phi: &MultiExpr, dim: usize, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0) || dim < 2 {
        return Err(CoreError::Spec(format!(
            "surface mass needs r > 0 and d >= 2, got r = {r}, d = {dim}"
        )));
    }
    if let Some(profile) = phi.radial_profile() {
        return Ok(profile.eval_raw(r) * unit_sphere_area(dim) * r.powi(dim as i32 - 1));
    }
    match dim {
        2 => {
            let line = periodic_trapezoid(|t| phi.eval(&[r * t.cos(), r * t.sin()]), tol)?;
            Ok(r * line)
        }
        3 => {
            // dS = r² dz dθ on the cylinder (z, θ) ∈ [-1,1] × [0,2π)
            let line = periodic_trapezoid(
                |t| {
                    integrate(
                        |z: f64| {
                            let rho = (1.0 - z * z).max(0.0).sqrt();
                            phi.eval(&[r * rho * t.cos(), r * rho * t.sin(), r * z])
                        },
                        -1.0,
                        1.0,
                        tol,
                        EndpointFlags::none(),
                    )
                    .map(|ir| ir.value)
                    .unwrap_or(f64::NAN)
                },
                tol,
            )?;
            Ok(r * r * line)
        }
        _ => Err(CoreError::Spec(
            "surface integrals for non-radial densities are only supported for d in {2, 3}".into(),
        )),
    }
}

const JACOBI_SWEEPS: usize = 64;

/// Largest eigenvalue of a (symmetrized) matrix by cyclic Jacobi rotations.
pub fn max_eigenvalue_sym(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(CoreError::Numerical("matrix must be square".into()));
    }
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect();
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CoreError::Numerical(
            "non-finite matrix entry in eigenvalue computation".into(),
        ));
    }
    let scale: f64 = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p][q] * m[p][q])
            .sum();
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][i]).fold(f64::NEG_INFINITY, f64::max))
}

/// Sampled ellipticity envelope b(r): the running maximum over the grid of
/// the largest eigenvalue of A (entries are functions of |x|), so b is
/// nondecreasing by construction.
pub fn ellipticity_envelope(matrix: &[Vec<Expr>], r_grid: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(r_grid.len());
    let mut running = f64::NEG_INFINITY;
    for &r in r_grid {
        let vals: Vec<Vec<f64>> = matrix
            .iter()
            .map(|row| row.iter().map(|e| e.eval_raw(r)).collect())
            .collect();
        running = running.max(max_eigenvalue_sym(&vals)?);
        out.push(running);
    }
    Ok(out)
}

/// The radial reduction of a euclidean spec: surface mass, its Hamza-type
/// decomposition on [0, ∞), and the coefficient matrix for the envelope.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub dim: usize,
    pub psi: Expr,
    pub dec: IntervalDecomposition,
    pub matrix: Vec<Vec<Expr>>,
    pub notes: Vec<String>,
}

const PSI_TABLE_POINTS: usize = 512;
const ENVELOPE_GRID_POINTS: usize = 2048;

impl RadialProfile {
    pub fn from_spec(spec: &ProblemSpec) -> Result<RadialProfile> {
        spec.validate()?;
        let dim = match spec.domain {
            Domain::Euclidean { dim } => dim,
            _ => return Err(CoreError::Spec("radial reduction needs a euclidean spec".into())),
        };
        let phi = spec
            .phi_nd
            .as_ref()
            .ok_or_else(|| CoreError::Spec("radial reduction needs phi_nd".into()))?;
        let matrix = spec
            .matrix
            .clone()
            .ok_or_else(|| CoreError::Spec("radial criterion needs the coefficient matrix".into()))?;
        let win_hi = spec.options.window.1.abs().max(1.0);
        let mut notes = Vec::new();
        let psi = match phi.radial_profile() {
            Some(profile) => Expr::product(vec![
                profile,
                Expr::constant(unit_sphere_area(dim)),
                Expr::power_abs(0.0, dim as f64 - 1.0),
            ]),
            None => {
                // tabulate ψ by direct sphere quadrature
                let mut xs = Vec::with_capacity(PSI_TABLE_POINTS);
                let mut ys = Vec::with_capacity(PSI_TABLE_POINTS);
                for i in 1..=PSI_TABLE_POINTS {
                    let r = win_hi * i as f64 / PSI_TABLE_POINTS as f64;
                    xs.push(r);
                    ys.push(surface_mass(phi, dim, r, spec.options.tol)?);
                }
                notes.push(format!(
                    "surface mass tabulated numerically at {PSI_TABLE_POINTS} radii"
                ));
                Expr::Tabulated { xs, ys }
            }
        };
        let dec = detect_hamza_weight(&psi, true, (0.0, win_hi), spec.options.tol)?;
        Ok(RadialProfile {
            dim,
            psi,
            dec,
            matrix,
            notes,
        })
    }
}

/// b(r) looked up from an envelope sampled on a uniform grid up to r_max.
fn envelope_at(env: &[f64], r_max: f64, r: f64) -> f64 {
    let idx = ((r / r_max) * (env.len() - 1) as f64).ceil() as usize;
    env[idx.min(env.len() - 1)]
}

/// Apply the radial criterion: a_n = ∫ 1/ψ over the tagged half-line case's
/// ranges must diverge AND b(r_n)/a_n must vanish.
pub fn classify_radial(spec: &ProblemSpec) -> Result<RecurrenceVerdict> {
    let profile = RadialProfile::from_spec(spec)?;
    let opts = &spec.options;
    let (samples, radii) =
        halfline_sequence_with_radii(&profile.psi, &profile.dec, opts.n_max, opts.tol)?;

    let fit = FitOptions {
        divergence_floor: opts.divergence_floor,
        fit_tol: opts.fit_tol,
    };
    let a_pairs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.reliable)
        .map(|s| (s.n as f64, s.value))
        .collect();
    let a_ev = SequenceEvidence {
        label: "a_n".into(),
        diagnosis: divergence_diagnose(&a_pairs, &fit),
    };

    let r_max = radii.iter().cloned().fold(1.0f64, f64::max);
    let grid: Vec<f64> = (1..=ENVELOPE_GRID_POINTS)
        .map(|i| r_max * i as f64 / ENVELOPE_GRID_POINTS as f64)
        .collect();
    let env = ellipticity_envelope(&profile.matrix, &grid)?;

    let mut ratio_pairs = Vec::new();
    let mut energy_trace = Vec::new();
    for (s, &r) in samples.iter().zip(&radii) {
        if !s.reliable || s.value <= 0.0 {
            continue;
        }
        let b = envelope_at(&env, r_max, r);
        ratio_pairs.push((s.n as f64, b / s.value));
        energy_trace.push(EnergyPoint {
            n: s.n,
            energy: b / s.value,
        });
    }
    let ratio_ev = RatioEvidence {
        label: "b(r_n)/a_n".into(),
        diagnosis: decay_diagnose(&ratio_pairs, &fit),
    };

    let kind = if a_ev.diagnosis.kind == DivergenceKind::DivergesToInfinity
        && ratio_ev.diagnosis.kind == DecayKind::DecaysToZero
    {
        VerdictKind::Recurrent
    } else {
        VerdictKind::Inconclusive
    };
    let mut notes = profile.notes.clone();
    notes.push("ellipticity envelope is a sampled maximum, not a proven supremum".into());

    Ok(RecurrenceVerdict {
        kind,
        case_tag: Some(profile.dec.case_tag),
        sequences: vec![a_ev],
        ratios: vec![ratio_ev],
        energy_trace,
        assumptions: standard_assumptions(opts.n_max),
        notes,
        n_max: opts.n_max,
    })
}

/// Apply the envelope criterion: with ‖A(x)‖φ(x) ≤ ϕ(|x|) outside B_ρ,
/// recurrence follows from a_n = d·vol_d(B_1)·∫_ρ^n s^{1-d}/ϕ(s) ds → ∞.
pub fn classify_envelope(spec: &ProblemSpec) -> Result<RecurrenceVerdict> {
    spec.validate()?;
    let dim = match spec.domain {
        Domain::Euclidean { dim } => dim,
        _ => return Err(CoreError::Spec("envelope criterion needs a euclidean spec".into())),
    };
    let env = spec
        .envelope
        .as_ref()
        .ok_or_else(|| CoreError::Spec("envelope criterion needs an envelope input".into()))?;
    if !(env.rho > 0.0) {
        return Err(CoreError::Spec("envelope radius rho must be positive".into()));
    }
    let opts = &spec.options;
    let c_d = unit_sphere_area(dim);
    let phi_bound = &env.phi_bound;
    phi_bound.audit_positivity(env.rho, env.rho + opts.n_max as f64, 2048)?;
    let breaks = phi_bound.singular_support();
    let integrand = |s: f64| s.powi(1 - dim as i32) / phi_bound.eval_raw(s);

    // incremental panels [max(rho, n-1), n] accumulated into a_n
    let mut samples: Vec<SeqSample> = Vec::new();
    let mut acc = 0.0;
    let mut ok = true;
    let mut all_finite = true;
    for n in 1..=opts.n_max {
        let hi = n as f64;
        if hi <= env.rho {
            continue;
        }
        let lo = env.rho.max(hi - 1.0);
        let r = integrate_with_breaks(
            integrand,
            lo,
            hi,
            &breaks.points_in(lo, hi),
            opts.tol,
            EndpointFlags::none(),
        )?;
        acc += r.value;
        ok &= r.converged;
        all_finite &= acc.is_finite();
        samples.push(SeqSample {
            n,
            value: c_d * acc,
            reliable: ok,
        });
    }

    let fit = FitOptions {
        divergence_floor: opts.divergence_floor,
        fit_tol: opts.fit_tol,
    };
    let a_pairs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.reliable && s.value.is_finite())
        .map(|s| (s.n as f64, s.value))
        .collect();
    let a_ev = SequenceEvidence {
        label: "a_n".into(),
        diagnosis: divergence_diagnose(&a_pairs, &fit),
    };

    let mut notes = Vec::new();
    let kind = if !all_finite {
        notes.push("some a_n were non-finite; the criterion requires finite a_n".into());
        VerdictKind::Inconclusive
    } else if a_ev.diagnosis.kind == DivergenceKind::DivergesToInfinity {
        VerdictKind::Recurrent
    } else {
        VerdictKind::Inconclusive
    };

    // advisory audit of the bound ‖A(x)‖φ(x) ≤ ϕ(|x|) where both sides are
    // computable; violations are surfaced, not fatal
    if let (Some(matrix), Some(phi)) = (&spec.matrix, &spec.phi_nd) {
        if let Some(r) = audit_envelope_bound(matrix, phi, phi_bound, env.rho, dim) {
            notes.push(format!(
                "envelope inequality violated at sampled radius r = {r:.6} \
                 (Frobenius norm); the verdict assumes the declared bound"
            ));
        }
    }

    // the proof's energy bound (d·vol_d)²/a_n
    let energy_trace: Vec<EnergyPoint> = samples
        .iter()
        .filter(|s| s.value > 0.0)
        .map(|s| EnergyPoint {
            n: s.n,
            energy: c_d * c_d / s.value,
        })
        .collect();

    Ok(RecurrenceVerdict {
        kind,
        case_tag: None,
        sequences: vec![a_ev],
        ratios: vec![],
        energy_trace,
        assumptions: standard_assumptions(opts.n_max),
        notes,
        n_max: opts.n_max,
    })
}

/// First sampled radius where ‖A‖_F·φ exceeds ϕ, if any.
fn audit_envelope_bound(
    matrix: &[Vec<Expr>],
    phi: &MultiExpr,
    phi_bound: &Expr,
    rho: f64,
    dim: usize,
) -> Option<f64> {
    for i in 1..=64 {
        let r = rho * (1.0 + i as f64 * 0.25);
        let frob: f64 = matrix
            .iter()
            .flatten()
            .map(|e| {
                let v = e.eval_raw(r);
                v * v
            })
            .sum::<f64>()
            .sqrt();
        // worst sampled φ on the sphere of radius r
        let phi_max = (0..32)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                let mut x = vec![0.0; dim];
                x[0] = r * t.cos();
                x[1] = r * t.sin();
                phi.eval(&x)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if frob * phi_max > phi_bound.eval_raw(r) * (1.0 + 1e-9) {
            return Some(r);
        }
    }
    None
}

/// The proof's upper bound for E(u_n, u_n) at index n, as recorded in the
/// verdict's energy trace (b(r_n)/a_n for the radial path, (d·vol_d)²/a_n for
/// the envelope path).
pub fn radial_energy_audit(verdict: &RecurrenceVerdict, n: u32) -> Option<f64> {
    verdict
        .energy_trace
        .iter()
        .find(|p| p.n == n)
        .map(|p| p.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamza::CaseTag;
    use crate::problem::{EnvelopeInput, Options};
    use approx::assert_relative_eq;

    fn identity_matrix(d: usize) -> Vec<Vec<Expr>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect()
    }

    fn euclid_spec(dim: usize, phi: MultiExpr, matrix: Option<Vec<Vec<Expr>>>) -> ProblemSpec {
        ProblemSpec {
            version: 1,
            domain: Domain::Euclidean { dim },
            sigma: None,
            phi: None,
            phi_nd: Some(phi),
            matrix,
            envelope: None,
            options: Options::default(),
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(unit_ball_volume(2), std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(
            unit_ball_volume(3),
            4.0 * std::f64::consts::PI / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            unit_ball_volume(4),
            std::f64::consts::PI * std::f64::consts::PI / 2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn surface_mass_circle() {
        // φ ≡ 1, d = 2, r = 2: circumference 4π
        let psi = surface_mass(&MultiExpr::Constant { value: 1.0 }, 2, 2.0, 1e-10).unwrap();
        assert_relative_eq!(psi, 4.0 * std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn surface_mass_radial_power() {
        // φ = |x|^γ, d = 3: ψ(r) = 4π r^{2+γ}
        let gamma = 1.5;
        let phi = MultiExpr::Radial {
            profile: Expr::power_abs(0.0, gamma),
        };
        let r = 1.7;
        let psi = surface_mass(&phi, 3, r, 1e-10).unwrap();
        assert_relative_eq!(
            psi,
            4.0 * std::f64::consts::PI * r.powf(2.0 + gamma),
            max_relative = 1e-12
        );
    }

    #[test]
    fn surface_mass_angular_fixture() {
        // φ = 1 + x1²/|x|² on d = 2, r = 1: circle average of cos² is ½,
        // so ψ = 2π·(3/2)
        let phi = MultiExpr::Sum {
            terms: vec![
                MultiExpr::Constant { value: 1.0 },
                MultiExpr::CoordSqRatio { index: 0 },
            ],
        };
        let psi = surface_mass(&phi, 2, 1.0, 1e-10).unwrap();
        assert_relative_eq!(psi, 3.0 * std::f64::consts::PI, max_relative = 1e-10);
    }

    #[test]
    fn surface_mass_general_path_matches_radial() {
        // rotation-invariant φ fed through the general d ∈ {2,3} quadrature
        for d in [2usize, 3] {
            let profile = Expr::Polynomial {
                coeffs: vec![1.0, 0.0, 0.5],
            };
            let radial = MultiExpr::Radial {
                profile: profile.clone(),
            };
            // defeat the radial shortcut with a product against constant 1
            // evaluated pointwise
            let general = MultiExpr::Product {
                factors: vec![
                    MultiExpr::Radial { profile },
                    MultiExpr::Sum {
                        terms: (0..d).map(|i| MultiExpr::CoordSqRatio { index: i }).collect(),
                    },
                ],
            };
            assert!(general.radial_profile().is_none());
            for &r in &[0.8, 2.3] {
                let a = surface_mass(&radial, d, r, 1e-10).unwrap();
                let b = surface_mass(&general, d, r, 1e-10).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues() {
        assert_relative_eq!(
            max_eigenvalue_sym(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            2.0
        );
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        assert_relative_eq!(
            max_eigenvalue_sym(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            3.0,
            max_relative = 1e-12
        );
        // slightly asymmetric input is symmetrized
        assert_relative_eq!(
            max_eigenvalue_sym(&[vec![2.0, 1.0 + 1e-13], vec![1.0, 2.0]]).unwrap(),
            3.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn envelope_running_maximum() {
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let ident = ellipticity_envelope(&identity_matrix(2), &grid).unwrap();
        assert!(ident.iter().all(|&b| (b - 1.0).abs() < 1e-12));
        // A = (1 + r²)·I: running max attained at the grid boundary
        let scaled: Vec<Vec<Expr>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        if i == j {
                            Expr::Polynomial {
                                coeffs: vec![1.0, 0.0, 1.0],
                            }
                        } else {
                            Expr::constant(0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let env = ellipticity_envelope(&scaled, &grid).unwrap();
        for (w, &r) in env.windows(2).zip(&grid[1..]) {
            assert!(w[1] + 1e-12 >= w[0], "envelope must be nondecreasing");
            let _ = r;
        }
        assert_relative_eq!(*env.last().unwrap(), 1.0 + 100.0, max_relative = 1e-12);
    }

    #[test]
    fn planar_brownian_recurrent_radial() {
        let spec = euclid_spec(2, MultiExpr::Constant { value: 1.0 }, Some(identity_matrix(2)));
        let profile = RadialProfile::from_spec(&spec).unwrap();
        assert_eq!(profile.dec.case_tag, CaseTag::HalfI);
        let v = classify_radial(&spec).unwrap();
        assert_eq!(v.kind, VerdictKind::Recurrent);
        // a_n = log(1+n)/(2π)
        let two_pi = 2.0 * std::f64::consts::PI;
        for (n, a) in &v.sequences[0].diagnosis.samples {
            assert_relative_eq!(*a, (1.0 + n).ln() / two_pi, max_relative = 1e-8);
        }
    }

    #[test]
    fn spatial_brownian_inconclusive_radial() {
        let spec = euclid_spec(3, MultiExpr::Constant { value: 1.0 }, Some(identity_matrix(3)));
        let v = classify_radial(&spec).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn growing_matrix_fails_ratio_condition() {
        // A = (1+r²)·I on d = 2: a_n still diverges but b(r_n)/a_n grows
        let scaled: Vec<Vec<Expr>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| {
                        if i == j {
                            Expr::Polynomial {
                                coeffs: vec![1.0, 0.0, 1.0],
                            }
                        } else {
                            Expr::constant(0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let spec = euclid_spec(2, MultiExpr::Constant { value: 1.0 }, Some(scaled));
        let v = classify_radial(&spec).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
        assert_ne!(v.ratios[0].diagnosis.kind, DecayKind::DecaysToZero);
    }

    fn envelope_spec(dim: usize, phi_bound: Expr, rho: f64) -> ProblemSpec {
        ProblemSpec {
            version: 1,
            domain: Domain::Euclidean { dim },
            sigma: None,
            phi: None,
            phi_nd: Some(MultiExpr::Constant { value: 1.0 }),
            matrix: None,
            envelope: Some(EnvelopeInput { phi_bound, rho }),
            options: Options::default(),
        }
    }

    #[test]
    fn envelope_dichotomy() {
        // ϕ ≡ 1, d = 2, ρ = 1: a_n = 2π log n → Recurrent
        let v = classify_envelope(&envelope_spec(2, Expr::constant(1.0), 1.0)).unwrap();
        assert_eq!(v.kind, VerdictKind::Recurrent);
        let two_pi = 2.0 * std::f64::consts::PI;
        for (n, a) in &v.sequences[0].diagnosis.samples {
            assert_relative_eq!(*a, two_pi * n.ln(), max_relative = 1e-8);
        }
        // d = 3: a_n = 4π(1 - 1/n) bounded → Inconclusive
        let v = classify_envelope(&envelope_spec(3, Expr::constant(1.0), 1.0)).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn envelope_constructed_log_divergence_d3() {
        // ϕ(s) = s^{-1} on d = 3 makes the reduced integrand 1/s:
        // a_n = 4π log n → Recurrent
        let v = classify_envelope(&envelope_spec(3, Expr::power_abs(0.0, -1.0), 1.0)).unwrap();
        assert_eq!(v.kind, VerdictKind::Recurrent);
        let c = unit_sphere_area(3);
        for (n, a) in &v.sequences[0].diagnosis.samples {
            assert_relative_eq!(*a, c * n.ln(), max_relative = 1e-8);
        }
    }

    #[test]
    fn envelope_verdict_invariant_in_rho() {
        for rho in [1.0, 2.0, 3.5] {
            let v = classify_envelope(&envelope_spec(2, Expr::constant(1.0), rho)).unwrap();
            assert_eq!(v.kind, VerdictKind::Recurrent, "rho = {rho}");
        }
    }

    #[test]
    fn radial_and_envelope_paths_agree() {
        // A = I, φ ≡ 1, ϕ := 1: same verdict kind on both paths for d ∈ {2,3}
        for (d, expect) in [(2, VerdictKind::Recurrent), (3, VerdictKind::Inconclusive)] {
            let mut spec = euclid_spec(d, MultiExpr::Constant { value: 1.0 }, Some(identity_matrix(d)));
            spec.envelope = Some(EnvelopeInput {
                phi_bound: Expr::constant(1.0),
                rho: 1.0,
            });
            let vr = classify_radial(&spec).unwrap();
            let ve = classify_envelope(&spec).unwrap();
            assert_eq!(vr.kind, expect, "radial d = {d}");
            assert_eq!(vr.kind, ve.kind, "paths disagree at d = {d}");
        }
    }

    #[test]
    fn energy_audit_reads_the_trace() {
        let spec = euclid_spec(2, MultiExpr::Constant { value: 1.0 }, Some(identity_matrix(2)));
        let v = classify_radial(&spec).unwrap();
        // b ≡ 1: bound = 1/a_n
        let a_8 = v.sequences[0]
            .diagnosis
            .samples
            .iter()
            .find(|(n, _)| *n == 8.0)
            .unwrap()
            .1;
        assert_relative_eq!(
            radial_energy_audit(&v, 8).unwrap(),
            1.0 / a_8,
            max_relative = 1e-12
        );
    }
}
