//! One-dimensional recurrence criteria.
//!
//! Implements the five-case criterion on ℝ and the two-case criterion on the
//! reflected half line: cutoff formulas, the integral sequences a_n/b_n, the
//! explicit piecewise test functions u_n from the proofs, and numerical
//! verification of their energy identities.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::hamza::{CaseTag, IntervalDecomposition};
use crate::maybe_par_map;
use crate::problem::{Domain, Options, ProblemSpec};
use crate::quad::divergence::{divergence_diagnose, DivergenceKind, FitOptions};
use crate::quad::{integrate_with_breaks, EndpointFlags};
use crate::verdict::{
    standard_assumptions, EnergyPoint, RecurrenceVerdict, SequenceEvidence, VerdictKind,
};

/// The cutoff points (c_n, d_n) inside a cell (x_n, x_{n+1}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPair {
    pub n: u32,
    pub c: f64,
    pub d: f64,
    pub cell_lo: f64,
    pub cell_hi: f64,
}

/// c_n = (x_n + x_{n+1})/2 and d_n = x_{n+1} - 1/n (wide cells) or
/// x_{n+1} - (x_{n+1} - c_n)/n (narrow cells). At n = 1 in a narrow cell the
/// ramp interval degenerates to a point and a_1 = 0.
pub fn midpoint_cutoffs(x_lo: f64, x_hi: f64, n: u32) -> Result<CutoffPair> {
    if !(x_lo < x_hi) || n == 0 {
        return Err(CoreError::Numerical(format!(
            "invalid cutoff cell ({x_lo}, {x_hi}) at n = {n}"
        )));
    }
    let c = 0.5 * (x_lo + x_hi);
    let half = x_hi - c;
    let d = if half > 1.0 {
        x_hi - 1.0 / n as f64
    } else {
        x_hi - half / n as f64
    };
    Ok(CutoffPair {
        n,
        c,
        d,
        cell_lo: x_lo,
        cell_hi: x_hi,
    })
}

/// Mirrored cutoffs for cells descending to -∞: c_{-n} is the midpoint and
/// d_{-n} = x_{-n} + 1/n (or x_{-n} + (c_{-n} - x_{-n})/n), so d < c.
pub fn mirrored_cutoffs(x_lo: f64, x_hi: f64, n: u32) -> Result<CutoffPair> {
    if !(x_lo < x_hi) || n == 0 {
        return Err(CoreError::Numerical(format!(
            "invalid cutoff cell ({x_lo}, {x_hi}) at n = {n}"
        )));
    }
    let c = 0.5 * (x_lo + x_hi);
    let half = c - x_lo;
    let d = if half > 1.0 {
        x_lo + 1.0 / n as f64
    } else {
        x_lo + half / n as f64
    };
    Ok(CutoffPair {
        n,
        c,
        d,
        cell_lo: x_lo,
        cell_hi: x_hi,
    })
}

/// One sampled integral a_n; `reliable = false` marks quadrature that did
/// not converge (such samples are excluded from divergence fits).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqSample {
    pub n: u32,
    pub value: f64,
    pub reliable: bool,
}

/// The integral sequences the tagged case requires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSequences {
    pub a: Vec<SeqSample>,
    pub b: Option<Vec<SeqSample>>,
}

fn inv_weight(weight: &Expr) -> impl Fn(f64) -> f64 + '_ {
    move |x| 1.0 / weight.eval_raw(x)
}

/// Incremental sequence ∫_{start}^{start+n} 1/w for n = 1..n_max.
fn growing_integrals(weight: &Expr, start: f64, n_max: u32, tol: f64, positive: bool) -> Result<Vec<SeqSample>> {
    let suspects = weight.singular_support();
    let panels: Vec<Result<(f64, bool)>> = maybe_par_map((1..=n_max).collect::<Vec<u32>>(), |k| {
        let (lo, hi) = if positive {
            (start + (k - 1) as f64, start + k as f64)
        } else {
            (start - k as f64, start - (k - 1) as f64)
        };
        let breaks = suspects.points_in(lo, hi);
        let r = integrate_with_breaks(inv_weight(weight), lo, hi, &breaks, tol, EndpointFlags::none())?;
        Ok((r.value, r.converged))
    });
    let mut out = Vec::with_capacity(n_max as usize);
    let mut acc = 0.0;
    let mut ok = true;
    for (k, p) in panels.into_iter().enumerate() {
        let (v, converged) = p?;
        acc += v;
        ok &= converged;
        out.push(SeqSample {
            n: k as u32 + 1,
            value: acc,
            reliable: ok,
        });
    }
    Ok(out)
}

/// Single cutoff integral a_n = ∫_{c_n}^{d_n} 1/w (or its mirror).
fn cutoff_integral(weight: &Expr, dec: &IntervalDecomposition, n: u32, mirrored: bool, tol: f64) -> Result<SeqSample> {
    let (lo, hi) = dec.cell(if mirrored { -(n as i64) } else { n as i64 })?;
    let cp = if mirrored {
        mirrored_cutoffs(lo, hi, n)?
    } else {
        midpoint_cutoffs(lo, hi, n)?
    };
    let (ilo, ihi) = if mirrored { (cp.d, cp.c) } else { (cp.c, cp.d) };
    if !(ilo < ihi) {
        return Ok(SeqSample {
            n,
            value: 0.0,
            reliable: true,
        });
    }
    let flags = if mirrored {
        EndpointFlags::left()
    } else {
        EndpointFlags::right()
    };
    let r = integrate_with_breaks(inv_weight(weight), ilo, ihi, &[], tol, flags)?;
    Ok(SeqSample {
        n,
        value: r.value,
        reliable: r.converged,
    })
}

fn cutoff_sequence(weight: &Expr, dec: &IntervalDecomposition, n_max: u32, mirrored: bool, tol: f64) -> Result<Vec<SeqSample>> {
    let samples: Vec<Result<SeqSample>> = maybe_par_map((1..=n_max).collect::<Vec<u32>>(), |n| {
        cutoff_integral(weight, dec, n, mirrored, tol)
    });
    samples.into_iter().collect()
}

/// Compute the integral sequences demanded by the tagged case.
pub fn sequence_an(spec: &ProblemSpec, dec: &IntervalDecomposition, n_max: u32) -> Result<CaseSequences> {
    if n_max < 8 {
        return Err(CoreError::Numerical("n_max must be at least 8".into()));
    }
    let weight = spec.weight()?;
    let tol = spec.options.tol;
    let seqs = match dec.case_tag {
        CaseTag::LineI => CaseSequences {
            a: growing_integrals(&weight, 0.0, n_max, tol, true)?,
            b: Some(growing_integrals(&weight, 0.0, n_max, tol, false)?),
        },
        CaseTag::LineII => {
            let a = dec.anchors.a.unwrap();
            let b = dec.anchors.b.unwrap();
            CaseSequences {
                a: growing_integrals(&weight, b + 1.0, n_max, tol, true)?,
                b: Some(growing_integrals(&weight, a - 1.0, n_max, tol, false)?),
            }
        }
        CaseTag::LineIII => CaseSequences {
            a: cutoff_sequence(&weight, dec, n_max, false, tol)?,
            b: Some(cutoff_sequence(&weight, dec, n_max, true, tol)?),
        },
        CaseTag::LineIV => {
            let b = dec.anchors.b.unwrap();
            CaseSequences {
                a: growing_integrals(&weight, b + 1.0, n_max, tol, true)?,
                b: Some(cutoff_sequence(&weight, dec, n_max, true, tol)?),
            }
        }
        CaseTag::LineV => {
            let a = dec.anchors.a.unwrap();
            CaseSequences {
                a: cutoff_sequence(&weight, dec, n_max, false, tol)?,
                b: Some(growing_integrals(&weight, a - 1.0, n_max, tol, false)?),
            }
        }
        CaseTag::HalfI => {
            let a = dec.anchors.a.unwrap();
            CaseSequences {
                a: growing_integrals(&weight, a + 1.0, n_max, tol, true)?,
                b: None,
            }
        }
        CaseTag::HalfII => CaseSequences {
            a: cutoff_sequence(&weight, dec, n_max, false, tol)?,
            b: None,
        },
    };
    Ok(seqs)
}

/// Half-line sequence over an arbitrary weight (used by the radial reduction,
/// where the weight is the surface mass ψ). Also returns the outer radius of
/// each ramp (a+1+n for half-i, d_n for half-ii), at which the ellipticity
/// envelope is evaluated.
pub(crate) fn halfline_sequence_with_radii(
    weight: &Expr,
    dec: &IntervalDecomposition,
    n_max: u32,
    tol: f64,
) -> Result<(Vec<SeqSample>, Vec<f64>)> {
    match dec.case_tag {
        CaseTag::HalfI => {
            let a = dec.anchors.a.unwrap();
            let seq = growing_integrals(weight, a + 1.0, n_max, tol, true)?;
            let radii = (1..=n_max).map(|n| a + 1.0 + n as f64).collect();
            Ok((seq, radii))
        }
        CaseTag::HalfII => {
            let seq = cutoff_sequence(weight, dec, n_max, false, tol)?;
            let radii = (1..=n_max)
                .map(|n| {
                    let (lo, hi) = dec.cell(n as i64)?;
                    Ok(midpoint_cutoffs(lo, hi, n)?.d)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((seq, radii))
        }
        _ => Err(CoreError::Spec(
            "radial reduction requires a half-line case".into(),
        )),
    }
}

fn diagnose(seq: &[SeqSample], opts: &Options) -> SequenceEvidence {
    let samples: Vec<(f64, f64)> = seq
        .iter()
        .filter(|s| s.reliable)
        .map(|s| (s.n as f64, s.value))
        .collect();
    SequenceEvidence {
        label: String::new(),
        diagnosis: divergence_diagnose(
            &samples,
            &FitOptions {
                divergence_floor: opts.divergence_floor,
                fit_tol: opts.fit_tol,
            },
        ),
    }
}

fn closed_form_energy_trace(seqs: &CaseSequences) -> Vec<EnergyPoint> {
    let mut out = Vec::new();
    for (i, a) in seqs.a.iter().enumerate() {
        let mut e = 0.0;
        let mut ok = a.value > 0.0;
        if ok {
            e += 0.5 / a.value;
        }
        if let Some(bs) = &seqs.b {
            let b = bs[i];
            if b.value > 0.0 {
                e += 0.5 / b.value;
            } else {
                ok = false;
            }
        }
        if ok {
            out.push(EnergyPoint { n: a.n, energy: e });
        }
    }
    out
}

fn classify_one_dim(spec: &ProblemSpec, dec: &IntervalDecomposition) -> Result<RecurrenceVerdict> {
    let opts = &spec.options;
    let seqs = sequence_an(spec, dec, opts.n_max)?;
    let mut evidence = Vec::new();
    let mut a_ev = diagnose(&seqs.a, opts);
    a_ev.label = "a_n".into();
    evidence.push(a_ev);
    if let Some(bs) = &seqs.b {
        let mut b_ev = diagnose(bs, opts);
        b_ev.label = "b_n".into();
        evidence.push(b_ev);
    }

    let all_diverge = evidence
        .iter()
        .all(|e| e.diagnosis.kind == DivergenceKind::DivergesToInfinity);
    let all_bounded = evidence
        .iter()
        .all(|e| e.diagnosis.kind == DivergenceKind::Bounded);

    let mut kind = if all_diverge {
        VerdictKind::Recurrent
    } else {
        VerdictKind::Inconclusive
    };
    let mut notes = Vec::new();
    if !dec.ambiguous_points.is_empty() {
        notes.push(format!(
            "{} ambiguous singular point(s) conservatively excluded from U",
            dec.ambiguous_points.len()
        ));
    }
    // natural-scale transience probe (extension, off by default)
    if opts.enable_scale_probe
        && matches!(dec.case_tag, CaseTag::LineI | CaseTag::HalfI)
        && !all_diverge
        && all_bounded
    {
        kind = VerdictKind::TransientByScale;
        notes.push(
            "transience flag rests on the natural-scale equivalence, an extension beyond the \
             sufficient criteria"
                .into(),
        );
    }

    Ok(RecurrenceVerdict {
        kind,
        case_tag: Some(dec.case_tag),
        sequences: evidence,
        ratios: vec![],
        energy_trace: closed_form_energy_trace(&seqs),
        assumptions: standard_assumptions(opts.n_max),
        notes,
        n_max: opts.n_max,
    })
}

/// Apply the five-case criterion on ℝ.
pub fn classify_line(spec: &ProblemSpec, dec: &IntervalDecomposition) -> Result<RecurrenceVerdict> {
    if spec.domain != Domain::Line {
        return Err(CoreError::Spec("classify_line requires the full line".into()));
    }
    if dec.case_tag.is_half() {
        return Ok(RecurrenceVerdict::inconclusive(
            "decomposition is tagged with a half-line case",
            spec.options.n_max,
        ));
    }
    classify_one_dim(spec, dec)
}

/// Apply the two-case criterion on the reflected half line.
pub fn classify_halfline(spec: &ProblemSpec, dec: &IntervalDecomposition) -> Result<RecurrenceVerdict> {
    if spec.domain != Domain::HalfLine {
        return Err(CoreError::Spec(
            "classify_halfline requires the half line".into(),
        ));
    }
    if !dec.case_tag.is_half() {
        return Ok(RecurrenceVerdict::inconclusive(
            "decomposition is not tagged with a half-line case",
            spec.options.n_max,
        ));
    }
    classify_one_dim(spec, dec)
}

/// Classify according to the spec's domain.
pub fn classify(spec: &ProblemSpec, dec: &IntervalDecomposition) -> Result<RecurrenceVerdict> {
    match spec.domain {
        Domain::Line => classify_line(spec, dec),
        Domain::HalfLine => classify_halfline(spec, dec),
        Domain::Euclidean { .. } => Err(CoreError::Spec(
            "1-d classifier called on a euclidean spec".into(),
        )),
    }
}

/// A piece of the test function u_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    /// u = 1
    One,
    /// u(x) = 1 - (1/A)∫_{lo}^{x} 1/(σφ)
    RampDown { normalizer: f64 },
    /// u(x) = 1 - (1/A)∫_{x}^{hi} 1/(σφ)
    RampUp { normalizer: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

/// Piecewise representation of the recurrence-determining function u_n:
/// flat core, integral ramps, zero outside the listed pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub n: u32,
    pub pieces: Vec<Piece>,
}

impl TestFunction {
    pub fn support(&self) -> (f64, f64) {
        let lo = self.pieces.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min);
        let hi = self.pieces.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Evaluate u_n(x) by quadrature over the containing ramp.
    pub fn evaluate(&self, weight: &Expr, x: f64, tol: f64) -> Result<f64> {
        for p in &self.pieces {
            if x < p.lo || x > p.hi {
                continue;
            }
            return match p.kind {
                PieceKind::One => Ok(1.0),
                PieceKind::RampDown { normalizer } => {
                    if x <= p.lo {
                        return Ok(1.0);
                    }
                    let r = integrate_with_breaks(inv_weight(weight), p.lo, x, &[], tol, EndpointFlags::right())?;
                    Ok(1.0 - r.value / normalizer)
                }
                PieceKind::RampUp { normalizer } => {
                    if x >= p.hi {
                        return Ok(1.0);
                    }
                    let r = integrate_with_breaks(inv_weight(weight), x, p.hi, &[], tol, EndpointFlags::left())?;
                    Ok(1.0 - r.value / normalizer)
                }
            };
        }
        Ok(0.0)
    }

    /// Sample u_n on a grid (`pts` points per ramp plus piece boundaries),
    /// using cumulative panel integration along each ramp.
    pub fn sample(&self, weight: &Expr, pts: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match p.kind {
                PieceKind::One => {
                    out.push((p.lo, 1.0));
                    out.push((p.hi, 1.0));
                }
                PieceKind::RampDown { normalizer } => {
                    let mut acc = 0.0;
                    out.push((p.lo, 1.0));
                    for i in 1..=pts {
                        let x0 = p.lo + (p.hi - p.lo) * (i - 1) as f64 / pts as f64;
                        let x1 = p.lo + (p.hi - p.lo) * i as f64 / pts as f64;
                        let r = integrate_with_breaks(inv_weight(weight), x0, x1, &[], tol, EndpointFlags::none())?;
                        acc += r.value;
                        out.push((x1, 1.0 - acc / normalizer));
                    }
                }
                PieceKind::RampUp { normalizer } => {
                    let mut acc = 0.0;
                    let mut seg = Vec::with_capacity(pts + 1);
                    seg.push((p.hi, 1.0));
                    for i in 1..=pts {
                        let x1 = p.hi - (p.hi - p.lo) * i as f64 / pts as f64;
                        let x0 = p.hi - (p.hi - p.lo) * (i - 1) as f64 / pts as f64;
                        let r = integrate_with_breaks(inv_weight(weight), x1, x0, &[], tol, EndpointFlags::none())?;
                        acc += r.value;
                        seg.push((x1, 1.0 - acc / normalizer));
                    }
                    seg.reverse();
                    out.extend(seg);
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(out)
    }
}

/// Build the tagged case's explicit test function u_n.
pub fn build_un(spec: &ProblemSpec, dec: &IntervalDecomposition, n: u32) -> Result<TestFunction> {
    let weight = spec.weight()?;
    let tol = spec.options.tol;
    let direct = |lo: f64, hi: f64, flags: EndpointFlags| -> Result<f64> {
        let breaks = weight.singular_support().points_in(lo, hi);
        Ok(integrate_with_breaks(inv_weight(&weight), lo, hi, &breaks, tol, flags)?.value)
    };
    let need_pos = |v: f64| -> Result<f64> {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CoreError::Numerical(format!(
                "degenerate normalizer a_n = {v} at n = {n}"
            )))
        }
    };

    let pieces = match dec.case_tag {
        CaseTag::LineI => {
            let a_n = need_pos(direct(0.0, n as f64, EndpointFlags::none())?)?;
            let b_n = need_pos(direct(-(n as f64), 0.0, EndpointFlags::none())?)?;
            vec![
                Piece {
                    lo: -(n as f64),
                    hi: 0.0,
                    kind: PieceKind::RampUp { normalizer: b_n },
                },
                Piece {
                    lo: 0.0,
                    hi: n as f64,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::LineII => {
            let a = dec.anchors.a.unwrap();
            let b = dec.anchors.b.unwrap();
            let a_n = need_pos(direct(b + 1.0, b + 1.0 + n as f64, EndpointFlags::none())?)?;
            let b_n = need_pos(direct(a - 1.0 - n as f64, a - 1.0, EndpointFlags::none())?)?;
            vec![
                Piece {
                    lo: a - 1.0 - n as f64,
                    hi: a - 1.0,
                    kind: PieceKind::RampUp { normalizer: b_n },
                },
                Piece {
                    lo: a - 1.0,
                    hi: b + 1.0,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: b + 1.0,
                    hi: b + 1.0 + n as f64,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::LineIII => {
            let (plo, phi) = dec.cell(n as i64)?;
            let cp = midpoint_cutoffs(plo, phi, n)?;
            let (mlo, mhi) = dec.cell(-(n as i64))?;
            let mp = mirrored_cutoffs(mlo, mhi, n)?;
            let a_n = need_pos(direct(cp.c, cp.d, EndpointFlags::right())?)?;
            let b_n = need_pos(direct(mp.d, mp.c, EndpointFlags::left())?)?;
            vec![
                Piece {
                    lo: mp.d,
                    hi: mp.c,
                    kind: PieceKind::RampUp { normalizer: b_n },
                },
                Piece {
                    lo: mp.c,
                    hi: cp.c,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: cp.c,
                    hi: cp.d,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::LineIV => {
            let b = dec.anchors.b.unwrap();
            let (mlo, mhi) = dec.cell(-(n as i64))?;
            let mp = mirrored_cutoffs(mlo, mhi, n)?;
            let a_n = need_pos(direct(b + 1.0, b + 1.0 + n as f64, EndpointFlags::none())?)?;
            let b_n = need_pos(direct(mp.d, mp.c, EndpointFlags::left())?)?;
            vec![
                Piece {
                    lo: mp.d,
                    hi: mp.c,
                    kind: PieceKind::RampUp { normalizer: b_n },
                },
                Piece {
                    lo: mp.c,
                    hi: b + 1.0,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: b + 1.0,
                    hi: b + 1.0 + n as f64,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::LineV => {
            let a = dec.anchors.a.unwrap();
            let (plo, phi) = dec.cell(n as i64)?;
            let cp = midpoint_cutoffs(plo, phi, n)?;
            let a_n = need_pos(direct(cp.c, cp.d, EndpointFlags::right())?)?;
            let b_n = need_pos(direct(a - 1.0 - n as f64, a - 1.0, EndpointFlags::none())?)?;
            vec![
                Piece {
                    lo: a - 1.0 - n as f64,
                    hi: a - 1.0,
                    kind: PieceKind::RampUp { normalizer: b_n },
                },
                Piece {
                    lo: a - 1.0,
                    hi: cp.c,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: cp.c,
                    hi: cp.d,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::HalfI => {
            let a = dec.anchors.a.unwrap();
            let a_n = need_pos(direct(a + 1.0, a + 1.0 + n as f64, EndpointFlags::none())?)?;
            vec![
                Piece {
                    lo: 0.0,
                    hi: a + 1.0,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: a + 1.0,
                    hi: a + 1.0 + n as f64,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
        CaseTag::HalfII => {
            let (plo, phi) = dec.cell(n as i64)?;
            let cp = midpoint_cutoffs(plo, phi, n)?;
            let a_n = need_pos(direct(cp.c, cp.d, EndpointFlags::right())?)?;
            vec![
                Piece {
                    lo: 0.0,
                    hi: cp.c,
                    kind: PieceKind::One,
                },
                Piece {
                    lo: cp.c,
                    hi: cp.d,
                    kind: PieceKind::RampDown { normalizer: a_n },
                },
            ]
        }
    };
    Ok(TestFunction { n, pieces })
}

/// E(u_n, u_n) = ½∫ (u_n')² σφ dx, evaluated by quadrature. On a ramp with
/// normalizer A the derivative is ∓(1/A)·1/(σφ), so the integrand reduces to
/// (1/A²)·1/(σφ) over the ramp support; flat pieces contribute nothing.
pub fn dirichlet_energy(u: &TestFunction, spec: &ProblemSpec, tol: f64) -> Result<f64> {
    let weight = spec.weight()?;
    let mut total = 0.0;
    for p in &u.pieces {
        let (normalizer, flags) = match p.kind {
            PieceKind::One => continue,
            PieceKind::RampDown { normalizer } => (normalizer, EndpointFlags::right()),
            PieceKind::RampUp { normalizer } => (normalizer, EndpointFlags::left()),
        };
        if p.hi <= p.lo {
            continue;
        }
        let breaks = weight.singular_support().points_in(p.lo, p.hi);
        let r = integrate_with_breaks(inv_weight(&weight), p.lo, p.hi, &breaks, tol, flags)
            .map_err(|e| {
                CoreError::Numerical(format!(
                    "energy quadrature failed on ramp [{}, {}]: {e}",
                    p.lo, p.hi
                ))
            })?;
        total += 0.5 * r.value / (normalizer * normalizer);
    }
    Ok(total)
}

/// The closed-form energy of the tagged case: ½(1/a_n + 1/b_n) for two-ramp
/// cases, ½/a_n for the one-ramp half-line cases.
pub fn closed_form_energy(u: &TestFunction) -> f64 {
    u.pieces
        .iter()
        .map(|p| match p.kind {
            PieceKind::One => 0.0,
            PieceKind::RampDown { normalizer } | PieceKind::RampUp { normalizer } => {
                0.5 / normalizer
            }
        })
        .sum()
}
