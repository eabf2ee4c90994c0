//! Hamza set detection and structural case classification.
//!
//! The largest open set U on which 1/(σφ) is locally integrable drives the
//! whole case analysis. The detector tests every declared suspect point of
//! σφ for two-sided local integrability of 1/(σφ); points where the local
//! integral is finite are absorbed into U, points where it diverges form the
//! complement, and undetermined points are conservatively excluded from U.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::expr::{Expr, LatticeExtent, LatticePattern};
use crate::problem::ProblemSpec;
use crate::quad::{local_integrability, LocalIntegrability, Side};

/// Open interval with extended-real endpoints (±∞ allowed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// The seven structural cases of the one-dimensional criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// U = (-∞, ∞)
    LineI,
    /// U = (-∞, a) ∪ V ∪ (b, ∞)
    LineII,
    /// singular points accumulate at both -∞ and +∞
    LineIII,
    /// accumulation at -∞ only, free tail (b, ∞)
    LineIV,
    /// free tail (-∞, a), accumulation at +∞ only
    LineV,
    /// half line, U = V ∪ (a, ∞)
    HalfI,
    /// half line, singular points accumulate at +∞
    HalfII,
}

impl CaseTag {
    pub fn is_half(&self) -> bool {
        matches!(self, CaseTag::HalfI | CaseTag::HalfII)
    }
}

/// The anchor data the tagged theorem case needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseAnchors {
    /// Left boundary of the rightmost free tail structure (cases ii/v, half-i).
    pub a: Option<f64>,
    /// Right boundary singular point (cases ii/iv).
    pub b: Option<f64>,
    /// Surviving periodic singular pattern (cases iii/iv/v, half-ii).
    pub lattice: Option<LatticePattern>,
    /// Lattice index of x_1 in the paper-style cell enumeration.
    pub base_index: i64,
}

/// The detected Hamza set as an ordered interval decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecomposition {
    /// Maximal open intervals of U intersected with the search window
    /// (unbounded end intervals are kept unbounded).
    pub intervals: Vec<Interval>,
    /// Detected non-integrable singular points inside the window.
    pub complement_points: Vec<f64>,
    /// Points with undetermined local integrability, excluded from U.
    pub ambiguous_points: Vec<f64>,
    pub case_tag: CaseTag,
    pub anchors: CaseAnchors,
}

impl IntervalDecomposition {
    /// The paper-style cell (x_n, x_{n+1}) for cutoff construction.
    /// n ≥ 1 indexes cells toward +∞; n ≤ -1 indexes cells toward -∞.
    pub fn cell(&self, n: i64) -> Result<(f64, f64)> {
        let lat = self
            .anchors
            .lattice
            .ok_or_else(|| CoreError::Numerical("case has no singular lattice".into()))?;
        let x = |m: i64| lat.point(self.anchors.base_index + m - 1);
        match self.case_tag {
            CaseTag::LineIII | CaseTag::HalfII | CaseTag::LineV => Ok((x(n), x(n + 1))),
            CaseTag::LineIV => Ok((x(n), x(n + 1))),
            _ => Err(CoreError::Numerical(
                "cell enumeration only applies to accumulating cases".into(),
            )),
        }
    }
}

/// Detect the Hamza set of a 1-d spec inside `window`.
pub fn detect_hamza_set(
    spec: &ProblemSpec,
    window: (f64, f64),
    tol: f64,
) -> Result<IntervalDecomposition> {
    spec.validate()?;
    let weight = spec.weight()?;
    detect_hamza_weight(&weight, spec.is_half_line(), window, tol)
}

/// Core detector over an arbitrary weight w (σφ in 1-d, ψ in the radial
/// reduction). Tests local integrability of 1/w at every suspect point.
pub fn detect_hamza_weight(
    weight: &Expr,
    half_line: bool,
    window: (f64, f64),
    tol: f64,
) -> Result<IntervalDecomposition> {
    let (win_lo, win_hi) = if half_line {
        (0.0_f64.max(window.0), window.1)
    } else {
        window
    };
    if !(win_lo < win_hi) || !win_lo.is_finite() || !win_hi.is_finite() {
        return Err(CoreError::Spec(format!(
            "invalid search window [{win_lo}, {win_hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(CoreError::Spec("tolerance must be positive".into()));
    }

    weight.audit_positivity(win_lo, win_hi, 4096)?;

    let support = weight.singular_support();
    if support.lattices.len() > 1 {
        return Err(CoreError::Spec(
            "more than one periodic singular pattern is not supported".into(),
        ));
    }
    let lattice_in = support.lattices.first().copied();

    // candidate points inside the window; the half-line boundary 0 is never
    // a singular candidate for case tagging
    let mut candidates = support.points_in(win_lo, win_hi);
    if half_line {
        candidates.retain(|c| *c > 1e-12);
    }

    let inv = |x: f64| 1.0 / weight.eval_raw(x);
    let mut complement = Vec::new();
    let mut ambiguous = Vec::new();
    let mut lattice_verdicts: Vec<LocalIntegrability> = Vec::new();

    for (i, &c) in candidates.iter().enumerate() {
        let gap_left = if i == 0 { c - win_lo } else { c - candidates[i - 1] };
        let gap_right = if i + 1 == candidates.len() {
            win_hi - c
        } else {
            candidates[i + 1] - c
        };
        let h0 = (0.45 * gap_left.min(gap_right)).min(1.0).max(1e-6);
        let left = local_integrability(inv, c, Side::Left, h0, tol)?;
        let right = local_integrability(inv, c, Side::Right, h0, tol)?;
        let verdict = match (left, right) {
            (LocalIntegrability::Integrable { .. }, LocalIntegrability::Integrable { .. }) => {
                LocalIntegrability::Integrable { value: 0.0 }
            }
            (LocalIntegrability::NonIntegrable, _) | (_, LocalIntegrability::NonIntegrable) => {
                LocalIntegrability::NonIntegrable
            }
            _ => LocalIntegrability::Undetermined,
        };
        let is_lattice_pt = lattice_in
            .map(|l| (c - l.nearest(c)).abs() < 1e-9)
            .unwrap_or(false);
        if is_lattice_pt {
            lattice_verdicts.push(verdict);
        }
        match verdict {
            LocalIntegrability::Integrable { .. } => {}
            LocalIntegrability::NonIntegrable => {
                if !is_lattice_pt {
                    complement.push(c)
                }
            }
            LocalIntegrability::Undetermined => {
                ambiguous.push(c);
                if !is_lattice_pt {
                    complement.push(c)
                }
            }
        }
    }

    // extend the in-window lattice verdicts to the whole periodic pattern
    let lattice = match lattice_in {
        None => None,
        Some(pat) => {
            if lattice_verdicts.is_empty() {
                // no pattern point inside the window: probe the nearest one
                let c = pat.nearest(0.5 * (win_lo + win_hi));
                let v = local_integrability(inv, c, Side::Right, 0.45 * pat.spacing, tol)?;
                lattice_verdicts.push(v);
            }
            let all_non = lattice_verdicts
                .iter()
                .all(|v| matches!(v, LocalIntegrability::NonIntegrable));
            let all_int = lattice_verdicts
                .iter()
                .all(|v| matches!(v, LocalIntegrability::Integrable { .. }));
            if all_non {
                Some(pat)
            } else if all_int {
                None
            } else {
                return Err(CoreError::Spec(
                    "inconsistent integrability across the periodic singular pattern".into(),
                ));
            }
        }
    };

    complement.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (case_tag, anchors) = classify_case(&complement, lattice, half_line)?;

    // interval list inside the window (or unbounded where U extends)
    let mut cuts: Vec<f64> = complement.clone();
    if let Some(l) = lattice {
        cuts.extend(l.points_in(win_lo, win_hi));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let accum_left = lattice
        .map(|l| l.extent != LatticeExtent::RightOnly)
        .unwrap_or(false)
        && !half_line;
    let accum_right = lattice
        .map(|l| l.extent != LatticeExtent::LeftOnly)
        .unwrap_or(false);
    let left_end = if half_line {
        0.0
    } else if accum_left {
        win_lo
    } else {
        f64::NEG_INFINITY
    };
    let right_end = if accum_right { win_hi } else { f64::INFINITY };
    let mut edges = vec![left_end];
    edges.extend(cuts.iter().copied().filter(|c| *c > left_end && *c < right_end));
    edges.push(right_end);
    let intervals: Vec<Interval> = edges
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| Interval { lo: w[0], hi: w[1] })
        .collect();

    Ok(IntervalDecomposition {
        intervals,
        complement_points: complement,
        ambiguous_points: ambiguous,
        case_tag,
        anchors,
    })
}

/// Classify the structure of the complement into the theorem's cases.
/// A pure function of the singular-point structure: the order of
/// `finite_points` does not matter.
pub fn classify_case(
    finite_points: &[f64],
    lattice: Option<LatticePattern>,
    half_line: bool,
) -> Result<(CaseTag, CaseAnchors)> {
    let mut pts: Vec<f64> = finite_points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    if half_line {
        // only patterns accumulating at +∞ matter on [0, ∞)
        let lat = lattice.filter(|l| l.extent != LatticeExtent::LeftOnly);
        return match lat {
            None => {
                let mut all = pts;
                if let Some(l) = lattice {
                    // a left-only pattern contributes finitely many points ≥ 0
                    all.extend(l.points_in(0.0, l.point(0)).into_iter().filter(|p| *p >= 0.0));
                }
                let a = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Ok((
                    CaseTag::HalfI,
                    CaseAnchors {
                        a: Some(if a.is_finite() { a } else { 0.0 }),
                        ..Default::default()
                    },
                ))
            }
            Some(l) => {
                // base index: first lattice point ≥ 0
                let mut k = ((0.0 - l.offset) / l.spacing).ceil() as i64;
                if l.extent == LatticeExtent::RightOnly && k < 0 {
                    k = 0;
                }
                Ok((
                    CaseTag::HalfII,
                    CaseAnchors {
                        lattice: Some(l),
                        base_index: k,
                        ..Default::default()
                    },
                ))
            }
        };
    }

    match lattice {
        None => {
            if pts.is_empty() {
                Ok((CaseTag::LineI, CaseAnchors::default()))
            } else {
                Ok((
                    CaseTag::LineII,
                    CaseAnchors {
                        a: Some(pts[0]),
                        b: Some(*pts.last().unwrap()),
                        ..Default::default()
                    },
                ))
            }
        }
        Some(l) => match l.extent {
            LatticeExtent::Both => {
                // x_1 = first lattice point ≥ 0
                let k = ((0.0 - l.offset) / l.spacing).ceil() as i64;
                Ok((
                    CaseTag::LineIII,
                    CaseAnchors {
                        lattice: Some(l),
                        base_index: k,
                        ..Default::default()
                    },
                ))
            }
            LatticeExtent::LeftOnly => {
                let b = pts
                    .iter()
                    .cloned()
                    .fold(l.point(0), f64::max);
                Ok((
                    CaseTag::LineIV,
                    CaseAnchors {
                        b: Some(b),
                        lattice: Some(l),
                        base_index: 1, // x_0 = point(0): cells x_{-n} descend from there
                        ..Default::default()
                    },
                ))
            }
            LatticeExtent::RightOnly => {
                let a = pts.iter().cloned().fold(l.point(0), f64::min);
                Ok((
                    CaseTag::LineV,
                    CaseAnchors {
                        a: Some(a),
                        lattice: Some(l),
                        base_index: 0, // x_1 = point(0): cells ascend from the first point
                        ..Default::default()
                    },
                ))
            }
        },
    }
}
