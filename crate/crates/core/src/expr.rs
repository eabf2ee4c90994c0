//! Coefficient expression catalog.
//!
//! Coefficients (σ, φ, matrix entries, envelope bounds) are closed expression
//! trees over a small catalog of analytic primitives. Every tree can report
//! the set of points where it may vanish or blow up, which is what the Hamza
//! detector needs, and most trees differentiate symbolically, which is what
//! the drift construction needs.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Extent of a periodic singular-point pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeExtent {
    /// Points `offset + k·spacing` for all integers k.
    Both,
    /// Points with k ≤ 0 only (pattern accumulates at -∞).
    LeftOnly,
    /// Points with k ≥ 0 only (pattern accumulates at +∞).
    RightOnly,
}

/// A periodic family of suspect points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePattern {
    pub offset: f64,
    pub spacing: f64,
    pub extent: LatticeExtent,
}

impl LatticePattern {
    /// Lattice points inside `[lo, hi]`, ascending.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let k_lo = ((lo - self.offset) / self.spacing).ceil() as i64;
        let k_hi = ((hi - self.offset) / self.spacing).floor() as i64;
        for k in k_lo..=k_hi {
            match self.extent {
                LatticeExtent::Both => {}
                LatticeExtent::LeftOnly if k > 0 => continue,
                LatticeExtent::RightOnly if k < 0 => continue,
                _ => {}
            }
            out.push(self.offset + k as f64 * self.spacing);
        }
        out
    }

    pub fn point(&self, k: i64) -> f64 {
        self.offset + k as f64 * self.spacing
    }

    /// Nearest lattice point to x (respecting the extent).
    pub fn nearest(&self, x: f64) -> f64 {
        let mut k = ((x - self.offset) / self.spacing).round() as i64;
        match self.extent {
            LatticeExtent::LeftOnly if k > 0 => k = 0,
            LatticeExtent::RightOnly if k < 0 => k = 0,
            _ => {}
        }
        self.point(k)
    }
}

/// Points where an expression may vanish or blow up.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularSupport {
    pub points: Vec<f64>,
    pub lattices: Vec<LatticePattern>,
}

impl SingularSupport {
    fn merge(mut self, other: SingularSupport) -> SingularSupport {
        self.points.extend(other.points);
        for l in other.lattices {
            if !self.lattices.contains(&l) {
                self.lattices.push(l);
            }
        }
        self
    }

    /// All suspect points inside `[lo, hi]`, sorted and deduplicated.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|p| *p >= lo && *p <= hi)
            .collect();
        for l in &self.lattices {
            pts.extend(l.points_in(lo, hi));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// Is x within `eps` of a suspect point?
    pub fn near(&self, x: f64, eps: f64) -> bool {
        if self.points.iter().any(|p| (x - p).abs() <= eps) {
            return true;
        }
        self.lattices
            .iter()
            .any(|l| (x - l.nearest(x)).abs() <= eps)
    }
}

/// Scalar coefficient expression over one real variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Constant {
        value: f64,
    },
    /// |x - center|^exponent
    PowerAbs {
        center: f64,
        exponent: f64,
    },
    /// sign(x - center)·|x - center|^exponent (arises from differentiation)
    SignedPowerAbs {
        center: f64,
        exponent: f64,
    },
    /// coeffs[0] + coeffs[1]·x + coeffs[2]·x² + ...
    Polynomial {
        coeffs: Vec<f64>,
    },
    Exp {
        inner: Box<Expr>,
    },
    Log {
        inner: Box<Expr>,
    },
    /// inner(x)^exponent
    Pow {
        base: Box<Expr>,
        exponent: f64,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    /// pieces[i] on (breakpoints[i-1], breakpoints[i]); len(pieces) = len(breakpoints) + 1
    Piecewise {
        breakpoints: Vec<f64>,
        pieces: Vec<Expr>,
    },
    /// Piecewise-linear interpolation through (xs[i], ys[i]); constant extension outside.
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    /// |x - p(x)|^exponent where p(x) is the nearest lattice point.
    LatticePower {
        offset: f64,
        spacing: f64,
        exponent: f64,
        extent: LatticeExtent,
    },
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Constant { value: v }
    }

    pub fn power_abs(center: f64, exponent: f64) -> Expr {
        Expr::PowerAbs { center, exponent }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product { factors }
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum { terms }
    }

    /// 1/self
    pub fn recip(self) -> Expr {
        Expr::Pow {
            base: Box::new(self),
            exponent: -1.0,
        }
    }

    /// Raw IEEE evaluation: intermediate overflow propagates as ±inf/NaN
    /// without signalling.
    pub fn eval_raw(&self, x: f64) -> f64 {
        match self {
            Expr::Constant { value } => *value,
            Expr::PowerAbs { center, exponent } => pow_fast((x - center).abs(), *exponent),
            Expr::SignedPowerAbs { center, exponent } => {
                let d = x - center;
                d.signum() * pow_fast(d.abs(), *exponent)
            }
            Expr::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            Expr::Exp { inner } => inner.eval_raw(x).exp(),
            Expr::Log { inner } => inner.eval_raw(x).ln(),
            Expr::Pow { base, exponent } => pow_fast(base.eval_raw(x), *exponent),
            Expr::Sum { terms } => terms.iter().map(|t| t.eval_raw(x)).sum(),
            Expr::Product { factors } => factors.iter().map(|f| f.eval_raw(x)).product(),
            Expr::Piecewise {
                breakpoints,
                pieces,
            } => {
                let idx = breakpoints.partition_point(|b| *b <= x);
                pieces[idx].eval_raw(x)
            }
            Expr::Tabulated { xs, ys } => {
                if xs.is_empty() {
                    return f64::NAN;
                }
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= *xs.last().unwrap() {
                    return *ys.last().unwrap();
                }
                let i = xs.partition_point(|v| *v <= x);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let (y0, y1) = (ys[i - 1], ys[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            Expr::LatticePower {
                offset,
                spacing,
                exponent,
                extent,
            } => {
                let pat = LatticePattern {
                    offset: *offset,
                    spacing: *spacing,
                    extent: *extent,
                };
                pow_fast((x - pat.nearest(x)).abs(), *exponent)
            }
        }
    }

    /// Checked evaluation. Non-finite results at declared suspect points are
    /// returned as the +∞ marker; anywhere else they are an error carrying x.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_raw(x);
        if v.is_finite() {
            return Ok(v);
        }
        let sing = self.singular_support();
        if sing.near(x, 1e-12 * (1.0 + x.abs())) {
            Ok(f64::INFINITY)
        } else {
            Err(CoreError::UndeclaredNonFinite { x })
        }
    }

    /// Points where this expression may vanish or blow up.
    pub fn singular_support(&self) -> SingularSupport {
        match self {
            Expr::Constant { .. } | Expr::Polynomial { .. } | Expr::Tabulated { .. } => {
                SingularSupport::default()
            }
            Expr::PowerAbs { center, exponent } | Expr::SignedPowerAbs { center, exponent } => {
                if *exponent == 0.0 {
                    SingularSupport::default()
                } else {
                    SingularSupport {
                        points: vec![*center],
                        lattices: vec![],
                    }
                }
            }
            Expr::Exp { inner } | Expr::Log { inner } => inner.singular_support(),
            Expr::Pow { base, .. } => base.singular_support(),
            Expr::Sum { terms } => terms
                .iter()
                .fold(SingularSupport::default(), |acc, t| {
                    acc.merge(t.singular_support())
                }),
            Expr::Product { factors } => factors
                .iter()
                .fold(SingularSupport::default(), |acc, t| {
                    acc.merge(t.singular_support())
                }),
            Expr::Piecewise {
                breakpoints,
                pieces,
            } => {
                let mut acc = SingularSupport {
                    points: breakpoints.clone(),
                    lattices: vec![],
                };
                for p in pieces {
                    acc = acc.merge(p.singular_support());
                }
                acc
            }
            Expr::LatticePower {
                offset,
                spacing,
                exponent,
                extent,
            } => {
                if *exponent == 0.0 {
                    SingularSupport::default()
                } else {
                    SingularSupport {
                        points: vec![],
                        lattices: vec![LatticePattern {
                            offset: *offset,
                            spacing: *spacing,
                            extent: *extent,
                        }],
                    }
                }
            }
        }
    }

    /// Symbolic derivative where the catalog supports it (a.e. for the
    /// absolute-value powers). `None` means: fall back to central differences.
    pub fn derivative(&self) -> Option<Expr> {
        match self {
            Expr::Constant { .. } => Some(Expr::constant(0.0)),
            Expr::PowerAbs { center, exponent } => Some(if *exponent == 0.0 {
                Expr::constant(0.0)
            } else {
                Expr::product(vec![
                    Expr::constant(*exponent),
                    Expr::SignedPowerAbs {
                        center: *center,
                        exponent: exponent - 1.0,
                    },
                ])
            }),
            Expr::SignedPowerAbs { center, exponent } => Some(if *exponent == 0.0 {
                Expr::constant(0.0)
            } else {
                Expr::product(vec![
                    Expr::constant(*exponent),
                    Expr::PowerAbs {
                        center: *center,
                        exponent: exponent - 1.0,
                    },
                ])
            }),
            Expr::Polynomial { coeffs } => {
                let d: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c)
                    .collect();
                Some(Expr::Polynomial {
                    coeffs: if d.is_empty() { vec![0.0] } else { d },
                })
            }
            Expr::Exp { inner } => {
                let di = inner.derivative()?;
                Some(Expr::product(vec![di, self.clone()]))
            }
            Expr::Log { inner } => {
                let di = inner.derivative()?;
                Some(Expr::product(vec![di, (**inner).clone().recip()]))
            }
            Expr::Pow { base, exponent } => {
                let db = base.derivative()?;
                Some(Expr::product(vec![
                    Expr::constant(*exponent),
                    Expr::Pow {
                        base: base.clone(),
                        exponent: exponent - 1.0,
                    },
                    db,
                ]))
            }
            Expr::Sum { terms } => {
                let ds: Option<Vec<Expr>> = terms.iter().map(|t| t.derivative()).collect();
                Some(Expr::sum(ds?))
            }
            Expr::Product { factors } => {
                let mut terms = Vec::new();
                for i in 0..factors.len() {
                    let mut fs = factors.clone();
                    fs[i] = fs[i].derivative()?;
                    terms.push(Expr::product(fs));
                }
                Some(Expr::sum(terms))
            }
            Expr::Piecewise {
                breakpoints,
                pieces,
            } => {
                let dp: Option<Vec<Expr>> = pieces.iter().map(|p| p.derivative()).collect();
                Some(Expr::Piecewise {
                    breakpoints: breakpoints.clone(),
                    pieces: dp?,
                })
            }
            Expr::Tabulated { .. } | Expr::LatticePower { .. } => None,
        }
    }

    /// Value of the expression when it does not depend on `x`, if that is
    /// syntactically evident.
    fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Constant { value } => Some(*value),
            Expr::Polynomial { coeffs } => match coeffs.len() {
                0 => Some(0.0),
                1 => Some(coeffs[0]),
                _ => None,
            },
            Expr::PowerAbs { exponent, .. } if *exponent == 0.0 => Some(1.0),
            Expr::Exp { inner } => inner.constant_value().map(f64::exp),
            Expr::Log { inner } => inner.constant_value().map(f64::ln),
            Expr::Pow { base, exponent } => {
                base.constant_value().map(|b| pow_fast(b, *exponent))
            }
            Expr::Sum { terms } => terms
                .iter()
                .map(|t| t.constant_value())
                .sum::<Option<f64>>(),
            Expr::Product { factors } => factors
                .iter()
                .map(|f| f.constant_value())
                .product::<Option<f64>>(),
            _ => None,
        }
    }

    /// Compile into a closure for hot loops (path simulation). Subtrees that
    /// do not depend on `x` are folded away so the per-step cost tracks only
    /// the genuinely varying factors.
    pub fn compile(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        if let Some(v) = self.constant_value() {
            return Box::new(move |_| v);
        }
        match self {
            Expr::Constant { value } => {
                let v = *value;
                Box::new(move |_| v)
            }
            Expr::PowerAbs { center, exponent } => {
                let (c, e) = (*center, *exponent);
                Box::new(move |x| pow_fast((x - c).abs(), e))
            }
            Expr::SignedPowerAbs { center, exponent } => {
                let (c, e) = (*center, *exponent);
                Box::new(move |x| {
                    let d = x - c;
                    d.signum() * pow_fast(d.abs(), e)
                })
            }
            Expr::Pow { base, exponent } => {
                let b = base.compile();
                let e = *exponent;
                Box::new(move |x| pow_fast(b(x), e))
            }
            Expr::Sum { terms } => {
                let base: f64 = terms.iter().filter_map(|t| t.constant_value()).sum();
                let mut cs: Vec<_> = terms
                    .iter()
                    .filter(|t| t.constant_value().is_none())
                    .map(|t| t.compile())
                    .collect();
                if base == 0.0 && cs.len() == 1 {
                    return cs.pop().unwrap();
                }
                Box::new(move |x| base + cs.iter().map(|c| c(x)).sum::<f64>())
            }
            Expr::Product { factors } => {
                let base: f64 = factors
                    .iter()
                    .filter_map(|f| f.constant_value())
                    .product();
                let mut cs: Vec<_> = factors
                    .iter()
                    .filter(|f| f.constant_value().is_none())
                    .map(|f| f.compile())
                    .collect();
                if base == 1.0 && cs.len() == 1 {
                    return cs.pop().unwrap();
                }
                Box::new(move |x| base * cs.iter().map(|c| c(x)).product::<f64>())
            }
            Expr::Exp { inner } => {
                let i = inner.compile();
                Box::new(move |x| i(x).exp())
            }
            other => {
                let e = other.clone();
                Box::new(move |x| e.eval_raw(x))
            }
        }
    }

    /// Check strict positivity on a sample grid over `[lo, hi]`, skipping
    /// declared suspect points. A violation is a specification error.
    pub fn audit_positivity(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let sing = self.singular_support();
        let step = (hi - lo) / samples as f64;
        for i in 0..=samples {
            let x = lo + i as f64 * step;
            if sing.near(x, 2.0 * step.abs().max(1e-9)) {
                continue;
            }
            let v = self.eval_raw(x);
            if !v.is_nan() && v <= 0.0 {
                return Err(CoreError::Spec(format!(
                    "coefficient is not strictly positive at x = {x} (value {v})"
                )));
            }
        }
        Ok(())
    }
}

/// powf with fast paths for the exponents that dominate our workloads.
#[inline]
fn pow_fast(base: f64, exponent: f64) -> f64 {
    if exponent == 1.0 {
        base
    } else if exponent == 2.0 {
        base * base
    } else if exponent == -1.0 {
        1.0 / base
    } else if exponent == 0.0 {
        1.0
    } else if exponent == 0.5 {
        base.sqrt()
    } else if exponent == -2.0 {
        1.0 / (base * base)
    } else {
        base.powf(exponent)
    }
}

/// Coefficient on ℝ^d. The catalog is deliberately small: radial profiles
/// cover every matrix/weight the multidimensional criteria need, and the
/// coordinate-ratio node covers mild angular dependence for d ∈ {2,3}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiExpr {
    Constant { value: f64 },
    /// profile(|x|)
    Radial { profile: Expr },
    /// x_i² / |x|²
    CoordSqRatio { index: usize },
    Sum { terms: Vec<MultiExpr> },
    Product { factors: Vec<MultiExpr> },
}

impl MultiExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MultiExpr::Constant { value } => *value,
            MultiExpr::Radial { profile } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                profile.eval_raw(r)
            }
            MultiExpr::CoordSqRatio { index } => {
                let n2 = x.iter().map(|v| v * v).sum::<f64>();
                if n2 == 0.0 {
                    f64::NAN
                } else {
                    x[*index] * x[*index] / n2
                }
            }
            MultiExpr::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
            MultiExpr::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
        }
    }

    /// If the field is rotation invariant, its radial profile as an `Expr`.
    pub fn radial_profile(&self) -> Option<Expr> {
        match self {
            MultiExpr::Constant { value } => Some(Expr::constant(*value)),
            MultiExpr::Radial { profile } => Some(profile.clone()),
            MultiExpr::CoordSqRatio { .. } => None,
            MultiExpr::Sum { terms } => {
                let ps: Option<Vec<Expr>> = terms.iter().map(|t| t.radial_profile()).collect();
                Some(Expr::sum(ps?))
            }
            MultiExpr::Product { factors } => {
                let ps: Option<Vec<Expr>> = factors.iter().map(|t| t.radial_profile()).collect();
                Some(Expr::product(ps?))
            }
        }
    }
}
