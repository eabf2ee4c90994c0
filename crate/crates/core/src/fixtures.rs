//! Bundled example specifications.
//!
//! Every fixture used by the test suites and the CLI `fixtures` command is
//! generated here, so the shipped JSON files are reproducible byte for byte.

use crate::expr::{Expr, LatticeExtent, MultiExpr};
use crate::problem::{Domain, EnvelopeInput, Options, ProblemSpec};

/// Reflected Bessel-type form: σ ≡ 1, φ(x) = x^{δ-1} on [0, ∞).
/// Recurrent for δ ∈ (0, 2], otherwise the criterion is silent.
pub fn bessel(delta: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::one_dim(
        Domain::HalfLine,
        Expr::constant(1.0),
        Expr::power_abs(0.0, delta - 1.0),
    );
    spec.options.sim.x0 = 2.0;
    spec.options.sim.target = (0.0, 1.0);
    spec
}

/// Brownian motion on ℝ: σ ≡ 1, φ ≡ 1.
pub fn brownian_line() -> ProblemSpec {
    ProblemSpec::one_dim(Domain::Line, Expr::constant(1.0), Expr::constant(1.0))
}

/// Unit-gap singular lattice: φ(x) = |x - p(x)|^α with p(x) the nearest
/// integer. The singular points accumulate at ±∞ for α ≥ 1 (a_n = log n at
/// α = 1, a_n = 2(n-1) at α = 2 with these unit gaps).
pub fn lattice(alpha: f64) -> ProblemSpec {
    ProblemSpec::one_dim(
        Domain::Line,
        Expr::constant(1.0),
        Expr::LatticePower {
            offset: 0.0,
            spacing: 1.0,
            exponent: alpha,
            extent: LatticeExtent::Both,
        },
    )
}

/// Gaussian-type weight φ(x) = e^{x²}: both scale integrals converge, so the
/// criterion is silent (and the natural-scale probe flags transience).
pub fn gaussian_weight() -> ProblemSpec {
    ProblemSpec::one_dim(
        Domain::Line,
        Expr::constant(1.0),
        Expr::Exp {
            inner: Box::new(Expr::Polynomial {
                coeffs: vec![0.0, 0.0, 1.0],
            }),
        },
    )
}

fn identity_matrix(d: usize) -> Vec<Vec<Expr>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect()
}

/// Identity coefficients and φ ≡ 1 on ℝ^d: Brownian motion, recurrent for
/// d = 2 and outside the criterion for d = 3. Carries both the matrix (radial
/// path) and the envelope input ϕ ≡ 1, ρ = 1 (envelope path).
pub fn euclidean_identity(d: usize) -> ProblemSpec {
    ProblemSpec {
        version: 1,
        domain: Domain::Euclidean { dim: d },
        sigma: None,
        phi: None,
        phi_nd: Some(MultiExpr::Constant { value: 1.0 }),
        matrix: Some(identity_matrix(d)),
        envelope: Some(EnvelopeInput {
            phi_bound: Expr::constant(1.0),
            rho: 1.0,
        }),
        options: Options::default(),
    }
}

/// A(x) = (1 + |x|²)·I on ℝ²: the scale integral still diverges but the
/// ellipticity envelope grows too fast, so the ratio condition fails.
pub fn growing_matrix() -> ProblemSpec {
    let d = 2;
    let matrix = (0..d)
        .map(|i| {
            (0..d)
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
    ProblemSpec {
        version: 1,
        domain: Domain::Euclidean { dim: d },
        sigma: None,
        phi: None,
        phi_nd: Some(MultiExpr::Constant { value: 1.0 }),
        matrix: Some(matrix),
        envelope: None,
        options: Options::default(),
    }
}

/// Every bundled fixture with its canonical name.
pub fn all() -> Vec<(&'static str, ProblemSpec)> {
    vec![
        ("brownian-line", brownian_line()),
        ("bessel-0.5", bessel(0.5)),
        ("bessel-1", bessel(1.0)),
        ("bessel-1.5", bessel(1.5)),
        ("bessel-2", bessel(2.0)),
        ("bessel-2.5", bessel(2.5)),
        ("bessel-3", bessel(3.0)),
        ("lattice-alpha-1", lattice(1.0)),
        ("lattice-alpha-2", lattice(2.0)),
        ("gaussian-weight", gaussian_weight()),
        ("euclidean-identity-d2", euclidean_identity(2)),
        ("euclidean-identity-d3", euclidean_identity(3)),
        ("growing-matrix-d2", growing_matrix()),
    ]
}

/// Look up a bundled fixture by name.
pub fn by_name(name: &str) -> Option<ProblemSpec> {
    all()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate_and_round_trip() {
        for (name, spec) in all() {
            assert!(spec.validate().is_ok(), "{name} does not validate");
            let text = spec.to_json_pretty();
            let back = ProblemSpec::from_json(&text).unwrap();
            assert_eq!(spec, back, "{name} does not round-trip");
        }
    }

    #[test]
    fn generation_is_reproducible() {
        for ((n1, s1), (n2, s2)) in all().into_iter().zip(all()) {
            assert_eq!(n1, n2);
            assert_eq!(s1.to_json_pretty(), s2.to_json_pretty());
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("bessel-2").is_some());
        assert!(by_name("no-such-fixture").is_none());
    }
}
