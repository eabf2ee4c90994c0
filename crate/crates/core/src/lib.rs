//! Numerical recurrence criteria for symmetric gradient-type Dirichlet forms.
//!
//! The library decides — as numerical evidence, never as proof — whether the
//! form E(f,g) = ½∫ σ f'g' φ dx (and its multidimensional analogue) is
//! recurrent, by:
//!
//! 1. detecting the largest open set U on which 1/(σφ) is locally integrable
//!    ([`hamza`]),
//! 2. classifying the structure of U into the seven sufficient-criterion
//!    cases and computing the associated scale-integral sequences
//!    ([`recur1d`], [`recurnd`]),
//! 3. diagnosing divergence of those sequences by model fitting
//!    ([`quad::divergence`]),
//! 4. constructing the explicit test functions behind each criterion and
//!    verifying their energy identities by quadrature ([`recur1d`]), and
//! 5. cross-checking verdicts with an Euler–Maruyama simulator of the
//!    associated diffusion ([`mcdiff`]).
//!
//! With the default `parallel` feature, embarrassingly parallel work
//! (independent cutoff integrals, simulation paths) runs on rayon; sequential
//! variants remain available for comparison.

pub mod error;
pub mod expr;
pub mod fixtures;
pub mod hamza;
pub mod mcdiff;
pub mod problem;
pub mod quad;
pub mod recur1d;
pub mod recurnd;
pub mod verdict;

pub use error::{CoreError, Result};
pub use problem::{Domain, Options, ProblemSpec};
pub use verdict::{RecurrenceVerdict, VerdictKind};

/// Map over owned items, in parallel when the `parallel` feature is enabled.
/// Output order always matches input order, so results are deterministic.
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Classify a spec with the matching criterion for its domain: the five-case
/// line criterion, the two-case half-line criterion, or the radial criterion
/// (falling back to the envelope criterion when no matrix is given).
pub fn classify_spec(spec: &ProblemSpec) -> Result<RecurrenceVerdict> {
    spec.validate()?;
    match spec.domain {
        Domain::Line | Domain::HalfLine => {
            let dec = hamza::detect_hamza_set(spec, spec.options.window, spec.options.tol)?;
            recur1d::classify(spec, &dec)
        }
        Domain::Euclidean { .. } => {
            if spec.matrix.is_some() {
                recurnd::classify_radial(spec)
            } else {
                recurnd::classify_envelope(spec)
            }
        }
    }
}
