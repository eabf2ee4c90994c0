//! Property tests for structural invariants: cutoff geometry, trend
//! diagnosis under rescaling, and quadrature sign/ordering.

use proptest::prelude::*;

use gradform_core::quad::divergence::{divergence_diagnose, FitOptions};
use gradform_core::quad::{integrate, EndpointFlags};
use gradform_core::recur1d::{midpoint_cutoffs, mirrored_cutoffs};

proptest! {
    /// Cutoffs always land strictly inside the cell with c < d once the
    /// shrinking offset 1/n fits (n >= 2 for unit-or-wider cells).
    #[test]
    fn cutoffs_stay_inside_cell(
        lo in -50.0..50.0f64,
        gap in 0.5..5.0f64,
        n in 2u32..40,
    ) {
        let hi = lo + gap;
        let up = midpoint_cutoffs(lo, hi, n).unwrap();
        prop_assert!(up.c < up.d, "c = {}, d = {}", up.c, up.d);
        prop_assert!(up.c > lo && up.d < hi);
        let down = mirrored_cutoffs(lo, hi, n).unwrap();
        prop_assert!(down.d < down.c, "d = {}, c = {}", down.d, down.c);
        prop_assert!(down.d > lo && down.c < hi);
    }

    /// Rescaling a sequence by a positive constant never changes the
    /// diagnosed trend kind (growth is judged on shape, not magnitude,
    /// with the divergence floor applied to the extrapolated limit).
    #[test]
    fn trend_kind_is_scale_invariant(scale in 1e-3..1e3f64) {
        let opts = FitOptions::default();
        let log_seq: Vec<(f64, f64)> = (1..=48).map(|n| (n as f64, (1.0 + n as f64).ln())).collect();
        let flat_seq: Vec<(f64, f64)> = (1..=48).map(|n| (n as f64, 2.0 - 1.0 / n as f64)).collect();
        for seq in [log_seq, flat_seq] {
            let base = divergence_diagnose(&seq, &opts).kind;
            let scaled: Vec<(f64, f64)> = seq.iter().map(|(n, a)| (*n, scale * a)).collect();
            prop_assert_eq!(divergence_diagnose(&scaled, &opts).kind, base, "scale = {}", scale);
        }
    }

    /// A nonnegative integrand has a nonnegative integral, and enlarging
    /// the interval never decreases it.
    #[test]
    fn integral_is_monotone_in_the_interval(
        a in -3.0..0.0f64,
        width in 0.1..2.0f64,
        extra in 0.1..2.0f64,
    ) {
        let f = |x: f64| x * x + 0.1;
        let small = integrate(f, a, a + width, 1e-10, EndpointFlags::none()).unwrap();
        let large = integrate(f, a, a + width + extra, 1e-10, EndpointFlags::none()).unwrap();
        prop_assert!(small.value >= 0.0);
        prop_assert!(large.value >= small.value);
    }
}
