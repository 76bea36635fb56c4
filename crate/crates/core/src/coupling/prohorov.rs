use crate::coupling::flow::band_mass;
use crate::error::Result;
use crate::measure::AtomicMeasure;
use crate::tol;

/// Largest mass a coupling of `μ` and `ν` can place on `{|x − y| ≤ c}`.
pub fn band_coupling_mass(mu: &AtomicMeasure, nu: &AtomicMeasure, c: f64) -> f64 {
    band_mass(mu.atoms(), mu.weights(), nu.atoms(), nu.weights(), c)
}

/// Prohorov distance between two probability measures on ℝ.
///
/// Uses the coupling form `inf{ε : ∃π, π(|x − y| > ε) ≤ ε}`. The deficit
/// `1 − g(c)` only changes at cell distances, so the infimum is found by a
/// binary search for the crossover of the distances with the deficits.
pub fn prohorov(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    mu.require_probability()?;
    nu.require_probability()?;
    let mut ds: Vec<f64> = Vec::with_capacity(mu.len() * nu.len());
    for &x in mu.atoms() {
        for &y in nu.atoms() {
            let d = (x - y).abs();
            if d < 1.0 {
                ds.push(d);
            }
        }
    }
    ds.push(1.0);
    ds.sort_by(f64::total_cmp);
    ds.dedup();

    let deficit = |c: f64| {
        let d = 1.0 - band_coupling_mass(mu, nu, c);
        if d <= tol::MASS {
            0.0
        } else {
            d
        }
    };
    // smallest i with ds[i] >= deficit(ds[i]); exists since ds ends at 1
    let (mut lo, mut hi) = (0usize, ds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ds[mid] >= deficit(ds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut best = ds[lo];
    if lo > 0 {
        best = best.min(deficit(ds[lo - 1]));
    }
    Ok(best.min(1.0))
}
