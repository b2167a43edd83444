/// Euclidean projection onto `{p : 0 ≤ p_i ≤ 1, Σ p_i ≤ budget}`.
pub fn project_capped_simplex(y: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = y.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    // Find τ ≥ 0 with Σ clip(y − τ) = budget; the sum is nonincreasing in τ.
    let shifted_sum = |tau: f64| y.iter().map(|v| (v - tau).clamp(0.0, 1.0)).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = y.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted_sum(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1.0) {
            break;
        }
    }
    y.iter().map(|v| (v - hi).clamp(0.0, 1.0)).collect()
}
