use nalgebra::Vector3;

/// Distance floor in the Weiszfeld reweighting.
pub const WEISZFELD_EPS: f64 = 1e-12;

/// Weighted geometric median by Weiszfeld iteration, started at the weighted mean.
///
/// Stops after `max_iter` steps or once a step moves less than `tol`.
///
/// # Panics
/// If `points` is empty or the lengths differ.
pub fn weighted_geometric_median(points: &[Vector3<f64>], weights: &[f64], max_iter: usize, tol: f64) -> Vector3<f64> {
    assert!(!points.is_empty() && points.len() == weights.len());
    if points.iter().all(|p| *p == points[0]) {
        return points[0];
    }
    let total: f64 = weights.iter().sum();
    let mut y = points.iter().zip(weights).fold(Vector3::zeros(), |acc, (p, w)| acc + p * *w) / total;
    for _ in 0..max_iter {
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        for (p, &w) in points.iter().zip(weights) {
            let inv = w / (p - y).norm().max(WEISZFELD_EPS);
            num += p * inv;
            den += inv;
        }
        let next = num / den;
        let moved = (next - y).norm();
        y = next;
        if moved < tol {
            break;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn objective(points: &[Vector3<f64>], weights: &[f64], y: &Vector3<f64>) -> f64 {
        points.iter().zip(weights).map(|(p, w)| w * (p - y).norm()).sum()
    }

    #[test]
    fn identical_points() {
        let n = Vector3::new(0.0, 0.6, 0.8);
        let m = weighted_geometric_median(&[n; 4], &[1.0, 0.5, 0.25, 2.0], 20, 1e-8);
        assert_eq!(m, n);
    }

    #[test]
    fn majority_beats_outlier() {
        let majority = Vector3::new(0.0, 0.0, 1.0);
        let outlier = Vector3::new(1.0, 0.0, 0.0);
        let points = [majority, majority, majority, outlier, majority, majority];
        let weights = [1.0; 6];
        let m = weighted_geometric_median(&points, &weights, 20, 1e-8);

        // Brute-force oracle: random search in the bounding box, plus every data point.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut best = majority;
        let mut best_val = objective(&points, &weights, &best);
        for _ in 0..200_000 {
            let y = Vector3::new(rng.random_range(-0.1..1.1), rng.random_range(-0.1..0.1), rng.random_range(-0.1..1.1));
            let v = objective(&points, &weights, &y);
            if v < best_val {
                best_val = v;
                best = y;
            }
        }
        assert_eq!(best, majority);
        assert!((m - majority).norm() < 1e-6, "{m:?}");
    }

    #[test]
    fn matches_search_on_scattered_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<Vector3<f64>> = (0..7)
            .map(|_| Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let weights: Vec<f64> = (0..7).map(|_| rng.random_range(0.5..1.5)).collect();
        let m = weighted_geometric_median(&points, &weights, 2000, 1e-14);
        // local perturbations must not improve the objective
        let f0 = objective(&points, &weights, &m);
        for _ in 0..2000 {
            let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 1e-3;
            assert!(objective(&points, &weights, &(m + d)) >= f0 - 1e-12);
        }
    }
}
