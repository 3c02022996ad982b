use std::f64::consts::PI;

use super::point::Point;

/// Chebyshev points `(1 - cos(π (i + 1/2) / n)) / 2` on `[0, 1]`.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (1.0 - (PI * (i as f64 + 0.5) / n as f64).cos()) / 2.0)
        .collect()
}

/// The rationals `t / N^2`, `0 <= t < N^2`, where mask zeros live.
pub fn rational_grid(base: u64) -> Vec<Point> {
    let m = (base as i128) * (base as i128);
    (0..m).map(|t| Point::rational(t, m)).collect()
}

/// Chebyshev points together with the rationals `t / N^2` when there are at most
/// `max_rationals` of them.
pub fn sampling_grid(resolution: usize, base: u64, max_rationals: usize) -> Vec<Point> {
    let mut out: Vec<Point> = chebyshev_grid(resolution).into_iter().map(Point::from_f64).collect();
    if (base as u128).pow(2) <= max_rationals as u128 {
        out.extend(rational_grid(base));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = chebyshev_grid(64);
        assert_eq!(g.len(), 64);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g[0] > 0.0 && g[63] < 1.0);
        assert_eq!(rational_grid(4).len(), 16);
        assert_eq!(sampling_grid(8, 4, 100).len(), 24);
        assert_eq!(sampling_grid(8, 24, 100).len(), 8);
    }
}
