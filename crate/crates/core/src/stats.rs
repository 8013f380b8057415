//! Least-squares rate fits.

/// Slope of `ln y` against `ln x` over pairs with both coordinates positive.
/// `None` when fewer than two usable pairs remain or all `x` coincide.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law_exponent() {
        let xs: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.sqrt()).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
        assert_eq!(loglog_slope(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert_eq!(loglog_slope(&[1.0, 2.0], &[0.0, 0.0]), None);
    }
}
