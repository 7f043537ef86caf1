//! Small numerical helpers shared across modules.

/// Trapezoidal integral of `y` over the (non-uniform) grid `x`.
///
/// Panics if the slices differ in length; returns 0 for fewer than 2 points.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "grid/value length mismatch");
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}

/// Least-squares straight line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    (a, b)
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Solve the dense system `A x = b` in place by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`. Returns `None` if singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

/// Invert a small dense matrix by Gauss-Jordan. Returns `None` if singular.
pub fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut aug = vec![0.0; n * 2 * n];
    for r in 0..n {
        for c in 0..n {
            aug[r * 2 * n + c] = a[r * n + c];
        }
        aug[r * 2 * n + n + r] = 1.0;
    }
    let w = 2 * n;
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if aug[row * w + col].abs() > aug[pivot * w + col].abs() {
                pivot = row;
            }
        }
        if aug[pivot * w + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..w {
                aug.swap(col * w + k, pivot * w + k);
            }
        }
        let diag = aug[col * w + col];
        for k in 0..w {
            aug[col * w + k] /= diag;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = aug[row * w + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..w {
                aug[row * w + k] -= factor * aug[col * w + k];
            }
        }
    }
    let mut inv = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            inv[r * n + c] = aug[r * w + n + c];
        }
    }
    Some(inv)
}

/// Index of the largest value; ties resolve to the first occurrence.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Peak location and full width at half maximum of a single-peaked sampled
/// curve, measured above the given baseline. Half-maximum crossings are
/// linearly interpolated. Returns `None` when either crossing is missing.
pub fn peak_and_fwhm(x: &[f64], y: &[f64], baseline: f64) -> Option<(f64, f64)> {
    let ipk = argmax(y);
    let peak = y[ipk] - baseline;
    if peak <= 0.0 {
        return None;
    }
    let half = baseline + 0.5 * peak;
    // walk left from the peak
    let mut left = None;
    for i in (1..=ipk).rev() {
        if y[i - 1] <= half && y[i] > half {
            let t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            left = Some(x[i - 1] + t * (x[i] - x[i - 1]));
            break;
        }
    }
    let mut right = None;
    for i in ipk..(y.len() - 1) {
        if y[i] > half && y[i + 1] <= half {
            let t = (y[i] - half) / (y[i] - y[i + 1]);
            right = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some((x[ipk], r - l)),
        _ => None,
    }
}

/// Mean and (unbiased) standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_matches_analytic_parabola() {
        let x: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!((trapezoid(&x, &y) - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.25 * v).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-12);
        assert!((b + 0.25).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_quadratic_max() {
        let m = golden_section_max(|x| -(x - 2.5) * (x - 2.5), 0.0, 10.0, 1e-10);
        assert!((m - 2.5).abs() < 1e-8);
    }

    #[test]
    fn solve_and_invert_agree() {
        let a = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        let x = solve_dense(&mut a.to_vec(), &mut b.to_vec(), 3).unwrap();
        let inv = invert_dense(&a, 3).unwrap();
        for r in 0..3 {
            let xi: f64 = (0..3).map(|c| inv[r * 3 + c] * b[c]).sum();
            assert!((xi - x[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn fwhm_of_sampled_lorentzian() {
        let x: Vec<f64> = (0..4001).map(|i| -2.0 + i as f64 * 0.001).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + (v / 0.1).powi(2))).collect();
        let (peak, fwhm) = peak_and_fwhm(&x, &y, 0.0).unwrap();
        assert!(peak.abs() < 1e-9);
        assert!((fwhm - 0.2).abs() < 1e-3);
    }
}
