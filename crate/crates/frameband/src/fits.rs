//! Small least-squares helpers shared by the decay and rate fits.

use crate::{Error, Result};

/// Ordinary least squares of `y` on `x` with intercept.
///
/// Returns `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need >= 2 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("zero spread in x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok((slope, intercept, r2))
}

/// Least squares of `y` on two regressors plus intercept.
///
/// Returns `(b1, b2, intercept)` minimizing `|y - b1 x1 - b2 x2 - c|^2`.
pub fn bilinear_fit(x1: &[f64], x2: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = y.len();
    if x1.len() != n || x2.len() != n || n < 3 {
        return Err(Error::DegenerateFit("need >= 3 paired points".into()));
    }
    let nf = n as f64;
    let m1 = x1.iter().sum::<f64>() / nf;
    let m2 = x2.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let u = x1[i] - m1;
        let v = x2[i] - m2;
        let w = y[i] - my;
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * w;
        b2 += v * w;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-12 * (a11 * a22).max(1.0) {
        return Err(Error::DegenerateFit("collinear regressors".into()));
    }
    let c1 = (a22 * b1 - a12 * b2) / det;
    let c2 = (a11 * b2 - a12 * b1) / det;
    Ok((c1, c2, my - c1 * m1 - c2 * m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_planted_line() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 / 3.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| -2.5 * v + 0.7).collect();
        let (s, c, r2) = linear_fit(&x, &y).unwrap();
        assert_abs_diff_eq!(s, -2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn permutation_invariant() {
        let x = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0];
        let y = [2.0, 2.9, 4.2, 5.8, 9.1, 13.5];
        let (s1, _, _) = linear_fit(&x, &y).unwrap();
        let xp = [13.0, 1.0, 5.0, 3.0, 8.0, 2.0];
        let yp = [13.5, 2.0, 5.8, 4.2, 9.1, 2.9];
        let (s2, _, _) = linear_fit(&xp, &yp).unwrap();
        assert_abs_diff_eq!(s1, s2, epsilon = 1e-14);
    }

    #[test]
    fn bilinear_recovers_planted() {
        let mut x1 = vec![];
        let mut x2 = vec![];
        let mut y = vec![];
        for i in 1..60 {
            let n = i as f64 * 7.0;
            x1.push(n.ln());
            x2.push(n.ln().ln());
            y.push(-2.0 * n.ln() + 3.0 * n.ln().ln() + 0.4);
        }
        let (b1, b2, c) = bilinear_fit(&x1, &x2, &y).unwrap();
        assert_abs_diff_eq!(b1, -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b2, 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(c, 0.4, epsilon = 1e-8);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
