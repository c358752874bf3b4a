//! Cartoon-like test images and n-term approximation rate curves.
//!
//! A cartoon is `f = f0 + f1 * chi_B` on `[0,1]^2`: two compactly supported
//! C^2 bumps, one cut by a star-shaped region whose boundary is a short
//! radial Fourier series with curvature bounded by `nu`. Images render on a
//! dyadic grid with supersampled edge pixels; approximation curves measure
//! the squared error of keeping the `N` largest frame coefficients.

use crate::fits::{bilinear_fit, linear_fit};
use crate::grid::FrequencyGrid;
use crate::transform::{
    analyze, keep_top, magnitude_order, plan, synthesize, FrameKind, FramePlan,
};
use crate::windows::WindowPair;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// C^2 bump profile: `cos^4(pi t / 2)` on `[-1, 1]`.
fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let c = (0.5 * PI * t).cos();
        c * c * c * c
    }
}

/// Radial boundary `rho(theta)` as a short Fourier series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarBoundary {
    pub base: f64,
    /// `(cos_amp, sin_amp)` per harmonic, starting at frequency 1.
    pub harmonics: Vec<(f64, f64)>,
}

impl StarBoundary {
    pub fn rho(&self, theta: f64) -> f64 {
        let mut r = self.base;
        for (h, &(a, b)) in self.harmonics.iter().enumerate() {
            let w = (h + 1) as f64 * theta;
            r += a * w.cos() + b * w.sin();
        }
        r
    }

    pub fn rho_d1(&self, theta: f64) -> f64 {
        let mut r = 0.0;
        for (h, &(a, b)) in self.harmonics.iter().enumerate() {
            let k = (h + 1) as f64;
            let w = k * theta;
            r += k * (-a * w.sin() + b * w.cos());
        }
        r
    }

    pub fn rho_d2(&self, theta: f64) -> f64 {
        let mut r = 0.0;
        for (h, &(a, b)) in self.harmonics.iter().enumerate() {
            let k = (h + 1) as f64;
            let w = k * theta;
            r += -k * k * (a * w.cos() + b * w.sin());
        }
        r
    }

    /// Signed curvature of the polar curve:
    /// `kappa = (rho^2 + 2 rho'^2 - rho rho'') / (rho^2 + rho'^2)^{3/2}`.
    pub fn curvature(&self, theta: f64) -> f64 {
        let r = self.rho(theta);
        let r1 = self.rho_d1(theta);
        let r2 = self.rho_d2(theta);
        (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5)
    }

    pub fn max_abs_curvature(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.curvature(2.0 * PI * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// A cartoon-like image specification plus its rendered grid cache.
#[derive(Debug, Clone)]
pub struct CartoonImage {
    pub seed: u64,
    pub nu: f64,
    pub center: [f64; 2],
    pub boundary: StarBoundary,
    /// (center, radius, amplitude) of the smooth background bump.
    pub f0: ([f64; 2], f64, f64),
    /// Amplitude of the jump across the boundary.
    pub f1: ([f64; 2], f64, f64),
    pub grid_n: usize,
    pub pixels: Vec<f64>,
}

impl CartoonImage {
    fn f0_at(&self, x: f64, y: f64) -> f64 {
        let (c, r, a) = self.f0;
        a * bump(((x - c[0]).hypot(y - c[1])) / r)
    }

    fn f1_at(&self, x: f64, y: f64) -> f64 {
        let (c, r, a) = self.f1;
        a * bump(((x - c[0]).hypot(y - c[1])) / r)
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let theta = dy.atan2(dx);
        dx.hypot(dy) < self.boundary.rho(theta)
    }

    /// Value of the continuum cartoon at a point of `[0,1]^2`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let mut v = self.f0_at(x, y);
        if self.inside(x, y) {
            v += self.f1_at(x, y);
        }
        v
    }
}

const MAX_ATTEMPTS: u32 = 400;

/// Draw a random cartoon in the class: star-shaped region of curvature at
/// most `nu`, C^2 bumps with `C^2`-norms at most one, rendered at `grid_n`.
pub fn make_cartoon(seed: u64, nu: f64, grid_n: usize) -> Result<CartoonImage> {
    if nu <= 0.0 {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..MAX_ATTEMPTS {
        let base = rng.random_range(0.17..0.26);
        let n_harm = rng.random_range(2..=5usize);
        let harmonics: Vec<(f64, f64)> = (1..=n_harm)
            .map(|h| {
                let scale = 0.16 * base / (h * h) as f64;
                (
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                )
            })
            .collect();
        let boundary = StarBoundary { base, harmonics };
        // geometry checks
        let mut rho_min = f64::INFINITY;
        let mut rho_max: f64 = 0.0;
        for i in 0..512 {
            let r = boundary.rho(2.0 * PI * i as f64 / 512.0);
            rho_min = rho_min.min(r);
            rho_max = rho_max.max(r);
        }
        if rho_min < 0.08 {
            continue;
        }
        if boundary.max_abs_curvature(2048) > nu {
            continue;
        }
        let center = [
            rng.random_range(0.42..0.58),
            rng.random_range(0.42..0.58),
        ];
        if center[0] - rho_max < 0.05
            || center[0] + rho_max > 0.95
            || center[1] - rho_max < 0.05
            || center[1] + rho_max > 0.95
        {
            continue;
        }

        // bumps: amplitudes scaled so each piece has C^2 norm <= 1
        let f0_r = rng.random_range(0.3..0.45);
        let f0_c = [
            rng.random_range(0.4..0.6),
            rng.random_range(0.4..0.6),
        ];
        let f1_r = rng.random_range(0.35..0.5);
        let f0_amp = c2_safe_amplitude(f0_r);
        let f1_amp = c2_safe_amplitude(f1_r);

        let mut img = CartoonImage {
            seed,
            nu,
            center,
            boundary,
            f0: (f0_c, f0_r, f0_amp),
            f1: (center, f1_r, f1_amp),
            grid_n,
            pixels: Vec::new(),
        };
        img.pixels = render(&img, grid_n);
        return Ok(img);
    }
    Err(Error::CartoonRejection {
        seed,
        nu,
        attempts: MAX_ATTEMPTS,
    })
}

/// Amplitude making `a * bump(|x - c| / r)` have `C^2` norm at most one.
///
/// `sum_{|alpha|<=2} ||D^alpha||_inf <= a (1 + 2 g1/r + 3 g2/r^2)` with
/// `g1, g2` the profile derivative sups; sampled bounds `g1 < 1.6`,
/// `g2 < 5.0`.
fn c2_safe_amplitude(r: f64) -> f64 {
    1.0 / (1.0 + 2.0 * 1.6 / r + 3.0 * 5.0 / (r * r))
}

/// Render on an `n x n` grid over `[0,1)^2` with 4x4 supersampling of pixels
/// near the jump curve.
fn render(img: &CartoonImage, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut out = vec![0.0f64; n * n];
    for row in 0..n {
        for col in 0..n {
            let x = (col as f64 + 0.5) * h;
            let y = (row as f64 + 0.5) * h;
            let dx = x - img.center[0];
            let dy = y - img.center[1];
            let dist = dx.hypot(dy) - img.boundary.rho(dy.atan2(dx));
            let v = if dist.abs() < 2.0 * h {
                // supersample across the edge
                let mut acc = 0.0;
                for sr in 0..4 {
                    for sc in 0..4 {
                        let xs = (col as f64 + (sc as f64 + 0.5) / 4.0) * h;
                        let ys = (row as f64 + (sr as f64 + 0.5) / 4.0) * h;
                        acc += img.value(xs, ys);
                    }
                }
                acc / 16.0
            } else {
                img.value(x, y)
            };
            out[row * n + col] = v;
        }
    }
    out
}

/// One measured approximation curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateCurve {
    pub frame: String,
    pub seed: u64,
    /// `(N, squared error)` pairs, squared error nonincreasing in `N`.
    pub points: Vec<(usize, f64)>,
    /// Energy outside the frame's covered band (reported, not mixed in).
    pub uncovered_sq: f64,
}

/// Squared-error curve of n-term approximation for one frame.
///
/// Low-frequency content is handled by the plan's coarse tile (always kept),
/// so errors measure the band-pass tail alone; the part of the image outside
/// the covered band is reported separately in `uncovered_sq`.
pub fn approximation_curve(
    win: &WindowPair,
    img: &CartoonImage,
    kind: FrameKind,
    n_list: &[usize],
) -> Result<RateCurve> {
    let grid = FrequencyGrid::new(img.grid_n)?;
    let fplan = plan(win, kind, grid, grid.max_scale());
    approximation_curve_with_plan(&fplan, img, n_list)
}

/// Same as [`approximation_curve`] but reusing a prebuilt plan.
pub fn approximation_curve_with_plan(
    fplan: &FramePlan,
    img: &CartoonImage,
    n_list: &[usize],
) -> Result<RateCurve> {
    let coeffs = analyze(fplan, &img.pixels)?;
    let covered = synthesize(fplan, &coeffs)?;
    let uncovered_sq = img
        .pixels
        .iter()
        .zip(&covered)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let order = magnitude_order(&coeffs);
    let mut points = Vec::with_capacity(n_list.len());
    for &n_keep in n_list {
        let trunc = keep_top(&coeffs, &order, n_keep);
        let approx = synthesize(fplan, &trunc)?;
        let err_sq = covered
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        points.push((n_keep, err_sq));
    }
    Ok(RateCurve {
        frame: fplan.kind.to_string(),
        seed: img.seed,
        points,
        uncovered_sq,
    })
}

/// Fitted exponents of an approximation curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    /// Exponent of `N` in the squared error.
    pub slope: f64,
    /// Exponent of `log N`.
    pub log_exponent: f64,
    pub intercept: f64,
    pub n_points: usize,
}

/// Least squares of `log(squared error)` on `(log N, log log N)`.
///
/// Requires at least 6 points spanning two decades of `N`; points whose
/// error has collapsed to the numerical floor are excluded.
pub fn rate_fit(curve: &RateCurve) -> Result<RateFit> {
    let floor = curve
        .points
        .iter()
        .map(|&(_, e)| e)
        .fold(0.0f64, f64::max)
        * 1e-10;
    let pts: Vec<(usize, f64)> = curve
        .points
        .iter()
        .copied()
        .filter(|&(n, e)| n >= 2 && e > floor)
        .collect();
    if pts.len() < 6 {
        return Err(Error::DegenerateFit(format!(
            "need >= 6 usable points, got {}",
            pts.len()
        )));
    }
    let spread = pts.last().unwrap().0 as f64 / pts[0].0 as f64;
    if spread < 100.0 {
        return Err(Error::DegenerateFit(format!(
            "N range spans only a factor {spread:.1}, need >= 100"
        )));
    }
    let x1: Vec<f64> = pts.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let x2: Vec<f64> = pts.iter().map(|&(n, _)| (n as f64).ln().ln()).collect();
    let y: Vec<f64> = pts.iter().map(|&(_, e)| e.ln()).collect();
    let (slope, log_exponent, intercept) = bilinear_fit(&x1, &x2, &y)?;
    Ok(RateFit {
        slope,
        log_exponent,
        intercept,
        n_points: pts.len(),
    })
}

/// Exponent fit of sorted coefficient magnitudes `|c|_(n) ~ n^s (log n)^t`
/// over `n` in `[n_lo, n_hi]`.
pub fn coefficient_decay_fit(
    sorted_magnitudes: &[f64],
    n_lo: usize,
    n_hi: usize,
) -> Result<(f64, f64)> {
    let hi = n_hi.min(sorted_magnitudes.len());
    if n_lo < 2 || hi <= n_lo * 8 {
        return Err(Error::DegenerateFit("coefficient range too short".into()));
    }
    // sample log-uniformly
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    let mut y = Vec::new();
    let steps = 60usize;
    for i in 0..steps {
        let n = (n_lo as f64 * ((hi as f64 / n_lo as f64).powf(i as f64 / (steps - 1) as f64)))
            .round() as usize;
        let v = sorted_magnitudes[n - 1];
        if v <= 0.0 {
            continue;
        }
        x1.push((n as f64).ln());
        x2.push((n as f64).ln().ln());
        y.push(v.ln());
    }
    let (s, t, _) = bilinear_fit(&x1, &x2, &y)?;
    Ok((s, t))
}

/// Plain log-log slope of an error curve (no log-log regressor).
pub fn simple_rate_slope(points: &[(usize, f64)]) -> Result<f64> {
    let x: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    Ok(linear_fit(&x, &y)?.0)
}
