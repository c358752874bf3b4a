//! Cross-Grammian analytics: quadrature inner products, the shear and
//! orientation index sets, displacement vectors, `Op,p` norms and decay fits.
//!
//! Inner products are taken directly in the frequency domain,
//! `<a, b> = integral of a_hat * conj(b_hat)`, which is where every atom in
//! this crate is defined. Since all atoms are centro-symmetric with real
//! windows, the integrand is conjugate-symmetric and the inner products are
//! real; the quadrature keeps the complex value and the tests confirm the
//! imaginary part vanishes.

use crate::atoms::{
    self, amplitude_window, curvelet_angle, shear_bound, support_box, AtomIndex, Cone,
    CurveletIndex, ShearletIndex, SupportRegion, WaveletIndex,
};
use crate::fits::linear_fit;
use crate::geometry::{bracket, norm2, parabolic_scaling, rotation, shear};
use crate::windows::WindowPair;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Tensor-product trapezoid quadrature controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Samples per phase oscillation (spec floor: 8).
    pub points_per_oscillation: f64,
    /// Samples across the narrowest window feature.
    pub points_per_feature: f64,
    /// Minimum points per axis.
    pub min_points: usize,
    /// Refusal cap: exceeding this per axis is an error, not a degradation.
    pub max_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points_per_oscillation: 8.0,
            points_per_feature: 24.0,
            min_points: 48,
            max_points: 4096,
        }
    }
}

impl QuadratureSpec {
    /// Doubled-resolution variant, used as an independent oracle in tests.
    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            points_per_oscillation: self.points_per_oscillation * 2.0,
            points_per_feature: self.points_per_feature * 2.0,
            min_points: self.min_points * 2,
            max_points: self.max_points * 2,
        }
    }
}

/// Narrowest window feature length an atom puts along the frequency axes.
fn feature_scale(idx: &AtomIndex) -> f64 {
    match idx {
        AtomIndex::Curvelet(c) => {
            let radial = f64::exp2(f64::from(c.j) - 2.0); // half ramp width
            let angular = 2.0 * f64::exp2(f64::from(c.j)) * f64::exp2(-0.5 * f64::from(c.j)) * 0.5;
            radial.min(angular)
        }
        AtomIndex::Shearlet(s) => {
            let radial = f64::exp2(f64::from(s.j) - 2.0);
            // slope ramp of width ~ 2^{-j/2}/2 at |xi_axis| <= 2^{j+1}
            let angular = f64::exp2(f64::from(s.j) + 1.0) * f64::exp2(-0.5 * f64::from(s.j)) * 0.25;
            radial.min(angular)
        }
        AtomIndex::Wavelet(w) => f64::exp2(f64::from(w.j) - 2.0),
    }
}

/// Symmetric bounding box (half-widths) of a support region.
fn bounding_halfwidths(r: &SupportRegion) -> [f64; 2] {
    match r {
        SupportRegion::CurveletWedge { radial, theta } => {
            let mut x: f64 = 0.0;
            let mut y: f64 = 0.0;
            for &rr in &[radial.lo, radial.hi] {
                for &t in &[theta.lo, theta.hi] {
                    x = x.max((rr * t.cos()).abs());
                    y = y.max((rr * t.sin()).abs());
                }
            }
            if theta.contains(FRAC_PI_2) {
                y = y.max(radial.hi);
            }
            if theta.contains(0.0) || theta.contains(PI) {
                x = x.max(radial.hi);
            }
            [x, y]
        }
        SupportRegion::ShearletStrip { cone, band, slope } => {
            if slope.is_empty() {
                return [0.0, 0.0];
            }
            let smax = slope.lo.abs().max(slope.hi.abs());
            let (a, b) = (band.hi, band.hi * smax);
            match cone {
                Cone::One => [a, b],
                Cone::Two => [b, a],
            }
        }
        SupportRegion::WaveletSquare { abs1, abs2 } => [abs1.hi, abs2.hi],
    }
}

/// Frequency-domain inner product `integral a_hat conj(b_hat) d xi` by tensor
/// trapezoid quadrature on the support-intersection bounding box.
///
/// Returns exact zero (no quadrature) when the supports are disjoint, and
/// refuses with [`Error::UnderResolved`] when the phase oscillation cannot be
/// resolved within the configured budget.
pub fn inner_product(
    win: &WindowPair,
    a: &AtomIndex,
    b: &AtomIndex,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let ra = support_box(a);
    let rb = support_box(b);
    if !ra.intersects(&rb) {
        return Ok(Complex64::ZERO);
    }
    let ha = bounding_halfwidths(&ra);
    let hb = bounding_halfwidths(&rb);
    let hw = [ha[0].min(hb[0]), ha[1].min(hb[1])];
    quadrature_on_box(win, a, b, hw, quad)
}

/// Same integral, forced over the UNION bounding box even when the support
/// prefilter says the atoms are disjoint. Used to certify exclusions: the
/// windows then vanish pointwise and the quadrature returns exactly zero.
pub fn inner_product_force_quadrature(
    win: &WindowPair,
    a: &AtomIndex,
    b: &AtomIndex,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let ha = bounding_halfwidths(&support_box(a));
    let hb = bounding_halfwidths(&support_box(b));
    let hw = [ha[0].max(hb[0]), ha[1].max(hb[1])];
    quadrature_on_box(win, a, b, hw, quad)
}

fn quadrature_on_box(
    win: &WindowPair,
    a: &AtomIndex,
    b: &AtomIndex,
    halfwidths: [f64; 2],
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let pa = atoms::position(a);
    let pb = atoms::position(b);
    let d = [pa[0] - pb[0], pa[1] - pb[1]];
    let feature = feature_scale(a).min(feature_scale(b));
    let norm = atoms::scale_norm(a) * atoms::scale_norm(b);

    let mut n = [0usize; 2];
    for axis in 0..2 {
        let extent = 2.0 * halfwidths[axis];
        if extent <= 0.0 {
            return Ok(Complex64::ZERO);
        }
        let n_feature = quad.points_per_feature * extent / feature;
        let n_phase = quad.points_per_oscillation * extent * d[axis].abs() / (2.0 * PI);
        let needed = n_feature.max(n_phase).ceil() as usize;
        if needed > quad.max_points {
            return Err(Error::UnderResolved {
                needed,
                cap: quad.max_points,
                detail: format!("pair {a} vs {b}, axis {axis}, |d|={:.3}", norm2(d)),
            });
        }
        n[axis] = needed.max(quad.min_points);
    }

    // trapezoid = midpoint-offset rectangle here: windows vanish smoothly at
    // the box edges, so the open rule keeps full order without edge weights
    let h = [
        2.0 * halfwidths[0] / n[0] as f64,
        2.0 * halfwidths[1] / n[1] as f64,
    ];
    let mut acc = Complex64::ZERO;
    for iy in 0..n[1] {
        let y = -halfwidths[1] + (iy as f64 + 0.5) * h[1];
        let mut row = Complex64::ZERO;
        for ix in 0..n[0] {
            let x = -halfwidths[0] + (ix as f64 + 0.5) * h[0];
            let xi = [x, y];
            let wa = amplitude_window(win, a, xi);
            if wa == 0.0 {
                continue;
            }
            let wb = amplitude_window(win, b, xi);
            if wb == 0.0 {
                continue;
            }
            let phase = d[0] * x + d[1] * y;
            row += Complex64::from_polar(wa * wb, phase);
        }
        acc += row;
    }
    Ok(acc * norm * h[0] * h[1])
}

// ---------------------------------------------------------------------------
// Index sets and displacement vector
// ---------------------------------------------------------------------------

/// Closed integer interval; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInterval {
    pub lo: i64,
    pub hi: i64,
}

impl IndexInterval {
    pub const EMPTY: IndexInterval = IndexInterval { lo: 1, hi: 0 };

    pub fn len(&self) -> usize {
        if self.lo > self.hi {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn intersect(&self, o: &IndexInterval) -> IndexInterval {
        IndexInterval {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// Shear index set `K_{j, jt, ell}`.
#[derive(Debug, Clone, Copy)]
pub struct KSet {
    /// Formula interval with floor/ceil rounding, before the shear clamp.
    pub raw: IndexInterval,
    /// `raw` intersected with `|k| <= ceil(2^{j/2})`.
    pub clamped: IndexInterval,
}

/// Shears whose supports can meet curvelet wedge `ell` (scale `jt`) at
/// shearlet scale `j`.
///
/// `ell` is the integer orientation index of [`CurveletIndex`], accepted as
/// a real so corner configurations between wedges can be probed. Returns the
/// empty set when a wedge edge leaves the cone's slope parameterization.
pub fn k_set(j: u32, jt: u32, ell: f64) -> KSet {
    let half_j = f64::exp2(0.5 * f64::from(j));
    let half_jt = f64::exp2(-0.5 * f64::from(jt));
    let upper_edge = half_jt * (1.0 + ell);
    let lower_edge = half_jt * (-1.0 + ell);
    if upper_edge.abs() >= FRAC_PI_2 || lower_edge.abs() >= FRAC_PI_2 {
        return KSet {
            raw: IndexInterval::EMPTY,
            clamped: IndexInterval::EMPTY,
        };
    }
    let lo = (-half_j * upper_edge.tan() - 1.0).floor() as i64;
    let hi = (-half_j * lower_edge.tan() + 1.0).ceil() as i64;
    let raw = IndexInterval { lo, hi };
    let s = shear_bound(j);
    KSet {
        raw,
        clamped: raw.intersect(&IndexInterval { lo: -s, hi: s }),
    }
}

/// Orientation index set `L_{j, jt, k}`.
#[derive(Debug, Clone, Copy)]
pub struct LSet {
    /// Real-valued formula bounds (the `+/-1` safety margins included).
    pub raw_lo: f64,
    pub raw_hi: f64,
    /// Integer orientations inside the raw bounds.
    pub raw: IndexInterval,
    /// `raw` intersected with the principal range `[0, ceil(2^{jt/2}) - 1]`;
    /// negative orientations alias (mod pi) to wedges outside that range and
    /// drop here.
    pub principal: IndexInterval,
}

/// Curvelet orientations (scale `jt`) whose wedges can meet shear `k` at
/// shearlet scale `j`.
///
/// The bounds are kept real-valued: under the integer-orientation convention
/// the paper's floor/ceil rounding would widen each side by a full index,
/// which its own displayed cardinality bound does not admit.
pub fn l_set(j: u32, jt: u32, k: i64) -> LSet {
    let half_j = f64::exp2(-0.5 * f64::from(j));
    let half_jt = f64::exp2(0.5 * f64::from(jt));
    let raw_lo = half_jt * (half_j * (-1.0 - k as f64)).atan() - 1.0;
    let raw_hi = half_jt * (half_j * (1.0 - k as f64)).atan() + 1.0;
    let raw = IndexInterval {
        lo: raw_lo.ceil() as i64,
        hi: raw_hi.floor() as i64,
    };
    let principal = raw.intersect(&IndexInterval {
        lo: 0,
        hi: half_jt.ceil() as i64 - 1,
    });
    LSet {
        raw_lo,
        raw_hi,
        raw,
        principal,
    }
}

/// Displacement vector
/// `b = A_{2^j} (S_k^T A_{2^-j} m - R_theta A_{2^-jt} mt)`.
pub fn b_vector(j: u32, k: i64, m: (i64, i64), jt: u32, ell: i64, mt: (i64, i64)) -> [f64; 2] {
    let a_j = parabolic_scaling(f64::exp2(f64::from(j)));
    let lhs = shear(k as f64)
        .transpose()
        .mul(&parabolic_scaling(f64::exp2(-f64::from(j))))
        .apply([m.0 as f64, m.1 as f64]);
    let rhs = rotation(curvelet_angle(jt, ell))
        .mul(&parabolic_scaling(f64::exp2(-f64::from(jt))))
        .apply([mt.0 as f64, mt.1 as f64]);
    a_j.apply([lhs[0] - rhs[0], lhs[1] - rhs[1]])
}

/// Proposition-style indicator prefilter for a shearlet/curvelet pair:
/// scale band `|j - jt| <= 2` plus the K and L interval conditions with the
/// wedge angle reduced into the shearlet's cone frame.
///
/// The intervals carry the formulas' safety margins, so a pair excluded here
/// has disjoint supports (certified by quadrature in the tests).
pub fn prop_indicator(s: &ShearletIndex, c: &CurveletIndex) -> bool {
    if (f64::from(s.j) - f64::from(c.j)).abs() > 2.0 {
        return false;
    }
    let theta = curvelet_angle(c.j, c.ell).rem_euclid(PI);
    // reduce the wedge angle into the cone frame: cone 1 measures from the
    // horizontal axis, cone 2 from the vertical
    let reduced = match s.cone {
        Cone::One => {
            if theta < FRAC_PI_2 {
                theta
            } else {
                theta - PI
            }
        }
        Cone::Two => FRAC_PI_2 - theta,
    };
    let q = reduced * f64::exp2(0.5 * f64::from(c.j));

    // K condition at the reduced orientation
    let half_j = f64::exp2(0.5 * f64::from(s.j));
    let half_jt = f64::exp2(-0.5 * f64::from(c.j));
    let upper_edge = half_jt * (1.0 + q);
    let lower_edge = half_jt * (-1.0 + q);
    if lower_edge >= FRAC_PI_2 || upper_edge <= -FRAC_PI_2 {
        return false;
    }
    let k_lo = if upper_edge >= FRAC_PI_2 {
        f64::NEG_INFINITY
    } else {
        (-half_j * upper_edge.tan() - 1.0).floor()
    };
    let k_hi = if lower_edge <= -FRAC_PI_2 {
        f64::INFINITY
    } else {
        (-half_j * lower_edge.tan() + 1.0).ceil()
    };
    if (s.k as f64) < k_lo || (s.k as f64) > k_hi {
        return false;
    }

    // L condition: reduced orientation against the raw interval with the
    // floor/ceil margins (safe superset)
    let l = l_set(s.j, c.j, s.k);
    q >= l.raw_lo.floor() && q <= l.raw_hi.ceil()
}

// ---------------------------------------------------------------------------
// Cross-Grammian assembly and Op,p norms
// ---------------------------------------------------------------------------

/// Finite truncation of an atom family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub j_max: u32,
    /// Positions with `|m|_inf <= m_radius`.
    pub m_radius: i64,
    /// Sparsity exponent carried along for norm evaluations.
    pub p: f64,
}

impl TruncationSpec {
    pub fn new(j_max: u32, m_radius: i64, p: f64) -> Self {
        assert!(m_radius >= 0 && p > 0.0 && p <= 1.0);
        TruncationSpec { j_max, m_radius, p }
    }
}

/// Which frame family a truncation enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameFamily {
    Shearlets,
    Curvelets,
    Wavelets,
}

/// All atom indices of a family within a truncation.
pub fn enumerate_family(family: FrameFamily, spec: &TruncationSpec) -> Vec<AtomIndex> {
    let mut out = Vec::new();
    let r = spec.m_radius;
    let positions: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| (a, b)))
        .collect();
    for j in 0..=spec.j_max {
        match family {
            FrameFamily::Shearlets => {
                let s = shear_bound(j);
                for cone in [Cone::One, Cone::Two] {
                    for k in -s..=s {
                        for &m in &positions {
                            out.push(AtomIndex::Shearlet(ShearletIndex { j, k, m, cone }));
                        }
                    }
                }
            }
            FrameFamily::Curvelets => {
                for ell in 0..atoms::wedge_count(j) {
                    for &m in &positions {
                        out.push(AtomIndex::Curvelet(CurveletIndex { j, ell, m }));
                    }
                }
            }
            FrameFamily::Wavelets => {
                for h in 1..=3u8 {
                    for &n in &positions {
                        out.push(AtomIndex::Wavelet(WaveletIndex { h, j: j as i32, n }));
                    }
                }
            }
        }
    }
    out
}

/// Sparse cross-Grammian between two finite index families.
#[derive(Debug, Clone)]
pub struct CrossGram {
    pub rows: Vec<AtomIndex>,
    pub cols: Vec<AtomIndex>,
    /// `(row, col, value)` triplets with `|value| >= threshold`.
    pub entries: Vec<(u32, u32, Complex64)>,
    pub threshold: f64,
}

impl CrossGram {
    pub fn op_p_norm(&self, p: f64) -> f64 {
        op_p_norm_from_triplets(
            self.rows.len(),
            self.cols.len(),
            self.entries.iter().map(|&(r, c, v)| (r, c, v.norm())),
            p,
        )
    }
}

/// `Op,p` norm from sparse `(row, col, |value|)` triplets:
/// `max( sup_rows (sum |.|^p), sup_cols (sum |.|^p) )^(1/p)`.
pub fn op_p_norm_from_triplets(
    n_rows: usize,
    n_cols: usize,
    triplets: impl Iterator<Item = (u32, u32, f64)>,
    p: f64,
) -> f64 {
    assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    let mut row_sums = vec![0.0f64; n_rows];
    let mut col_sums = vec![0.0f64; n_cols];
    for (r, c, v) in triplets {
        let w = v.powf(p);
        row_sums[r as usize] += w;
        col_sums[c as usize] += w;
    }
    let row_sup = row_sums.iter().cloned().fold(0.0f64, f64::max);
    let col_sup = col_sums.iter().cloned().fold(0.0f64, f64::max);
    row_sup.max(col_sup).powf(1.0 / p)
}

/// Assemble the shearlet x curvelet cross-Grammian by per-entry quadrature.
///
/// Pairs excluded by the scale/K/L indicators are never integrated; entries
/// below `threshold` in magnitude are dropped. Under-resolved quadrature
/// propagates as an error. For sweep-sized truncations use the streaming
/// engine in [`crate::sweep`] instead.
pub fn assemble_cross_gram(
    win: &WindowPair,
    rows: &TruncationSpec,
    cols: &TruncationSpec,
    threshold: f64,
    quad: &QuadratureSpec,
) -> Result<CrossGram> {
    let row_idx = enumerate_family(FrameFamily::Shearlets, rows);
    let col_idx = enumerate_family(FrameFamily::Curvelets, cols);
    let mut entries = Vec::new();
    for (ri, r) in row_idx.iter().enumerate() {
        let s = match r {
            AtomIndex::Shearlet(s) => s,
            _ => unreachable!(),
        };
        for (ci, c) in col_idx.iter().enumerate() {
            let cv = match c {
                AtomIndex::Curvelet(cv) => cv,
                _ => unreachable!(),
            };
            if !prop_indicator(s, cv) {
                continue;
            }
            if !atoms::supports_overlap(r, c) {
                continue;
            }
            let v = inner_product(win, r, c, quad)?;
            if v.norm() >= threshold {
                entries.push((ri as u32, ci as u32, v));
            }
        }
    }
    Ok(CrossGram {
        rows: row_idx,
        cols: col_idx,
        entries,
        threshold,
    })
}

// ---------------------------------------------------------------------------
// Decay fit
// ---------------------------------------------------------------------------

/// Result of a log-log decay fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares slope of `log |<sigma, gamma>|` against `log <|b|>` over
/// one Grammian slice.
///
/// `entries` pairs the bracketed displacement magnitude `<|b|>` with the
/// inner-product magnitude. Exact zeros are excluded (they carry no decay
/// information); fewer than 10 nonzero entries is an error.
pub fn decay_fit(entries: &[(f64, f64)]) -> Result<DecayFit> {
    let kept: Vec<(f64, f64)> = entries
        .iter()
        .copied()
        .filter(|&(_, v)| v > 0.0)
        .collect();
    if kept.is_empty() {
        return Err(Error::NoOverlap(0.0));
    }
    if kept.len() < 10 {
        return Err(Error::DegenerateFit(format!(
            "need >= 10 nonzero entries, got {}",
            kept.len()
        )));
    }
    let x: Vec<f64> = kept.iter().map(|&(b, _)| b.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&x, &y)?;
    Ok(DecayFit {
        slope,
        intercept,
        r_squared: r2,
        n_points: kept.len(),
    })
}

/// Convenience: `<|b|>` for a shearlet/curvelet index pair.
pub fn bracketed_b(j: u32, k: i64, m: (i64, i64), jt: u32, ell: i64, mt: (i64, i64)) -> f64 {
    bracket(norm2(b_vector(j, k, m, jt, ell, mt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{CurveletIndex, ShearletIndex, WaveletIndex};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn win() -> WindowPair {
        WindowPair::default_pair()
    }

    #[test]
    fn self_inner_product_positive_real() {
        let quad = QuadratureSpec::default();
        let eta = AtomIndex::Shearlet(ShearletIndex {
            j: 2,
            k: 1,
            m: (0, 0),
            cone: Cone::One,
        });
        let v = inner_product(&win(), &eta, &eta, &quad).unwrap();
        assert!(v.re > 0.0);
        assert!(v.im.abs() < 1e-12 * v.re);
    }

    #[test]
    fn scale_separated_pairs_are_exact_zero() {
        let quad = QuadratureSpec::default();
        let eta = AtomIndex::Shearlet(ShearletIndex {
            j: 0,
            k: 0,
            m: (1, 2),
            cone: Cone::One,
        });
        let mu = AtomIndex::Curvelet(CurveletIndex {
            j: 5,
            ell: 0,
            m: (0, 0),
        });
        assert_eq!(inner_product(&win(), &eta, &mu, &quad).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn conjugate_symmetry_against_doubled_oracle() {
        // 20 random overlapping pairs; doubled-resolution quadrature oracle
        let quad = QuadratureSpec::default();
        let oracle = quad.doubled();
        let w = win();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 20 {
            let j = rng.random_range(1..4u32);
            let jt = rng.random_range(j.saturating_sub(1)..(j + 2).min(4));
            let k = rng.random_range(-shear_bound(j)..=shear_bound(j));
            let ell = rng.random_range(0..atoms::wedge_count(jt));
            let a = AtomIndex::Shearlet(ShearletIndex {
                j,
                k,
                m: (rng.random_range(-2..3), rng.random_range(-2..3)),
                cone: Cone::One,
            });
            let b = AtomIndex::Curvelet(CurveletIndex {
                j: jt,
                ell,
                m: (rng.random_range(-2..3), rng.random_range(-2..3)),
            });
            if !atoms::supports_overlap(&a, &b) {
                continue;
            }
            let ab = inner_product(&w, &a, &b, &quad).unwrap();
            let ba = inner_product(&w, &b, &a, &quad).unwrap();
            let ab_or = inner_product(&w, &a, &b, &oracle).unwrap();
            let tol = 1e-8 + 1e-6 * ab_or.norm();
            assert!((ab - ba.conj()).norm() < tol, "conj symmetry: {ab} vs {ba}");
            assert!((ab - ab_or).norm() < 40.0 * tol, "oracle: {ab} vs {ab_or}");
            done += 1;
        }
    }

    #[test]
    fn under_resolved_quadrature_refuses() {
        let quad = QuadratureSpec {
            max_points: 64,
            ..QuadratureSpec::default()
        };
        let a = AtomIndex::Shearlet(ShearletIndex {
            j: 3,
            k: 0,
            m: (4000, 4000),
            cone: Cone::One,
        });
        let b = AtomIndex::Curvelet(CurveletIndex {
            j: 3,
            ell: 0,
            m: (0, 0),
        });
        match inner_product(&win(), &a, &b, &quad) {
            Err(Error::UnderResolved { .. }) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn k_set_matches_hand_arithmetic_at_origin() {
        // j = jt = 0, ell = 0: floor(-tan(1)-1) .. ceil(tan(1)+1) = [-3, 3],
        // clamped to [-1, 1]
        let ks = k_set(0, 0, 0.0);
        assert_eq!(ks.raw, IndexInterval { lo: -3, hi: 3 });
        assert_eq!(ks.clamped, IndexInterval { lo: -1, hi: 1 });
    }

    #[test]
    fn k_set_corner_counts() {
        // corner wedge: upper edge on the bisector; raw count -> 7
        for j in [16u32, 18, 20] {
            let corner = f64::exp2(0.5 * f64::from(j)) * std::f64::consts::FRAC_PI_4 - 1.0;
            let ks = k_set(j, j, corner);
            assert_eq!(ks.raw.len(), 7, "raw #K at j={j}");
            let clamped = ks.clamped.len();
            assert!((6..=8).contains(&clamped), "clamped #K={clamped} at j={j}");
            // paper's displayed bound on the clamped operation result
            let bound = f64::exp2(0.5 * f64::from(j))
                * (1.0 - (std::f64::consts::FRAC_PI_4 - 2.0 * f64::exp2(-0.5 * f64::from(j))).tan())
                + 3.0;
            assert!(
                (clamped as f64) <= bound,
                "j={j}: #K={clamped} > bound={bound}"
            );
        }
    }

    #[test]
    fn l_set_counts_and_bound() {
        for j in [16u32, 18, 20] {
            let ls = l_set(j, j, 0);
            assert_eq!(ls.raw.len(), 3, "raw #L at j={j}"); // {-1, 0, 1}
            let p = ls.principal.len();
            assert!((2..=4).contains(&p));
            let a = f64::exp2(0.5 * f64::from(j)) * f64::exp2(-0.5 * f64::from(j)).atan();
            let bound = (a - 1.0) / PI + 3.0;
            assert!((p as f64) <= bound, "j={j}: #L={p} > bound={bound}");
        }
    }

    #[test]
    fn l_set_overlap_soundness() {
        // ell outside the raw L interval (after mod-pi reduction) implies the
        // supports do not meet angularly; checked against the geometry
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 200 {
            let j = rng.random_range(1..6u32);
            let k = rng.random_range(-shear_bound(j)..=shear_bound(j));
            let ell = rng.random_range(0..atoms::wedge_count(j));
            let s = ShearletIndex {
                j,
                k,
                m: (0, 0),
                cone: Cone::One,
            };
            let c = CurveletIndex { j, ell, m: (0, 0) };
            let geometric = atoms::supports_overlap(
                &AtomIndex::Shearlet(s),
                &AtomIndex::Curvelet(c),
            );
            if geometric {
                assert!(
                    prop_indicator(&s, &c),
                    "overlapping pair escaped the indicator: j={j} k={k} l={ell}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn b_vector_identities() {
        // aligned case reduces to m
        let b = b_vector(3, 0, (3, 5), 3, 0, (0, 0));
        assert_abs_diff_eq!(b[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 5.0, epsilon = 1e-12);
        // A_{2^j} S_k^T A_{2^-j} m = (m1, 2^{-j/2} k m1 + m2)
        for (j, k, m) in [(2u32, 1i64, (3i64, -2i64)), (4, -3, (7, 5)), (5, 2, (-4, 9))] {
            let b = b_vector(j, k, m, j, 0, (0, 0));
            assert_abs_diff_eq!(b[0], m.0 as f64, epsilon = 1e-10);
            assert_abs_diff_eq!(
                b[1],
                f64::exp2(-0.5 * f64::from(j)) * k as f64 * m.0 as f64 + m.1 as f64,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn b_vector_against_matrix_oracle() {
        // explicit step-by-step 2x2 arithmetic on 100 random tuples
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let j = rng.random_range(0..7u32);
            let jt = rng.random_range(0..7u32);
            let k = rng.random_range(-10..=10i64);
            let ell = rng.random_range(0..atoms::wedge_count(jt));
            let m = (rng.random_range(-20..=20), rng.random_range(-20..=20));
            let mt = (rng.random_range(-20..=20), rng.random_range(-20..=20));

            let two_j = f64::exp2(f64::from(j));
            let (s, c) = curvelet_angle(jt, ell).sin_cos();
            // S_k^T A_{2^-j} m
            let v1 = (m.0 as f64 / two_j, k as f64 * m.0 as f64 / two_j
                + m.1 as f64 / two_j.sqrt());
            // R_theta A_{2^-jt} mt, rotation by -theta
            let tjt = f64::exp2(f64::from(jt));
            let (w1, w2) = (mt.0 as f64 / tjt, mt.1 as f64 / tjt.sqrt());
            let v2 = (c * w1 + s * w2, -s * w1 + c * w2);
            let expect = [two_j * (v1.0 - v2.0), two_j.sqrt() * (v1.1 - v2.1)];

            let got = b_vector(j, k, m, jt, ell, mt);
            assert_abs_diff_eq!(got[0], expect[0], epsilon = 1e-9 * (1.0 + expect[0].abs()));
            assert_abs_diff_eq!(got[1], expect[1], epsilon = 1e-9 * (1.0 + expect[1].abs()));
        }
    }

    #[test]
    fn op_p_norm_small_matrices() {
        // identity
        let id = [(0u32, 0u32, 1.0), (1, 1, 1.0)];
        for p in [1.0, 0.5, 0.25] {
            assert_abs_diff_eq!(
                op_p_norm_from_triplets(2, 2, id.iter().copied(), p),
                1.0,
                epsilon = 1e-14
            );
        }
        // [[1, 1/2], [1/2, 1]]
        let m = [
            (0u32, 0u32, 1.0),
            (0, 1, 0.5),
            (1, 0, 0.5),
            (1, 1, 1.0),
        ];
        assert_abs_diff_eq!(
            op_p_norm_from_triplets(2, 2, m.iter().copied(), 1.0),
            1.5,
            epsilon = 1e-14
        );
        let expect = (1.0 + 0.5f64.sqrt()).powi(2);
        assert_abs_diff_eq!(
            op_p_norm_from_triplets(2, 2, m.iter().copied(), 0.5),
            expect,
            epsilon = 1e-12
        );
        // empty matrix
        assert_eq!(op_p_norm_from_triplets(3, 3, std::iter::empty(), 1.0), 0.0);
    }

    #[test]
    fn op_p_norm_transpose_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let trip: Vec<(u32, u32, f64)> = (0..40)
            .map(|_| {
                (
                    rng.random_range(0..6u32),
                    rng.random_range(0..8u32),
                    rng.random_range(0.0..2.0),
                )
            })
            .collect();
        let t: Vec<(u32, u32, f64)> = trip.iter().map(|&(r, c, v)| (c, r, v)).collect();
        for p in [1.0, 2.0 / 3.0, 0.4] {
            let a = op_p_norm_from_triplets(6, 8, trip.iter().copied(), p);
            let b = op_p_norm_from_triplets(8, 6, t.iter().copied(), p);
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn lemma_transfer_bound() {
        // ||M^T c||_p^p <= ||M||_Op,p^p for ||c||_p <= 1, p <= 1
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 7usize;
        let mut m = vec![vec![0.0f64; n]; n];
        let mut trip = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if rng.random_bool(0.4) {
                    let v: f64 = rng.random_range(0.0..1.5);
                    m[r][c] = v * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                    trip.push((r as u32, c as u32, m[r][c].abs()));
                }
            }
        }
        for p in [1.0, 0.7, 0.5] {
            let norm_p = op_p_norm_from_triplets(n, n, trip.iter().copied(), p).powf(p);
            for _ in 0..20 {
                let mut c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let cp: f64 = c.iter().map(|v| v.abs().powf(p)).sum();
                let scale = cp.powf(-1.0 / p);
                c.iter_mut().for_each(|v| *v *= scale);
                let mut lhs = 0.0;
                for col in 0..n {
                    let dot: f64 = (0..n).map(|r| m[r][col] * c[r]).sum();
                    lhs += dot.abs().powf(p);
                }
                assert!(lhs <= norm_p + 1e-9, "p={p}: {lhs} > {norm_p}");
            }
        }
    }

    #[test]
    fn decay_fit_planted_exponent() {
        let entries: Vec<(f64, f64)> = (1..40)
            .map(|i| {
                let b = bracket(i as f64 * 0.7);
                (b, b.powi(-6))
            })
            .collect();
        let fit = decay_fit(&entries).unwrap();
        assert_abs_diff_eq!(fit.slope, -6.0, epsilon = 1e-6);
        // permutation invariance
        let mut shuffled = entries.clone();
        shuffled.reverse();
        shuffled.swap(3, 17);
        let fit2 = decay_fit(&shuffled).unwrap();
        assert_abs_diff_eq!(fit.slope, fit2.slope, epsilon = 1e-12);
        // all-zero magnitudes
        let zeros: Vec<(f64, f64)> = (1..30).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(decay_fit(&zeros), Err(Error::NoOverlap(_))));
    }

    #[test]
    fn assemble_small_gram() {
        let w = win();
        let quad = QuadratureSpec {
            points_per_feature: 12.0,
            ..QuadratureSpec::default()
        };
        let rows = TruncationSpec::new(1, 1, 1.0);
        let cols = TruncationSpec::new(1, 1, 1.0);
        let g = assemble_cross_gram(&w, &rows, &cols, 1e-12, &quad).unwrap();
        assert!(!g.entries.is_empty());
        // every stored entry respects the threshold and the support filter
        for &(r, c, v) in &g.entries {
            assert!(v.norm() >= g.threshold);
            assert!(atoms::supports_overlap(
                &g.rows[r as usize],
                &g.cols[c as usize]
            ));
        }
        // norm is finite and positive
        let n1 = g.op_p_norm(1.0);
        assert!(n1.is_finite() && n1 > 0.0);
    }

    #[test]
    fn wavelet_cross_scale_orthogonality() {
        // disjoint coronae: |j - j'| >= 2 gives exact zero
        let quad = QuadratureSpec::default();
        let a = AtomIndex::Wavelet(WaveletIndex {
            h: 1,
            j: 2,
            n: (1, 0),
        });
        let b = AtomIndex::Wavelet(WaveletIndex {
            h: 3,
            j: 4,
            n: (0, 2),
        });
        assert_eq!(inner_product(&win(), &a, &b, &quad).unwrap(), Complex64::ZERO);
    }
}
