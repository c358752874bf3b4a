//! Streaming evaluation of truncated shearlet x curvelet cross-Grammians.
//!
//! Direct per-entry quadrature cannot touch sweep-sized truncations (billions
//! of index pairs). This engine exploits the translation structure instead:
//! for fixed scales, shear, cone and wedge, every `(m, mt)` entry is one
//! evaluation of a single kernel
//!
//! `f(d) = integral of windows(xi) * exp(i <d, xi>) d xi`,
//!
//! where `d` is the displacement of the two atom centers. In parabolic
//! coordinates the window product lives on an O(1) box, so one moderately
//! sized FFT tabulates the kernel envelope `h` on a `b = A_{2^j} d` grid;
//! each entry is then `2^{3(j-jt)/4} * 2 Re(e^{i<b,u_c>} h(b))` with the
//! oscillatory factor evaluated exactly per pair and only the smooth envelope
//! interpolated. Row and column `p`-sums for nested truncation levels
//! accumulate in a single pass over all pairs.

use crate::atoms::{
    self, curvelet_angle, shear_bound, support_box, wedge_count, AtomIndex, Cone, CurveletIndex,
    ShearletIndex, SupportRegion,
};
use crate::geometry::{parabolic_scaling, rotation, Mat2};
use crate::gram::{CrossGram, TruncationSpec};
use crate::grid::fft2;
use crate::windows::WindowPair;
use crate::Result;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// One truncation level of the sweep (levels must be nested).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub j_max: u32,
    pub m_radius: i64,
}

/// Norm data for one level and one exponent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PNorm {
    pub p: f64,
    pub row_sup: f64,
    pub col_sup: f64,
    pub op_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelNorms {
    pub level: SweepLevel,
    pub norms: Vec<PNorm>,
}

/// Convergence table of `op_p_norm` over nested truncations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub p: f64,
    pub rows: Vec<(SweepLevel, f64)>,
    /// Last increment over the final value.
    pub saturation_ratio: f64,
}

// ---------------------------------------------------------------------------
// Kernel tabulation
// ---------------------------------------------------------------------------

pub(crate) struct Kernel {
    /// `h` envelope, row-major `n1 x n2`, real and imaginary parts.
    hre: Vec<f32>,
    him: Vec<f32>,
    n1: usize,
    n2: usize,
    db1: f64,
    db2: f64,
    /// modulation center in `u` coordinates
    uc: [f64; 2],
    /// overall prefactor applied to `2 Re(e^{i<b,uc>} h(b))`
    prefactor: f64,
}

impl Kernel {
    /// Entry value at displacement `b`.
    #[inline]
    pub(crate) fn entry(&self, b: [f64; 2]) -> f64 {
        let g1 = b[0] / self.db1 + 0.5 * self.n1 as f64;
        let g2 = b[1] / self.db2 + 0.5 * self.n2 as f64;
        if g1 < 0.0 || g2 < 0.0 || g1 >= (self.n1 - 1) as f64 || g2 >= (self.n2 - 1) as f64 {
            return 0.0;
        }
        let i1 = g1 as usize;
        let i2 = g2 as usize;
        let f1 = g1 - i1 as f64;
        let f2 = g2 - i2 as f64;
        let idx = i1 * self.n2 + i2;
        let lerp = |a: f32, b: f32, c: f32, d: f32| -> f64 {
            let ab = a as f64 + (b as f64 - a as f64) * f2;
            let cd = c as f64 + (d as f64 - c as f64) * f2;
            ab + (cd - ab) * f1
        };
        let re = lerp(
            self.hre[idx],
            self.hre[idx + 1],
            self.hre[idx + self.n2],
            self.hre[idx + self.n2 + 1],
        );
        let im = lerp(
            self.him[idx],
            self.him[idx + 1],
            self.him[idx + self.n2],
            self.him[idx + self.n2 + 1],
        );
        let phi = b[0] * self.uc[0] + b[1] * self.uc[1];
        let (s, c) = phi.sin_cos();
        self.prefactor * (c * re - s * im)
    }
}

fn next_fft_size(n: usize) -> usize {
    let mut m = n.max(8);
    loop {
        let mut k = m;
        for f in [2, 3, 5] {
            while k % f == 0 {
                k /= f;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Slope interval of a curvelet wedge relative to a cone axis, as the hull
/// over the wedge's angular footprint clipped to the cone.
fn wedge_slope_hull(region: &SupportRegion, cone: Cone) -> Option<(f64, f64)> {
    let theta = match region {
        SupportRegion::CurveletWedge { theta, .. } => *theta,
        _ => return None,
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut push = |s: f64| {
        lo = lo.min(s);
        hi = hi.max(s);
    };
    match cone {
        Cone::One => {
            // slope = tan(theta); split at pi/2 where it jumps
            let pieces = if theta.contains(0.5 * PI) {
                vec![(theta.lo, 0.5 * PI - 1e-12), (0.5 * PI + 1e-12, theta.hi)]
            } else {
                vec![(theta.lo, theta.hi)]
            };
            for (a, b) in pieces {
                if a > b {
                    continue;
                }
                push(a.tan().clamp(-4.0, 4.0));
                push(b.tan().clamp(-4.0, 4.0));
            }
        }
        Cone::Two => {
            // slope = cot(theta), continuous and decreasing on (0, pi)
            let a = theta.lo.max(1e-12);
            let b = theta.hi.min(PI - 1e-12);
            if a > b {
                return None;
            }
            push((1.0 / a.tan()).clamp(-4.0, 4.0));
            push((1.0 / b.tan()).clamp(-4.0, 4.0));
        }
    }
    if lo.is_finite() && hi.is_finite() {
        Some((lo, hi))
    } else {
        None
    }
}

/// Range of `|cos|` (cone 1) or `|sin|` (cone 2) over the wedge footprint.
fn axis_cosine_range(region: &SupportRegion, cone: Cone) -> (f64, f64) {
    let theta = match region {
        SupportRegion::CurveletWedge { theta, .. } => *theta,
        _ => return (0.0, 1.0),
    };
    let f = |t: f64| -> f64 {
        match cone {
            Cone::One => t.cos().abs(),
            Cone::Two => t.sin().abs(),
        }
    };
    let mut lo = f(theta.lo).min(f(theta.hi));
    let mut hi = f(theta.lo).max(f(theta.hi));
    for crit in [0.0, 0.5 * PI, PI] {
        if theta.contains(crit) {
            lo = lo.min(f(crit));
            hi = hi.max(f(crit));
        }
    }
    (lo, hi)
}

/// Tabulate the kernel for one (shear scale j, shear k, cone) x (curvelet
/// scale jt, wedge ell) block, covering displacements up to `b_max`.
fn build_kernel(
    win: &WindowPair,
    j: u32,
    k: i64,
    cone: Cone,
    jt: u32,
    ell: i64,
    b_max: [f64; 2],
) -> Option<Kernel> {
    let sh = ShearletIndex {
        j,
        k,
        m: (0, 0),
        cone,
    };
    let cu = CurveletIndex { j: jt, ell, m: (0, 0) };
    let sh_region = support_box(&AtomIndex::Shearlet(sh));
    let cu_region = support_box(&AtomIndex::Curvelet(cu));
    if !sh_region.intersects(&cu_region) {
        return None;
    }

    let dj = f64::exp2(-0.5 * f64::from(j));
    // slope interval of the intersection relative to the cone axis
    let s_shear = match &sh_region {
        SupportRegion::ShearletStrip { slope, .. } => (slope.lo, slope.hi),
        _ => unreachable!(),
    };
    let (w_lo, w_hi) = wedge_slope_hull(&cu_region, cone)?;
    let s_lo = s_shear.0.max(w_lo.min(w_hi) - 0.02 * dj).max(-1.0);
    let s_hi = s_shear.1.min(w_lo.max(w_hi) + 0.02 * dj).min(1.0);
    if s_lo > s_hi {
        return None;
    }

    // u1 interval: shear band intersected with the curvelet annulus projection
    let (c_lo, c_hi) = axis_cosine_range(&cu_region, cone);
    let proj_lo = f64::exp2(f64::from(jt) - 1.0 - f64::from(j)) * c_lo;
    let proj_hi = f64::exp2(f64::from(jt) + 1.0 - f64::from(j)) * c_hi;
    let u1_lo = 0.5f64.max(proj_lo);
    let u1_hi = 2.0f64.min(proj_hi);
    if u1_lo >= u1_hi {
        return None;
    }

    // u2 interval from slopes: u2 = s * u1 * 2^{j/2}
    let half_j = f64::exp2(0.5 * f64::from(j));
    let mut u2_lo = f64::INFINITY;
    let mut u2_hi = f64::NEG_INFINITY;
    for &s in &[s_lo, s_hi] {
        for &u1 in &[u1_lo, u1_hi] {
            u2_lo = u2_lo.min(s * u1 * half_j);
            u2_hi = u2_hi.max(s * u1 * half_j);
        }
    }
    // sampling resolution: resolve the W ramps and the narrower of the two
    // angular windows
    let feat1 = 0.25;
    let feat2 = 0.5 * u1_lo * 1.0f64.min(f64::exp2(0.5 * (f64::from(j) - f64::from(jt))));

    let a2j = f64::exp2(f64::from(j));
    let sampler = |xi: [f64; 2]| {
        atoms::shearlet_window(win, j, k, cone, xi) * atoms::curvelet_window(win, jt, ell, xi)
    };
    let prefactor = 2.0 * f64::exp2(0.75 * (f64::from(j) - f64::from(jt)));
    Some(tabulate(
        &sampler,
        &KernelSpec {
            scale: a2j,
            swap: cone == Cone::Two,
            u1: (u1_lo, u1_hi),
            u2: (u2_lo, u2_hi),
            features: [feat1, feat2],
            b_max,
            prefactor,
        },
    ))
}

/// Geometry of a kernel tabulation in parabolic coordinates
/// `xi = [swap] A_scale u`.
pub(crate) struct KernelSpec {
    pub scale: f64,
    pub swap: bool,
    pub u1: (f64, f64),
    pub u2: (f64, f64),
    /// narrowest window feature per `u` axis
    pub features: [f64; 2],
    /// largest displacement per `b` axis the kernel must cover
    pub b_max: [f64; 2],
    pub prefactor: f64,
}

/// Tabulate `h(b) = integral over the u-box of prod(xi(u)) e^{i<b, u-uc>} du`
/// by one zero-padded FFT; [`Kernel::entry`] then evaluates
/// `prefactor * Re(e^{i<b,uc>} h(b))` with the oscillation exact and the
/// envelope bilinearly interpolated.
pub(crate) fn tabulate(sampler: &dyn Fn([f64; 2]) -> f64, spec: &KernelSpec) -> Kernel {
    let (u1_lo, u1_hi) = spec.u1;
    let (u2_lo, u2_hi) = spec.u2;
    let du1_target = (spec.features[0] / 10.0).max(1e-4);
    let du2_target = (spec.features[1] / 10.0).max(1e-4);

    // output resolution: envelope oscillates no faster than the box halfwidth
    let hw1 = 0.5 * (u1_hi - u1_lo);
    let hw2 = 0.5 * (u2_hi - u2_lo);
    let db1 = (2.0 * PI / (18.0 * hw1.max(0.05))).min(0.4);
    let db2 = (2.0 * PI / (18.0 * hw2.max(0.05))).min(0.4);
    let span1 = 2.5 * spec.b_max[0] + 16.0;
    let span2 = 2.5 * spec.b_max[1] + 16.0;
    let n1 = next_fft_size(
        ((span1 / db1).ceil() as usize).max((2.0 * PI / (db1 * du1_target)).ceil() as usize),
    );
    let n2 = next_fft_size(
        ((span2 / db2).ceil() as usize).max((2.0 * PI / (db2 * du2_target)).ceil() as usize),
    );
    assert!(n1 <= 16384 && n2 <= 16384, "kernel FFT too large: {n1}x{n2}");
    let du1 = 2.0 * PI / (n1 as f64 * db1);
    let du2 = 2.0 * PI / (n2 as f64 * db2);
    let ns1 = ((u1_hi - u1_lo) / du1).ceil() as usize + 1;
    let ns2 = ((u2_hi - u2_lo) / du2).ceil() as usize + 1;

    let root = spec.scale.sqrt();
    let mut buf = vec![Complex64::ZERO; n1 * n2];
    for p1 in 0..ns1 {
        let u1 = u1_lo + (p1 as f64 + 0.5) * du1;
        let sign1 = if p1 % 2 == 0 { 1.0 } else { -1.0 };
        for p2 in 0..ns2 {
            let u2 = u2_lo + (p2 as f64 + 0.5) * du2;
            let xi = if spec.swap {
                [root * u2, spec.scale * u1]
            } else {
                [spec.scale * u1, root * u2]
            };
            let v = sampler(xi);
            if v != 0.0 {
                let sign = sign1 * if p2 % 2 == 0 { 1.0 } else { -1.0 };
                buf[p1 * n2 + p2] = Complex64::new(v * sign, 0.0);
            }
        }
    }
    fft2(&mut buf, n1, n2, true);

    // phase ramps from the half-sample and centering offsets
    let c1 = 0.5 - ns1 as f64 / 2.0;
    let c2 = 0.5 - ns2 as f64 / 2.0;
    let const_phase = Complex64::from_polar(1.0, -PI * (c1 + c2));
    let scale = du1 * du2;
    let mut hre = vec![0.0f32; n1 * n2];
    let mut him = vec![0.0f32; n1 * n2];
    for q1 in 0..n1 {
        let r1 = Complex64::from_polar(1.0, 2.0 * PI * q1 as f64 * c1 / n1 as f64);
        for q2 in 0..n2 {
            let r2 = Complex64::from_polar(1.0, 2.0 * PI * q2 as f64 * c2 / n2 as f64);
            let v = buf[q1 * n2 + q2] * r1 * r2 * const_phase * scale;
            hre[q1 * n2 + q2] = v.re as f32;
            him[q1 * n2 + q2] = v.im as f32;
        }
    }

    let uc = [0.5 * (u1_lo + u1_hi), 0.5 * (u2_lo + u2_hi)];
    Kernel {
        hre,
        him,
        n1,
        n2,
        db1,
        db2,
        uc,
        prefactor: spec.prefactor,
    }
}

/// Atom-center maps in `b` coordinates.
///
/// Row side: `u(m) = A_{2^j} S_k^T A_{2^-j} m = (m1, 2^{-j/2} k m1 + m2)`
/// (components swapped first for cone 2). Column side:
/// `v(mt) = A_{2^j} [swap] R_theta A_{2^-jt} mt`.
fn row_map(j: u32, k: i64, cone: Cone, m: (i64, i64)) -> [f64; 2] {
    let (m1, m2) = match cone {
        Cone::One => (m.0 as f64, m.1 as f64),
        Cone::Two => (m.1 as f64, m.0 as f64),
    };
    [m1, f64::exp2(-0.5 * f64::from(j)) * k as f64 * m1 + m2]
}

fn col_matrix(j: u32, cone: Cone, jt: u32, ell: i64) -> Mat2 {
    let swap = Mat2 {
        a: 0.0,
        b: 1.0,
        c: 1.0,
        d: 0.0,
    };
    let rot = rotation(curvelet_angle(jt, ell));
    let inner = match cone {
        Cone::One => rot,
        Cone::Two => swap.mul(&rot),
    };
    parabolic_scaling(f64::exp2(f64::from(j)))
        .mul(&inner)
        .mul(&parabolic_scaling(f64::exp2(-f64::from(jt))))
}

// ---------------------------------------------------------------------------
// Streaming norm accumulation over nested levels
// ---------------------------------------------------------------------------

/// Positions ordered so that every smaller `|m|_inf` radius is a prefix.
fn positions_by_radius(r: i64) -> Vec<(i64, i64)> {
    let mut v: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| (a, b)))
        .collect();
    v.sort_by_key(|&(a, b)| (a.abs().max(b.abs()), a, b));
    v
}

fn count_within(positions: &[(i64, i64)], r: i64) -> usize {
    positions
        .iter()
        .take_while(|&&(a, b)| a.abs().max(b.abs()) <= r)
        .count()
}

/// Compute `Op,p` norms of the truncated cross-Grammian at every level and
/// exponent in one streamed pass. Levels must be nested (nondecreasing
/// `j_max` and `m_radius`); entries below `threshold` are dropped.
pub fn op_norm_stream(
    win: &WindowPair,
    levels: &[SweepLevel],
    ps: &[f64],
    threshold: f64,
) -> Vec<LevelNorms> {
    assert!(!levels.is_empty() && !ps.is_empty());
    for w in levels.windows(2) {
        assert!(
            w[1].j_max >= w[0].j_max && w[1].m_radius >= w[0].m_radius,
            "levels must be nested"
        );
    }
    let top = *levels.last().unwrap();
    let positions = positions_by_radius(top.m_radius);
    let level_counts: Vec<usize> = levels
        .iter()
        .map(|l| count_within(&positions, l.m_radius))
        .collect();
    let n_pos = positions.len();

    // block tables
    let mut row_blocks: Vec<(u32, Cone, i64)> = Vec::new();
    for j in 0..=top.j_max {
        for cone in [Cone::One, Cone::Two] {
            for k in -shear_bound(j)..=shear_bound(j) {
                row_blocks.push((j, cone, k));
            }
        }
    }
    let mut col_blocks: Vec<(u32, i64)> = Vec::new();
    for jt in 0..=top.j_max {
        for ell in 0..wedge_count(jt) {
            col_blocks.push((jt, ell));
        }
    }
    let row_block_of: HashMap<(u32, Cone, i64), usize> = row_blocks
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, i))
        .collect();
    let col_block_of: HashMap<(u32, i64), usize> = col_blocks
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, i))
        .collect();

    let nl = levels.len();
    let np = ps.len();
    // accumulators: [level][p] -> per-block position sums
    let mut row_acc = vec![vec![vec![0.0f64; row_blocks.len() * n_pos]; np]; nl];
    let mut col_acc = vec![vec![vec![0.0f64; col_blocks.len() * n_pos]; np]; nl];

    // kernel job list
    struct Job {
        j: u32,
        cone: Cone,
        k: i64,
        jt: u32,
        ell: i64,
    }
    let mut jobs = Vec::new();
    for &(j, cone, k) in &row_blocks {
        for jt in j.saturating_sub(2)..=(j + 2).min(top.j_max) {
            for ell in 0..wedge_count(jt) {
                let s = AtomIndex::Shearlet(ShearletIndex {
                    j,
                    k,
                    m: (0, 0),
                    cone,
                });
                let c = AtomIndex::Curvelet(CurveletIndex { j: jt, ell, m: (0, 0) });
                if atoms::supports_overlap(&s, &c) {
                    jobs.push(Job { j, cone, k, jt, ell });
                }
            }
        }
    }

    // per-job partials, merged in job order for worker-count independence
    struct Partial {
        row_block: usize,
        col_block: usize,
        levels_seen: Vec<bool>,
        row_part: Vec<f64>, // [level][p][pos] flattened
        col_part: Vec<f64>,
    }
    let partials: Vec<Partial> = jobs
        .par_iter()
        .map(|job| {
            let u_list: Vec<[f64; 2]> = positions
                .iter()
                .map(|&m| row_map(job.j, job.k, job.cone, m))
                .collect();
            let cm = col_matrix(job.j, job.cone, job.jt, job.ell);
            let v_list: Vec<[f64; 2]> = positions
                .iter()
                .map(|&m| cm.apply([m.0 as f64, m.1 as f64]))
                .collect();
            let mut b_max = [0.0f64; 2];
            for u in &u_list {
                b_max[0] = b_max[0].max(u[0].abs());
                b_max[1] = b_max[1].max(u[1].abs());
            }
            let mut v_max = [0.0f64; 2];
            for v in &v_list {
                v_max[0] = v_max[0].max(v[0].abs());
                v_max[1] = v_max[1].max(v[1].abs());
            }
            b_max[0] += v_max[0];
            b_max[1] += v_max[1];

            let levels_seen: Vec<bool> = levels
                .iter()
                .map(|l| job.j <= l.j_max && job.jt <= l.j_max)
                .collect();
            let mut row_part = vec![0.0f64; nl * np * n_pos];
            let mut col_part = vec![0.0f64; nl * np * n_pos];
            if let Some(kernel) =
                build_kernel(win, job.j, job.k, job.cone, job.jt, job.ell, b_max)
            {
                for (mi, u) in u_list.iter().enumerate() {
                    let mi_rad = positions[mi].0.abs().max(positions[mi].1.abs());
                    for (mti, v) in v_list.iter().enumerate() {
                        let b = [u[0] - v[0], u[1] - v[1]];
                        let val = kernel.entry(b).abs();
                        if val < threshold {
                            continue;
                        }
                        let mti_rad = positions[mti].0.abs().max(positions[mti].1.abs());
                        for (li, level) in levels.iter().enumerate() {
                            if !levels_seen[li]
                                || mi_rad > level.m_radius
                                || mti_rad > level.m_radius
                            {
                                continue;
                            }
                            for (pi, &p) in ps.iter().enumerate() {
                                let w = if p == 1.0 {
                                    val
                                } else if (p - 2.0 / 3.0).abs() < 1e-12 {
                                    (val * val).cbrt()
                                } else {
                                    val.powf(p)
                                };
                                row_part[(li * np + pi) * n_pos + mi] += w;
                                col_part[(li * np + pi) * n_pos + mti] += w;
                            }
                        }
                    }
                }
            }
            Partial {
                row_block: row_block_of[&(job.j, job.cone, job.k)],
                col_block: col_block_of[&(job.jt, job.ell)],
                levels_seen,
                row_part,
                col_part,
            }
        })
        .collect();

    for part in partials {
        for li in 0..nl {
            if !part.levels_seen[li] {
                continue;
            }
            for pi in 0..np {
                let src = (li * np + pi) * n_pos;
                let rdst = part.row_block * n_pos;
                let cdst = part.col_block * n_pos;
                for q in 0..n_pos {
                    row_acc[li][pi][rdst + q] += part.row_part[src + q];
                    col_acc[li][pi][cdst + q] += part.col_part[src + q];
                }
            }
        }
    }

    levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let norms = ps
                .iter()
                .enumerate()
                .map(|(pi, &p)| {
                    let row_sup = row_acc[li][pi].iter().cloned().fold(0.0f64, f64::max);
                    let col_sup = col_acc[li][pi].iter().cloned().fold(0.0f64, f64::max);
                    let _ = level_counts; // prefix masking is implicit: only
                                          // in-level pairs were accumulated
                    PNorm {
                        p,
                        row_sup,
                        col_sup,
                        op_norm: row_sup.max(col_sup).powf(1.0 / p),
                    }
                })
                .collect();
            LevelNorms { level, norms }
        })
        .collect()
}

/// Convergence of the truncated `Op,p` norm over nested levels.
pub fn op_norm_convergence(
    win: &WindowPair,
    p: f64,
    levels: &[SweepLevel],
    threshold: f64,
) -> ConvergenceTable {
    let results = op_norm_stream(win, levels, &[p], threshold);
    let rows: Vec<(SweepLevel, f64)> = results
        .iter()
        .map(|r| (r.level, r.norms[0].op_norm))
        .collect();
    let saturation_ratio = if rows.len() >= 2 {
        let last = rows[rows.len() - 1].1;
        let prev = rows[rows.len() - 2].1;
        if last > 0.0 {
            (last - prev) / last
        } else {
            0.0
        }
    } else {
        0.0
    };
    ConvergenceTable {
        p,
        rows,
        saturation_ratio,
    }
}

/// Assemble a stored cross-Grammian through the kernel engine (used by the
/// CLI for CSV emission at medium truncations; values agree with direct
/// quadrature to the envelope interpolation accuracy).
pub fn assemble_cross_gram_kernel(
    win: &WindowPair,
    rows: &TruncationSpec,
    cols: &TruncationSpec,
    threshold: f64,
) -> Result<CrossGram> {
    let row_idx = crate::gram::enumerate_family(crate::gram::FrameFamily::Shearlets, rows);
    let col_idx = crate::gram::enumerate_family(crate::gram::FrameFamily::Curvelets, cols);
    let row_of: HashMap<AtomIndex, u32> = row_idx
        .iter()
        .enumerate()
        .map(|(i, &a)| (a, i as u32))
        .collect();
    let col_of: HashMap<AtomIndex, u32> = col_idx
        .iter()
        .enumerate()
        .map(|(i, &a)| (a, i as u32))
        .collect();

    let positions_r = positions_by_radius(rows.m_radius);
    let positions_c = positions_by_radius(cols.m_radius);
    let mut entries = Vec::new();
    for j in 0..=rows.j_max {
        for cone in [Cone::One, Cone::Two] {
            for k in -shear_bound(j)..=shear_bound(j) {
                for jt in j.saturating_sub(2)..=(j + 2).min(cols.j_max) {
                    for ell in 0..wedge_count(jt) {
                        let s0 = AtomIndex::Shearlet(ShearletIndex {
                            j,
                            k,
                            m: (0, 0),
                            cone,
                        });
                        let c0 = AtomIndex::Curvelet(CurveletIndex { j: jt, ell, m: (0, 0) });
                        if !atoms::supports_overlap(&s0, &c0) {
                            continue;
                        }
                        let u_list: Vec<[f64; 2]> = positions_r
                            .iter()
                            .map(|&m| row_map(j, k, cone, m))
                            .collect();
                        let cm = col_matrix(j, cone, jt, ell);
                        let v_list: Vec<[f64; 2]> = positions_c
                            .iter()
                            .map(|&m| cm.apply([m.0 as f64, m.1 as f64]))
                            .collect();
                        let mut b_max = [0.0f64; 2];
                        for u in &u_list {
                            b_max[0] = b_max[0].max(u[0].abs());
                            b_max[1] = b_max[1].max(u[1].abs());
                        }
                        let mut v_mx = [0.0f64; 2];
                        for v in &v_list {
                            v_mx[0] = v_mx[0].max(v[0].abs());
                            v_mx[1] = v_mx[1].max(v[1].abs());
                        }
                        b_max[0] += v_mx[0];
                        b_max[1] += v_mx[1];
                        let kernel = match build_kernel(win, j, k, cone, jt, ell, b_max) {
                            Some(k) => k,
                            None => continue,
                        };
                        for (mi, u) in u_list.iter().enumerate() {
                            let ri = row_of[&AtomIndex::Shearlet(ShearletIndex {
                                j,
                                k,
                                m: positions_r[mi],
                                cone,
                            })];
                            for (mti, v) in v_list.iter().enumerate() {
                                let b = [u[0] - v[0], u[1] - v[1]];
                                let val = kernel.entry(b);
                                if val.abs() >= threshold {
                                    let ci = col_of[&AtomIndex::Curvelet(CurveletIndex {
                                        j: jt,
                                        ell,
                                        m: positions_c[mti],
                                    })];
                                    entries.push((ri, ci, Complex64::new(val, 0.0)));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    Ok(CrossGram {
        rows: row_idx,
        cols: col_idx,
        entries,
        threshold,
    })
}
