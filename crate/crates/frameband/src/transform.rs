//! Discrete analysis and synthesis on an `n x n` grid.
//!
//! Each frame is realized as a set of frequency tiles (one per scale and
//! orientation, plus one coarse low-pass). Analysis multiplies the unitary
//! FFT of the input by each tile window and transforms back, giving one real
//! coefficient per grid position per tile (an oversampled frame: positions
//! run over the full pixel lattice). The tile windows are renormalized so
//! that their squares sum to exactly one on the covered frequency set, which
//! makes analysis followed by synthesis the identity there and keeps the
//! discrete system a Parseval frame; the size of that renormalization is
//! recorded as the partition deviation (nonzero only at the shearlet cone
//! seams).

use crate::atoms::{curvelet_window, shearlet_window, wavelet_window, wedge_count, Cone};
use crate::grid::{fft2_real_unitary, ifft2_unitary_real, FrequencyGrid};
use crate::windows::WindowPair;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which frame a plan or coefficient set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameKind {
    Curvelet,
    Shearlet,
    Wavelet,
}

impl std::fmt::Display for FrameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameKind::Curvelet => write!(f, "curvelet"),
            FrameKind::Shearlet => write!(f, "shearlet"),
            FrameKind::Wavelet => write!(f, "wavelet"),
        }
    }
}

/// Identifier of one frequency tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileId {
    Lowpass,
    Curvelet { j: u32, ell: i64 },
    Shearlet { j: u32, k: i64, cone: Cone },
    Wavelet { h: u8, j: u32 },
}

/// One frequency tile: sparse window samples over the grid.
#[derive(Debug, Clone)]
pub struct Tile {
    pub id: TileId,
    /// `(flat bin index, renormalized window value)`.
    pub window: Vec<(u32, f64)>,
}

/// A frame realized on a grid.
#[derive(Debug, Clone)]
pub struct FramePlan {
    pub kind: FrameKind,
    pub grid: FrequencyGrid,
    pub j_min: u32,
    pub j_max: u32,
    /// Scales requested but dropped because they exceed Nyquist.
    pub skipped_scales: Vec<u32>,
    pub lowpass: Tile,
    pub tiles: Vec<Tile>,
    /// 1.0 where the renormalized partition covers the grid, else 0.0.
    pub covered: Vec<f64>,
    /// Max of `|sum of squared windows - 1|` over the covered band before
    /// renormalization (the shearlet seam deviation; ~0 for the others).
    pub partition_deviation: f64,
}

/// Minimum pre-normalization coverage for a bin to count as covered.
const COVERAGE_FLOOR: f64 = 0.5;

/// Build the tile plan for a frame on a grid.
///
/// Scales run from `j_min` to `min(j_max, grid.max_scale())`; anything above
/// is skipped and recorded.
pub fn plan(win: &WindowPair, kind: FrameKind, grid: FrequencyGrid, j_max: u32) -> FramePlan {
    let n = grid.size();
    let j_min = 0u32;
    let j_top = j_max.min(grid.max_scale());
    let skipped: Vec<u32> = (j_top + 1..=j_max).collect();

    let mut ids = vec![TileId::Lowpass];
    for j in j_min..=j_top {
        match kind {
            FrameKind::Curvelet => {
                for ell in 0..wedge_count(j) {
                    ids.push(TileId::Curvelet { j, ell });
                }
            }
            FrameKind::Shearlet => {
                for cone in [Cone::One, Cone::Two] {
                    let s = crate::atoms::shear_bound(j);
                    for k in -s..=s {
                        ids.push(TileId::Shearlet { j, k, cone });
                    }
                }
            }
            FrameKind::Wavelet => {
                for h in 1..=3u8 {
                    ids.push(TileId::Wavelet { h, j });
                }
            }
        }
    }

    // raw windows
    let low_scale = f64::exp2(f64::from(j_min));
    let mut raw: Vec<Vec<(u32, f64)>> = Vec::with_capacity(ids.len());
    for id in &ids {
        let mut w = Vec::new();
        for row in 0..n {
            for col in 0..n {
                let xi = grid.xi(row, col);
                let v = match *id {
                    TileId::Lowpass => match kind {
                        FrameKind::Wavelet => {
                            win.scaling(xi[0] / low_scale) * win.scaling(xi[1] / low_scale)
                        }
                        FrameKind::Curvelet => win.scaling(xi[0].hypot(xi[1]) / low_scale),
                        FrameKind::Shearlet => {
                            win.scaling(xi[0].abs().max(xi[1].abs()) / low_scale)
                        }
                    },
                    TileId::Curvelet { j, ell } => curvelet_window(win, j, ell, xi),
                    TileId::Shearlet { j, k, cone } => shearlet_window(win, j, k, cone, xi),
                    TileId::Wavelet { h, j } => wavelet_window(win, h, j as i32, xi),
                };
                if v != 0.0 {
                    w.push(((row * n + col) as u32, v));
                }
            }
        }
        raw.push(w);
    }

    // coverage and renormalization
    let mut coverage = vec![0.0f64; n * n];
    for w in &raw {
        for &(i, v) in w {
            coverage[i as usize] += v * v;
        }
    }
    let band = f64::exp2(f64::from(j_top));
    let mut deviation = 0.0f64;
    for row in 0..n {
        for col in 0..n {
            let xi = grid.xi(row, col);
            let i = row * n + col;
            if coverage[i] >= COVERAGE_FLOOR && xi[0].abs().max(xi[1].abs()) <= band {
                deviation = deviation.max((coverage[i] - 1.0).abs());
            }
        }
    }
    let scale_bin: Vec<f64> = coverage
        .iter()
        .map(|&c| if c >= COVERAGE_FLOOR { 1.0 / c.sqrt() } else { 0.0 })
        .collect();
    let covered: Vec<f64> = coverage
        .iter()
        .map(|&c| if c >= COVERAGE_FLOOR { 1.0 } else { 0.0 })
        .collect();
    let mut tiles = Vec::with_capacity(ids.len());
    for (id, w) in ids.into_iter().zip(raw) {
        let window: Vec<(u32, f64)> = w
            .into_iter()
            .filter_map(|(i, v)| {
                let s = scale_bin[i as usize];
                if s > 0.0 {
                    Some((i, v * s))
                } else {
                    None
                }
            })
            .collect();
        tiles.push(Tile { id, window });
    }
    let lowpass = tiles.remove(0);

    FramePlan {
        kind,
        grid,
        j_min,
        j_max: j_top,
        skipped_scales: skipped,
        lowpass,
        tiles,
        covered,
        partition_deviation: deviation,
    }
}

/// Coefficients of one frame on one grid.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub kind: FrameKind,
    pub n: usize,
    /// One real coefficient field per tile, aligned with `FramePlan::tiles`.
    pub tiles: Vec<(TileId, Vec<f64>)>,
    /// Coarse coefficients, preserved verbatim through truncation.
    pub lowpass: Vec<f64>,
    pub skipped_scales: Vec<u32>,
}

impl CoefficientSet {
    /// Squared ell^2 mass of the band-pass coefficients.
    pub fn bandpass_energy(&self) -> f64 {
        self.tiles
            .iter()
            .map(|(_, d)| d.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn total_coefficients(&self) -> usize {
        self.tiles.iter().map(|(_, d)| d.len()).sum()
    }
}

fn tile_coefficients(tile: &Tile, spectrum: &[Complex64], n: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::ZERO; n * n];
    for &(i, w) in &tile.window {
        buf[i as usize] = spectrum[i as usize] * w;
    }
    ifft2_unitary_real(buf, n)
}

/// Analysis: one coefficient field per tile.
pub fn analyze(plan: &FramePlan, field: &[f64]) -> Result<CoefficientSet> {
    let n = plan.grid.size();
    if field.len() != n * n {
        return Err(Error::GridMismatch(format!(
            "field has {} samples, plan expects {}",
            field.len(),
            n * n
        )));
    }
    let spectrum = fft2_real_unitary(field, n);
    let tiles: Vec<(TileId, Vec<f64>)> = plan
        .tiles
        .iter()
        .map(|t| (t.id, tile_coefficients(t, &spectrum, n)))
        .collect();
    let lowpass = tile_coefficients(&plan.lowpass, &spectrum, n);
    Ok(CoefficientSet {
        kind: plan.kind,
        n,
        tiles,
        lowpass,
        skipped_scales: plan.skipped_scales.clone(),
    })
}

/// Synthesis: adjoint of [`analyze`]; exact inverse on the covered band.
pub fn synthesize(plan: &FramePlan, coeffs: &CoefficientSet) -> Result<Vec<f64>> {
    let n = plan.grid.size();
    if coeffs.kind != plan.kind || coeffs.n != n {
        return Err(Error::GridMismatch(format!(
            "coefficients are {}@{} but plan is {}@{}",
            coeffs.kind, coeffs.n, plan.kind, n
        )));
    }
    if coeffs.tiles.len() != plan.tiles.len() {
        return Err(Error::GridMismatch("tile count mismatch".into()));
    }
    let mut spectrum = vec![Complex64::ZERO; n * n];
    let mut add = |tile: &Tile, data: &[f64]| {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        crate::grid::fft2(&mut buf, n, n, false);
        let s = 1.0 / n as f64;
        for &(i, w) in &tile.window {
            spectrum[i as usize] += buf[i as usize] * (w * s);
        }
    };
    for (tile, (id, data)) in plan.tiles.iter().zip(&coeffs.tiles) {
        debug_assert_eq!(tile.id, *id);
        add(tile, data);
    }
    add(&plan.lowpass, &coeffs.lowpass);
    Ok(ifft2_unitary_real(spectrum, n))
}

/// Keep the `n` largest-magnitude band-pass coefficients (ties broken by
/// lexicographic tile/position order); the low-pass block passes through.
pub fn n_term_truncate(coeffs: &CoefficientSet, n_keep: usize) -> CoefficientSet {
    let order = magnitude_order(coeffs);
    keep_top(coeffs, &order, n_keep)
}

/// Indices of all band-pass coefficients sorted by decreasing magnitude,
/// ties by (tile, position).
pub fn magnitude_order(coeffs: &CoefficientSet) -> Vec<(u32, u32)> {
    let mut order: Vec<(f64, u32, u32)> = Vec::with_capacity(coeffs.total_coefficients());
    for (ti, (_, data)) in coeffs.tiles.iter().enumerate() {
        for (pi, &v) in data.iter().enumerate() {
            order.push((v.abs(), ti as u32, pi as u32));
        }
    }
    order.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    order.into_iter().map(|(_, t, p)| (t, p)).collect()
}

/// Zero all band-pass coefficients except the first `n_keep` of `order`.
pub fn keep_top(coeffs: &CoefficientSet, order: &[(u32, u32)], n_keep: usize) -> CoefficientSet {
    let mut out = CoefficientSet {
        kind: coeffs.kind,
        n: coeffs.n,
        tiles: coeffs
            .tiles
            .iter()
            .map(|(id, d)| (*id, vec![0.0; d.len()]))
            .collect(),
        lowpass: coeffs.lowpass.clone(),
        skipped_scales: coeffs.skipped_scales.clone(),
    };
    for &(t, p) in order.iter().take(n_keep) {
        out.tiles[t as usize].1[p as usize] = coeffs.tiles[t as usize].1[p as usize];
    }
    out
}

/// Render the spatial field of a continuum atom on the grid (its Fourier
/// coefficients sampled at the integer frequencies).
pub fn render_atom_field(
    win: &WindowPair,
    idx: &crate::atoms::AtomIndex,
    grid: FrequencyGrid,
) -> Vec<f64> {
    let n = grid.size();
    let mut spec = vec![Complex64::ZERO; n * n];
    for row in 0..n {
        for col in 0..n {
            spec[row * n + col] = crate::atoms::hat(win, idx, grid.xi(row, col)) * n as f64;
        }
    }
    ifft2_unitary_real(spec, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{AtomIndex, CurveletIndex};
    use crate::grid::l2_norm;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn noise_on_band(plan: &FramePlan, seed: u64) -> Vec<f64> {
        let n = plan.grid.size();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let field: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut spec = fft2_real_unitary(&field, n);
        for (i, s) in spec.iter_mut().enumerate() {
            *s *= plan.covered[i];
        }
        ifft2_unitary_real(spec, n)
    }

    #[test]
    fn partitions_are_tight() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(64).unwrap();
        for kind in [FrameKind::Curvelet, FrameKind::Shearlet, FrameKind::Wavelet] {
            let p = plan(&win, kind, grid, grid.max_scale());
            // renormalized squares sum to 1 on the covered set
            let n = grid.size();
            let mut cov = vec![0.0f64; n * n];
            for t in p.tiles.iter().chain(std::iter::once(&p.lowpass)) {
                for &(i, v) in &t.window {
                    cov[i as usize] += v * v;
                }
            }
            for i in 0..n * n {
                if p.covered[i] > 0.0 {
                    assert!((cov[i] - 1.0).abs() < 1e-12, "{kind}: bin {i}: {}", cov[i]);
                }
            }
            // wavelet and curvelet partitions need no renormalization
            if kind != FrameKind::Shearlet {
                assert!(p.partition_deviation < 1e-9, "{kind}: {}", p.partition_deviation);
            } else {
                assert!(p.partition_deviation < 0.75);
            }
        }
    }

    #[test]
    fn round_trip_on_band() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(64).unwrap();
        for kind in [FrameKind::Curvelet, FrameKind::Shearlet, FrameKind::Wavelet] {
            let p = plan(&win, kind, grid, grid.max_scale());
            let f = noise_on_band(&p, 17);
            let c = analyze(&p, &f).unwrap();
            let g = synthesize(&p, &c).unwrap();
            let err = f
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err / l2_norm(&f) < 1e-10, "{kind}: rel err {}", err / l2_norm(&f));
            // Parseval: coefficient energy equals field energy
            let ce = c.bandpass_energy()
                + c.lowpass.iter().map(|v| v * v).sum::<f64>();
            assert_abs_diff_eq!(ce.sqrt(), l2_norm(&f), epsilon = 1e-8 * l2_norm(&f));
        }
    }

    #[test]
    fn zero_field_zero_coefficients() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(32).unwrap();
        let p = plan(&win, FrameKind::Shearlet, grid, grid.max_scale());
        let c = analyze(&p, &vec![0.0; 32 * 32]).unwrap();
        assert_eq!(c.bandpass_energy(), 0.0);
        let g = synthesize(&p, &c).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesis_is_linear() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(32).unwrap();
        let p = plan(&win, FrameKind::Wavelet, grid, grid.max_scale());
        let f1 = noise_on_band(&p, 3);
        let f2 = noise_on_band(&p, 4);
        let c1 = analyze(&p, &f1).unwrap();
        let c2 = analyze(&p, &f2).unwrap();
        let mut csum = c1.clone();
        for (t, (_, d)) in csum.tiles.iter_mut().enumerate() {
            for (i, v) in d.iter_mut().enumerate() {
                *v += c2.tiles[t].1[i];
            }
        }
        for (i, v) in csum.lowpass.iter_mut().enumerate() {
            *v += c2.lowpass[i];
        }
        let s12 = synthesize(&p, &csum).unwrap();
        let s1 = synthesize(&p, &c1).unwrap();
        let s2 = synthesize(&p, &c2).unwrap();
        for i in 0..s12.len() {
            assert_abs_diff_eq!(s12[i], s1[i] + s2[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn truncation_matches_sort_oracle() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(32).unwrap();
        let p = plan(&win, FrameKind::Curvelet, grid, grid.max_scale());
        let f = noise_on_band(&p, 9);
        let c = analyze(&p, &f).unwrap();
        let total = c.total_coefficients();
        // N >= total keeps everything
        let full = n_term_truncate(&c, total + 10);
        for (t, (_, d)) in full.tiles.iter().enumerate() {
            assert_eq!(d, &c.tiles[t].1);
        }
        // N = 0 empties the band-pass part
        let none = n_term_truncate(&c, 0);
        assert_eq!(none.bandpass_energy(), 0.0);
        // oracle: flatten, sort desc, take k
        let k = 137;
        let trunc = n_term_truncate(&c, k);
        let mut mags: Vec<f64> = c
            .tiles
            .iter()
            .flat_map(|(_, d)| d.iter().map(|v| v.abs()))
            .collect();
        mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let expect: f64 = mags[..k].iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(trunc.bandpass_energy(), expect, epsilon = 1e-9 * expect);
        // kept-count is exactly k
        let kept: usize = trunc
            .tiles
            .iter()
            .map(|(_, d)| d.iter().filter(|v| **v != 0.0).count())
            .sum();
        assert!(kept <= k);
    }

    #[test]
    fn rendered_atom_peaks_at_its_own_coefficient() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(64).unwrap();
        let p = plan(&win, FrameKind::Curvelet, grid, grid.max_scale());
        let idx = CurveletIndex {
            j: 3,
            ell: 4,
            m: (0, 0),
        };
        let f = render_atom_field(&win, &AtomIndex::Curvelet(idx), grid);
        let c = analyze(&p, &f).unwrap();
        // the maximal coefficient sits in the tile of (j, ell) at position 0
        let (mut best, mut where_) = (0.0f64, (TileId::Lowpass, 0usize));
        for (id, d) in &c.tiles {
            for (i, v) in d.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    where_ = (*id, i);
                }
            }
        }
        assert_eq!(where_.0, TileId::Curvelet { j: 3, ell: 4 });
        assert_eq!(where_.1, 0);
    }

    #[test]
    fn grid_provenance_checked() {
        let win = WindowPair::default_pair();
        let g32 = FrequencyGrid::new(32).unwrap();
        let g64 = FrequencyGrid::new(64).unwrap();
        let p32 = plan(&win, FrameKind::Wavelet, g32, 3);
        let p64 = plan(&win, FrameKind::Wavelet, g64, 3);
        let c = analyze(&p32, &vec![0.0; 32 * 32]).unwrap();
        assert!(matches!(
            synthesize(&p64, &c),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn nyquist_skip_recorded() {
        let win = WindowPair::default_pair();
        let grid = FrequencyGrid::new(32).unwrap(); // max scale 3
        let p = plan(&win, FrameKind::Wavelet, grid, 6);
        assert_eq!(p.j_max, 3);
        assert_eq!(p.skipped_scales, vec![4, 5, 6]);
    }
}
