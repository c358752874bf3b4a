//! Discrete frequency grids, 2-D FFT helpers and the flat binary + JSON
//! sidecar exchange format.
//!
//! Arrays are row-major; index `[row, col]` maps to the frequency
//! `(xi1, xi2) = (freq(col), freq(row))` in FFT layout, i.e. the DC bin sits
//! at `[0, 0]` and `freq(i) = i` for `i < n/2`, `i - n` otherwise. The
//! physical frequency extent is `[-n/2, n/2)` per axis.

use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::io::{Read as _, Write as _};
use std::path::Path;
use std::sync::Arc;

/// Square frequency grid of power-of-two size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    n: usize,
}

impl FrequencyGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of 2 (>= 4), got {n}"
            )));
        }
        Ok(FrequencyGrid { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency of a bin index.
    #[inline]
    pub fn freq(&self, i: usize) -> f64 {
        if i < self.n / 2 {
            i as f64
        } else {
            i as f64 - self.n as f64
        }
    }

    /// Frequency vector `(xi1, xi2)` of the bin at `[row, col]`.
    #[inline]
    pub fn xi(&self, row: usize, col: usize) -> [f64; 2] {
        [self.freq(col), self.freq(row)]
    }

    /// Largest frame scale that fits under Nyquist: `2^(j+1) <= n/2`.
    pub fn max_scale(&self) -> u32 {
        (self.n as f64).log2() as u32 - 2
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transpose(data: &mut Vec<Complex64>, rows: usize, cols: usize) {
    let mut out = vec![Complex64::ZERO; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    *data = out;
}

/// Unnormalized 2-D FFT of a row-major `rows x cols` buffer (in place).
pub fn fft2(data: &mut Vec<Complex64>, rows: usize, cols: usize, inverse: bool) {
    assert_eq!(data.len(), rows * cols);
    let row_fft = plan(cols, inverse);
    let mut scratch = vec![Complex64::ZERO; row_fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(cols) {
        row_fft.process_with_scratch(row, &mut scratch);
    }
    transpose(data, rows, cols);
    let col_fft = plan(rows, inverse);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex64::ZERO);
    for row in data.chunks_exact_mut(rows) {
        col_fft.process_with_scratch(row, &mut scratch);
    }
    transpose(data, cols, rows);
}

/// Forward unitary FFT of a real square grid.
pub fn fft2_real_unitary(field: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, n, n, false);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Inverse unitary FFT; returns the real part (imaginary part is the
/// caller's responsibility to know is negligible).
pub fn ifft2_unitary_real(mut spec: Vec<Complex64>, n: usize) -> Vec<f64> {
    fft2(&mut spec, n, n, true);
    let s = 1.0 / n as f64;
    spec.into_iter().map(|v| v.re * s).collect()
}

/// Inverse unitary FFT keeping the complex field.
pub fn ifft2_unitary(mut spec: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    fft2(&mut spec, n, n, true);
    let s = 1.0 / n as f64;
    spec.iter_mut().for_each(|v| *v *= s);
    spec
}

/// ell^2 norm of a real field.
pub fn l2_norm(field: &[f64]) -> f64 {
    field.iter().map(|v| v * v).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Flat binary + sidecar format
// ---------------------------------------------------------------------------

/// JSON sidecar describing a flat binary `f64` little-endian array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    /// `[rows, cols]`, or `[planes, rows, cols]` for interleaved complex.
    pub shape: Vec<usize>,
    pub dtype: String,
    pub order: String,
    /// "space" or "frequency" (frequency uses FFT layout, DC at [0,0]).
    pub domain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<serde_json::Value>,
}

impl Sidecar {
    pub fn space(n: usize) -> Self {
        Sidecar {
            shape: vec![n, n],
            dtype: "f64le".into(),
            order: "row-major".into(),
            domain: "space".into(),
            index: None,
            grid: None,
        }
    }

    pub fn frequency_planes(n: usize) -> Self {
        Sidecar {
            shape: vec![2, n, n],
            dtype: "f64le".into(),
            order: "row-major".into(),
            domain: "frequency".into(),
            index: None,
            grid: None,
        }
    }
}

/// Write a flat `f64` little-endian binary plus its `.json` sidecar.
pub fn write_binary_with_sidecar(path: &Path, data: &[f64], sidecar: &Sidecar) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    let side_path = path.with_extension(match path.extension() {
        Some(e) => format!("{}.json", e.to_string_lossy()),
        None => "json".into(),
    });
    let mut sf = std::fs::File::create(side_path)?;
    sf.write_all(serde_json::to_string_pretty(sidecar)?.as_bytes())?;
    Ok(())
}

/// Read a flat `f64` little-endian binary written by
/// [`write_binary_with_sidecar`].
pub fn read_binary(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidArgument(format!(
            "{}: length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn grid_mapping() {
        let g = FrequencyGrid::new(8).unwrap();
        assert_eq!(g.freq(0), 0.0);
        assert_eq!(g.freq(3), 3.0);
        assert_eq!(g.freq(4), -4.0);
        assert_eq!(g.freq(7), -1.0);
        assert_eq!(g.xi(0, 0), [0.0, 0.0]);
        assert!(FrequencyGrid::new(500).is_err());
        assert_eq!(FrequencyGrid::new(512).unwrap().max_scale(), 7);
    }

    #[test]
    fn fft_round_trip() {
        let n = 32;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let field: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = fft2_real_unitary(&field, n);
        // Parseval
        let e1: f64 = field.iter().map(|v| v * v).sum();
        let e2: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(e1, e2, epsilon = 1e-9 * e1);
        let back = ifft2_unitary_real(spec, n);
        for (a, b) in field.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rectangular_fft_matches_direct() {
        let (r, c) = (4usize, 8usize);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let data: Vec<Complex64> = (0..r * c)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut fftd = data.clone();
        fft2(&mut fftd, r, c, false);
        // direct DFT
        for qr in 0..r {
            for qc in 0..c {
                let mut acc = Complex64::ZERO;
                for ir in 0..r {
                    for ic in 0..c {
                        let ph = -2.0
                            * std::f64::consts::PI
                            * ((qr * ir) as f64 / r as f64 + (qc * ic) as f64 / c as f64);
                        acc += data[ir * c + ic] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - fftd[qr * c + qc]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        let data = vec![1.5, -2.25, 3.125, 0.0, f64::MIN_POSITIVE, 1e300];
        write_binary_with_sidecar(&path, &data, &Sidecar::space(2)).unwrap();
        let back = read_binary(&path).unwrap();
        assert_eq!(data, back);
        assert!(dir.path().join("field.bin.json").exists());
    }
}
