//! Command-line interface: `atoms`, `gram`, `approx`, `separate`,
//! `transform`.
//!
//! Every run echoes its parsed configuration as `config.json` next to the
//! outputs. Text outputs format floats with 17 significant digits, and all
//! reductions are evaluated in fixed index order, so identical configurations
//! produce byte-identical files regardless of worker count.

use crate::atoms::{AtomIndex, Cone, CurveletIndex, ShearletIndex, WaveletIndex};
use crate::cartoon::{approximation_curve_with_plan, coefficient_decay_fit, make_cartoon, rate_fit};
use crate::gram::{decay_fit, inner_product, bracketed_b, QuadratureSpec, TruncationSpec};
use crate::grid::{write_binary_with_sidecar, FrequencyGrid, Sidecar};
use crate::separation::{default_mixture, separation_ratio_curve, CsepParams, MixtureSpec};
use crate::sweep::{assemble_cross_gram_kernel, op_norm_stream, SweepLevel};
use crate::transform::{analyze, n_term_truncate, plan, synthesize, FrameKind};
use crate::windows::WindowPair;
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Fixed 17-significant-digit float formatting for reproducible text output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "frameband",
    about = "Band-limited frame analysis: atoms, cross-Grammians, n-term approximation, geometric separation",
    version
)]
pub struct RunConfig {
    /// RNG seed for anything randomized.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (results are independent of this).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum FrameArg {
    Curvelet,
    Shearlet,
    Wavelet,
}

impl From<FrameArg> for FrameKind {
    fn from(f: FrameArg) -> FrameKind {
        match f {
            FrameArg::Curvelet => FrameKind::Curvelet,
            FrameArg::Shearlet => FrameKind::Shearlet,
            FrameArg::Wavelet => FrameKind::Wavelet,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Sample one atom on a grid and write it as flat binary + sidecar.
    Atoms(AtomsArgs),
    /// Cross-Grammian: CSV of entries plus an Op,p summary.
    Gram(GramArgs),
    /// n-term approximation curves on random cartoon images.
    Approx(ApproxArgs),
    /// Geometric separation of the point + curve mixture.
    Separate(SeparateArgs),
    /// Analyze/truncate/synthesize a grid through one frame.
    Transform(TransformArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct AtomsArgs {
    #[arg(long, value_enum)]
    pub frame: FrameArg,
    #[arg(long, default_value_t = 3)]
    pub j: u32,
    /// Curvelet orientation.
    #[arg(long, default_value_t = 0)]
    pub ell: i64,
    /// Shearlet shear.
    #[arg(long, default_value_t = 0)]
    pub k: i64,
    /// Shearlet cone (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub cone: u8,
    /// Wavelet type (1, 2 or 3).
    #[arg(long, default_value_t = 3)]
    pub h: u8,
    #[arg(long, default_value_t = 0)]
    pub m1: i64,
    #[arg(long, default_value_t = 0)]
    pub m2: i64,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// "space" or "frequency".
    #[arg(long, default_value = "space")]
    pub domain: String,
}

#[derive(Debug, Args, Serialize)]
pub struct GramArgs {
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 6)]
    pub jmax: u32,
    #[arg(long, default_value_t = 16)]
    pub mradius: i64,
    #[arg(long, default_value_t = 1e-12)]
    pub threshold: f64,
    /// Truncation for the emitted CSV (kept small; the summary uses the
    /// full truncation through the streaming engine).
    #[arg(long, default_value_t = 3)]
    pub csv_jmax: u32,
    #[arg(long, default_value_t = 3)]
    pub csv_mradius: i64,
    /// Quadrature cap override; tiny values force a resolution refusal.
    #[arg(long)]
    pub max_quad_points: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ApproxArgs {
    #[arg(long, value_enum)]
    pub frame: FrameArg,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = 40.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SeparateArgs {
    /// Mixture spec JSON; the built-in default when omitted.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value_t = 3)]
    pub scale_lo: u32,
    #[arg(long, default_value_t = 6)]
    pub scale_hi: u32,
    #[arg(long, default_value_t = 360)]
    pub max_iter: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub frame: FrameArg,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Input field (flat f64le, grid x grid); random band noise when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Keep only the N largest coefficients before synthesis.
    #[arg(long)]
    pub nterm: Option<usize>,
}

/// Parse argv; usage errors exit with code 2 (clap's convention).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = RunConfig::try_parse_from(argv)?;
    validate(&cfg).map_err(|msg| {
        clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{msg}\n"))
    })?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> std::result::Result<(), String> {
    let check_grid = |n: usize| {
        if n < 16 || !n.is_power_of_two() {
            Err(format!("grid must be a power of 2 (>= 16), got {n}"))
        } else {
            Ok(())
        }
    };
    match &cfg.command {
        Command::Atoms(a) => check_grid(a.grid).and_then(|_| {
            if a.domain == "space" || a.domain == "frequency" {
                Ok(())
            } else {
                Err(format!("domain must be space or frequency, got {}", a.domain))
            }
        }),
        Command::Approx(a) => check_grid(a.grid),
        Command::Separate(s) => check_grid(s.grid).and_then(|_| {
            if s.scale_lo <= s.scale_hi {
                Ok(())
            } else {
                Err("scale range is empty".into())
            }
        }),
        Command::Transform(t) => check_grid(t.grid),
        Command::Gram(g) => {
            if g.p > 0.0 && g.p <= 1.0 {
                Ok(())
            } else {
                Err(format!("p must lie in (0, 1], got {}", g.p))
            }
        }
    }
}

/// Run a parsed configuration. Returns the process exit code:
/// 0 success, 1 computational refusal.
pub fn run(cfg: &RunConfig) -> i32 {
    if cfg.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    match dispatch(cfg) {
        Ok(()) => 0,
        Err(Error::UnderResolved { needed, cap, detail }) => {
            eprintln!("refused: under-resolved quadrature (needs {needed} > cap {cap}): {detail}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    // config echo
    let echo = serde_json::to_string_pretty(cfg)?;
    std::fs::write(cfg.out.join("config.json"), echo)?;
    let win = WindowPair::default_pair();
    match &cfg.command {
        Command::Atoms(a) => run_atoms(&win, a, &cfg.out),
        Command::Gram(g) => run_gram(&win, g, &cfg.out),
        Command::Approx(a) => run_approx(&win, a, cfg.seed, &cfg.out),
        Command::Separate(s) => run_separate(&win, s, &cfg.out),
        Command::Transform(t) => run_transform(&win, t, cfg.seed, &cfg.out),
    }
}

fn atom_from_args(a: &AtomsArgs) -> Result<AtomIndex> {
    Ok(match a.frame {
        FrameArg::Curvelet => AtomIndex::Curvelet(CurveletIndex {
            j: a.j,
            ell: a.ell,
            m: (a.m1, a.m2),
        }),
        FrameArg::Shearlet => AtomIndex::Shearlet(ShearletIndex {
            j: a.j,
            k: a.k,
            m: (a.m1, a.m2),
            cone: match a.cone {
                1 => Cone::One,
                2 => Cone::Two,
                c => {
                    return Err(Error::InvalidArgument(format!("cone must be 1 or 2, got {c}")))
                }
            },
        }),
        FrameArg::Wavelet => {
            if !(1..=3).contains(&a.h) {
                return Err(Error::InvalidArgument(format!(
                    "wavelet type must be 1..3, got {}",
                    a.h
                )));
            }
            AtomIndex::Wavelet(WaveletIndex {
                h: a.h,
                j: a.j as i32,
                n: (a.m1, a.m2),
            })
        }
    })
}

fn run_atoms(win: &WindowPair, a: &AtomsArgs, out: &Path) -> Result<()> {
    let idx = atom_from_args(a)?;
    let grid = FrequencyGrid::new(a.grid)?;
    let n = grid.size();
    let meta = serde_json::json!({
        "index": idx.to_string(),
        "grid": n,
        "frequency_extent": [-(n as f64) / 2.0, n as f64 / 2.0],
        "layout": "fft (DC at [0,0])",
    });
    if a.domain == "space" {
        let field = crate::transform::render_atom_field(win, &idx, grid);
        let mut sc = Sidecar::space(n);
        sc.index = Some(meta);
        write_binary_with_sidecar(&out.join("atom.bin"), &field, &sc)?;
    } else {
        // interleaved planes: re then im
        let mut planes = vec![0.0f64; 2 * n * n];
        for row in 0..n {
            for col in 0..n {
                let v = crate::atoms::hat(win, &idx, grid.xi(row, col));
                planes[row * n + col] = v.re;
                planes[n * n + row * n + col] = v.im;
            }
        }
        let mut sc = Sidecar::frequency_planes(n);
        sc.index = Some(meta);
        write_binary_with_sidecar(&out.join("atom.bin"), &planes, &sc)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GramSummary {
    p: f64,
    op_p_norm: f64,
    row_sup: f64,
    col_sup: f64,
    saturation_ratio: f64,
    decay_slope: f64,
    decay_r_squared: f64,
    csv_entries: usize,
    csv_jmax: u32,
    csv_mradius: i64,
}

fn run_gram(win: &WindowPair, g: &GramArgs, out: &Path) -> Result<()> {
    // decay slice by direct quadrature (honors the refusal cap)
    let quad = QuadratureSpec {
        max_points: g.max_quad_points.unwrap_or(4096),
        ..QuadratureSpec::default()
    };
    let js = g.jmax.min(4);
    let mut entries = Vec::new();
    for t in 1..=16i64 {
        for m in [(t, 0), (0, t)] {
            let s = AtomIndex::Shearlet(ShearletIndex {
                j: js,
                k: 0,
                m,
                cone: Cone::One,
            });
            let c = AtomIndex::Curvelet(CurveletIndex {
                j: js,
                ell: 0,
                m: (0, 0),
            });
            let v = inner_product(win, &s, &c, &quad)?;
            entries.push((bracketed_b(js, 0, m, js, 0, (0, 0)), v.norm()));
        }
    }
    let decay = decay_fit(&entries)?;

    // streamed norms at the requested truncation plus the step below it
    let levels = if g.jmax >= 1 && g.mradius >= 2 {
        vec![
            SweepLevel {
                j_max: g.jmax - 1,
                m_radius: (3 * g.mradius) / 4,
            },
            SweepLevel {
                j_max: g.jmax,
                m_radius: g.mradius,
            },
        ]
    } else {
        vec![SweepLevel {
            j_max: g.jmax,
            m_radius: g.mradius,
        }]
    };
    let norms = op_norm_stream(win, &levels, &[g.p], g.threshold);
    let last = norms.last().unwrap();
    let saturation = if norms.len() >= 2 {
        let prev = norms[norms.len() - 2].norms[0].op_norm;
        (last.norms[0].op_norm - prev) / last.norms[0].op_norm
    } else {
        0.0
    };

    // CSV of stored entries at the (smaller) CSV truncation
    let csv_rows = TruncationSpec::new(g.csv_jmax.min(g.jmax), g.csv_mradius.min(g.mradius), g.p);
    let gram = assemble_cross_gram_kernel(win, &csv_rows, &csv_rows, g.threshold)?;
    let mut csv = String::from("row_index,col_index,re,im,abs_b\n");
    for &(r, c, v) in &gram.entries {
        let row = &gram.rows[r as usize];
        let col = &gram.cols[c as usize];
        let b = match (row, col) {
            (AtomIndex::Shearlet(s), AtomIndex::Curvelet(cu)) => {
                crate::geometry::norm2(crate::gram::b_vector(s.j, s.k, s.m, cu.j, cu.ell, cu.m))
            }
            _ => 0.0,
        };
        let _ = writeln!(
            csv,
            "{row},{col},{},{},{}",
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(b)
        );
    }
    std::fs::write(out.join("gram.csv"), csv)?;

    let summary = GramSummary {
        p: g.p,
        op_p_norm: last.norms[0].op_norm,
        row_sup: last.norms[0].row_sup,
        col_sup: last.norms[0].col_sup,
        saturation_ratio: saturation,
        decay_slope: decay.slope,
        decay_r_squared: decay.r_squared,
        csv_entries: gram.entries.len(),
        csv_jmax: csv_rows.j_max,
        csv_mradius: csv_rows.m_radius,
    };
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(())
}

fn run_approx(win: &WindowPair, a: &ApproxArgs, seed: u64, out: &Path) -> Result<()> {
    let grid = FrequencyGrid::new(a.grid)?;
    let fplan = plan(win, a.frame.into(), grid, grid.max_scale());
    let n_list: Vec<usize> = (4..=14).map(|k| 1usize << k).collect();
    let mut csv = String::from("frame,seed,N,sq_error\n");
    let mut fits = Vec::new();
    for s in 0..a.seeds {
        let img = make_cartoon(seed + s, a.nu, a.grid)?;
        let curve = approximation_curve_with_plan(&fplan, &img, &n_list)?;
        for &(n, e) in &curve.points {
            let _ = writeln!(csv, "{},{},{n},{}", curve.frame, img.seed, fmt_f64(e));
        }
        let fit = rate_fit(&curve)?;
        // coefficient decay of the sorted magnitudes
        let coeffs = analyze(&fplan, &img.pixels)?;
        let mut mags: Vec<f64> = coeffs
            .tiles
            .iter()
            .flat_map(|(_, d)| d.iter().map(|v| v.abs()))
            .collect();
        mags.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
        let (coef_exp, coef_log) = coefficient_decay_fit(&mags, 64, 1 << 14)?;
        fits.push(serde_json::json!({
            "seed": img.seed,
            "slope": fit.slope,
            "log_exponent": fit.log_exponent,
            "coefficient_exponent": coef_exp,
            "coefficient_log_exponent": coef_log,
            "uncovered_sq": curve.uncovered_sq,
        }));
    }
    std::fs::write(out.join("curve.csv"), csv)?;
    std::fs::write(
        out.join("fit.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "frame": format!("{:?}", a.frame).to_lowercase(),
            "nu": a.nu,
            "grid": a.grid,
            "fits": fits,
        }))?,
    )?;
    Ok(())
}

fn run_separate(win: &WindowPair, s: &SeparateArgs, out: &Path) -> Result<()> {
    let spec: MixtureSpec = match &s.mixture {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => default_mixture(),
    };
    let scales: Vec<u32> = (s.scale_lo..=s.scale_hi).collect();
    let params = CsepParams {
        max_iter: s.max_iter,
        ..CsepParams::default()
    };
    let results = separation_ratio_curve(win, &spec, s.grid, &scales, &params)?;
    let mut ratios = String::from("j,ratio,w_err,s_err,p_norm,c_norm\n");
    let mut coh = String::from("j,coherence,delta,bound_rhs\n");
    for r in &results {
        let _ = writeln!(
            ratios,
            "{},{},{},{},{},{}",
            r.j,
            fmt_f64(r.ratio),
            fmt_f64(r.w_err),
            fmt_f64(r.s_err),
            fmt_f64(r.p_norm),
            fmt_f64(r.c_norm)
        );
        let _ = writeln!(
            coh,
            "{},{},{},{}",
            r.j,
            fmt_f64(r.coherence),
            fmt_f64(r.delta),
            r.bound_rhs.map(fmt_f64).unwrap_or_else(|| "nan".into())
        );
    }
    std::fs::write(out.join("ratios.csv"), ratios)?;
    std::fs::write(out.join("coherence.csv"), coh)?;
    std::fs::write(
        out.join("solver_log.json"),
        serde_json::to_string_pretty(&results)?,
    )?;
    Ok(())
}

fn run_transform(win: &WindowPair, t: &TransformArgs, seed: u64, out: &Path) -> Result<()> {
    let grid = FrequencyGrid::new(t.grid)?;
    let n = grid.size();
    let fplan = plan(win, t.frame.into(), grid, grid.max_scale());
    let field: Vec<f64> = match &t.input {
        Some(path) => {
            let data = crate::grid::read_binary(path)?;
            if data.len() != n * n {
                return Err(Error::GridMismatch(format!(
                    "input has {} samples, expected {}",
                    data.len(),
                    n * n
                )));
            }
            data
        }
        None => {
            // reproducible band-limited noise on the covered set
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let white: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut spec = crate::grid::fft2_real_unitary(&white, n);
            for (i, v) in spec.iter_mut().enumerate() {
                *v *= fplan.covered[i];
            }
            crate::grid::ifft2_unitary_real(spec, n)
        }
    };
    let coeffs = analyze(&fplan, &field)?;
    let kept = match t.nterm {
        Some(k) => n_term_truncate(&coeffs, k),
        None => coeffs.clone(),
    };
    let recon = synthesize(&fplan, &kept)?;
    write_binary_with_sidecar(&out.join("recon.bin"), &recon, &Sidecar::space(n))?;
    let field_energy: f64 = field.iter().map(|v| v * v).sum();
    let coeff_energy = coeffs.bandpass_energy()
        + coeffs.lowpass.iter().map(|v| v * v).sum::<f64>();
    let err: f64 = field
        .iter()
        .zip(&recon)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / field_energy.sqrt().max(1e-300);
    std::fs::write(
        out.join("stats.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "frame": format!("{:?}", t.frame).to_lowercase(),
            "grid": n,
            "field_energy": field_energy,
            "coefficient_energy": coeff_energy,
            "relative_error": err,
            "partition_deviation": fplan.partition_deviation,
            "nterm": t.nterm,
        }))?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let cfg = parse_args(["frameband", "gram", "--p", "1.0", "--jmax", "5"]).unwrap();
        match &cfg.command {
            Command::Gram(g) => {
                assert_eq!(g.p, 1.0);
                assert_eq!(g.jmax, 5);
                assert_eq!(g.mradius, 16); // default echoed
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let err = parse_args(["frameband", "approx", "--frame", "wavelet", "--grid", "500"]);
        assert!(err.is_err());
    }

    #[test]
    fn empty_argv_is_usage_error() {
        let err = parse_args(["frameband"]).unwrap_err();
        // clap exits with 2 for both missing subcommand and help
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(std::f64::consts::PI), "3.1415926535897931e0");
    }
}
