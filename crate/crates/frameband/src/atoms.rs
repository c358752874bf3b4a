//! Atom index types, frequency-domain atom evaluation and support geometry.
//!
//! Conventions, fixed once for the whole crate:
//!
//! - **Curvelets.** Scale `j >= 0`, integer orientation `ell`, position
//!   `m in Z^2`. The wedge center angle is `theta_{j,ell} = ell * 2^{-j/2}`
//!   radians and the angular factor is `V((omega mod pi) * 2^{j/2} - ell)`,
//!   so consecutive wedges are integer shifts of `V` and the angular
//!   square-partition is exact. Wedges `ell = 0 .. wedge_count(j)` cover the
//!   angle range `[0, pi)` once; the atom is symmetric under `xi -> -xi`
//!   (angles are reduced mod pi), which keeps spatial atoms real. The two
//!   wedges at the ends of the range are cut by the seam ray `omega = 0`;
//!   the partition of unity is unaffected.
//! - **Shearlets.** Cone 1 holds `|xi2/xi1| <= 1`; atoms are truncated at the
//!   cone boundary. Shear `|k| <= shear_bound(j) = ceil(2^{j/2})`. Cone 2 is
//!   the coordinate swap of cone 1 (including the position).
//! - **Wavelets.** Separable Meyer-type with the same `W` as the directional
//!   systems, so every level-`j` wavelet lives on the corona
//!   `2^{j-1} <= ||xi||_inf <= 2^{j+1}` shared with the level-`j` shearlets.
//!
//! Amplitude windows (no phase, no `2^{-3j/4}` normalization) are exposed
//! separately because the FFT tile transforms consume exactly those.

use crate::geometry::{parabolic_scaling, rotation, shear};
use crate::windows::WindowPair;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Which frequency cone a shearlet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cone {
    /// `|xi2 / xi1| <= 1` (horizontal axis dominant).
    One,
    /// `|xi1 / xi2| <= 1` (vertical axis dominant).
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveletIndex {
    pub j: u32,
    /// Orientation: wedge center at `ell * 2^{-j/2}` radians, reduced mod pi.
    pub ell: i64,
    pub m: (i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShearletIndex {
    pub j: u32,
    pub k: i64,
    pub m: (i64, i64),
    pub cone: Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletIndex {
    /// Mother-function type: 1 = phi x W, 2 = W x phi, 3 = W x W.
    pub h: u8,
    pub j: i32,
    pub n: (i64, i64),
}

/// Tagged union over the three frame families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomIndex {
    Curvelet(CurveletIndex),
    Shearlet(ShearletIndex),
    Wavelet(WaveletIndex),
}

impl fmt::Display for AtomIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomIndex::Curvelet(c) => {
                write!(f, "C(j={};l={};m={},{})", c.j, c.ell, c.m.0, c.m.1)
            }
            AtomIndex::Shearlet(s) => {
                let cone = match s.cone {
                    Cone::One => 1,
                    Cone::Two => 2,
                };
                write!(f, "S(j={};k={};m={},{};c={})", s.j, s.k, s.m.0, s.m.1, cone)
            }
            AtomIndex::Wavelet(w) => {
                write!(f, "W(h={};j={};n={},{})", w.h, w.j, w.n.0, w.n.1)
            }
        }
    }
}

/// Number of wedges covering angles `[0, pi)` at scale `j`.
pub fn wedge_count(j: u32) -> i64 {
    (PI * f64::exp2(0.5 * f64::from(j))).floor() as i64 + 2
}

/// Largest shear index at scale `j`: `ceil(2^{j/2})`.
pub fn shear_bound(j: u32) -> i64 {
    f64::exp2(0.5 * f64::from(j)).ceil() as i64
}

/// Wedge center angle `theta_{j,ell} = ell * 2^{-j/2}` (radians).
pub fn curvelet_angle(j: u32, ell: i64) -> f64 {
    ell as f64 * f64::exp2(-0.5 * f64::from(j))
}

/// Spatial center of a curvelet: `R_theta A_{2^-j} m`.
pub fn curvelet_position(j: u32, ell: i64, m: (i64, i64)) -> [f64; 2] {
    let theta = curvelet_angle(j, ell);
    rotation(theta)
        .mul(&parabolic_scaling(f64::exp2(-f64::from(j))))
        .apply([m.0 as f64, m.1 as f64])
}

/// Spatial center of a shearlet: `S_k^T A_{2^-j} m` (cone 1), swapped for cone 2.
pub fn shearlet_position(j: u32, k: i64, m: (i64, i64), cone: Cone) -> [f64; 2] {
    let (m, swap) = match cone {
        Cone::One => (m, false),
        Cone::Two => ((m.1, m.0), true),
    };
    let x = shear(k as f64)
        .transpose()
        .mul(&parabolic_scaling(f64::exp2(-f64::from(j))))
        .apply([m.0 as f64, m.1 as f64]);
    if swap {
        [x[1], x[0]]
    } else {
        x
    }
}

/// Spatial center of a wavelet: `n / 2^j`.
pub fn wavelet_position(j: i32, n: (i64, i64)) -> [f64; 2] {
    let s = f64::exp2(-f64::from(j));
    [n.0 as f64 * s, n.1 as f64 * s]
}

pub fn position(idx: &AtomIndex) -> [f64; 2] {
    match idx {
        AtomIndex::Curvelet(c) => curvelet_position(c.j, c.ell, c.m),
        AtomIndex::Shearlet(s) => shearlet_position(s.j, s.k, s.m, s.cone),
        AtomIndex::Wavelet(w) => wavelet_position(w.j, w.n),
    }
}

/// Angle reduced to `[0, pi)`.
fn mod_pi(omega: f64) -> f64 {
    let t = omega.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Curvelet amplitude window `W(r/2^j) V((omega mod pi) 2^{j/2} - ell)`.
pub fn curvelet_window(win: &WindowPair, j: u32, ell: i64, xi: [f64; 2]) -> f64 {
    let r = xi[0].hypot(xi[1]);
    if r == 0.0 {
        return 0.0;
    }
    let radial = win.radial(r / f64::exp2(f64::from(j)));
    if radial == 0.0 {
        return 0.0;
    }
    let omega = mod_pi(xi[1].atan2(xi[0]));
    radial * win.angular(omega * f64::exp2(0.5 * f64::from(j)) - ell as f64)
}

/// Shearlet amplitude window, cone-truncated.
pub fn shearlet_window(win: &WindowPair, j: u32, k: i64, cone: Cone, xi: [f64; 2]) -> f64 {
    let (a, b) = match cone {
        Cone::One => (xi[0], xi[1]),
        Cone::Two => (xi[1], xi[0]),
    };
    if a == 0.0 {
        return 0.0;
    }
    let slope = b / a;
    if slope.abs() > 1.0 {
        return 0.0;
    }
    let radial = win.radial(a / f64::exp2(f64::from(j)));
    if radial == 0.0 {
        return 0.0;
    }
    radial * win.angular(k as f64 + f64::exp2(0.5 * f64::from(j)) * slope)
}

/// Separable wavelet amplitude window `W^h(xi / 2^j)`.
pub fn wavelet_window(win: &WindowPair, h: u8, j: i32, xi: [f64; 2]) -> f64 {
    let s = f64::exp2(-f64::from(j));
    let (u, v) = (xi[0] * s, xi[1] * s);
    match h {
        1 => win.scaling(u) * win.radial(v),
        2 => win.radial(u) * win.scaling(v),
        3 => win.radial(u) * win.radial(v),
        _ => panic!("wavelet type must be 1, 2 or 3"),
    }
}

fn phased(amp: f64, position: [f64; 2], xi: [f64; 2]) -> Complex64 {
    if amp == 0.0 {
        return Complex64::ZERO;
    }
    let phi = position[0] * xi[0] + position[1] * xi[1];
    Complex64::from_polar(amp, phi)
}

/// Fourier transform of the curvelet `gamma_{j,ell,m}` at `xi`.
pub fn curvelet_hat(win: &WindowPair, idx: &CurveletIndex, xi: [f64; 2]) -> Complex64 {
    let amp = f64::exp2(-0.75 * f64::from(idx.j)) * curvelet_window(win, idx.j, idx.ell, xi);
    phased(amp, curvelet_position(idx.j, idx.ell, idx.m), xi)
}

/// Fourier transform of the shearlet `sigma_{j,k,m,cone}` at `xi`.
pub fn shearlet_hat(win: &WindowPair, idx: &ShearletIndex, xi: [f64; 2]) -> Complex64 {
    let amp =
        f64::exp2(-0.75 * f64::from(idx.j)) * shearlet_window(win, idx.j, idx.k, idx.cone, xi);
    phased(amp, shearlet_position(idx.j, idx.k, idx.m, idx.cone), xi)
}

/// Fourier transform of the separable wavelet `psi_{h,j,n}` at `xi`.
pub fn wavelet_hat(win: &WindowPair, idx: &WaveletIndex, xi: [f64; 2]) -> Complex64 {
    let amp = f64::exp2(-f64::from(idx.j)) * wavelet_window(win, idx.h, idx.j, xi);
    phased(amp, wavelet_position(idx.j, idx.n), xi)
}

/// Fourier transform of any atom at `xi`.
pub fn hat(win: &WindowPair, idx: &AtomIndex, xi: [f64; 2]) -> Complex64 {
    match idx {
        AtomIndex::Curvelet(c) => curvelet_hat(win, c, xi),
        AtomIndex::Shearlet(s) => shearlet_hat(win, s, xi),
        AtomIndex::Wavelet(w) => wavelet_hat(win, w, xi),
    }
}

/// Amplitude window of any atom (no phase, no scale normalization).
pub fn amplitude_window(win: &WindowPair, idx: &AtomIndex, xi: [f64; 2]) -> f64 {
    match idx {
        AtomIndex::Curvelet(c) => curvelet_window(win, c.j, c.ell, xi),
        AtomIndex::Shearlet(s) => shearlet_window(win, s.j, s.k, s.cone, xi),
        AtomIndex::Wavelet(w) => wavelet_window(win, w.h, w.j, xi),
    }
}

/// Scale normalization factor multiplying the amplitude window in `hat`.
pub fn scale_norm(idx: &AtomIndex) -> f64 {
    match idx {
        AtomIndex::Curvelet(c) => f64::exp2(-0.75 * f64::from(c.j)),
        AtomIndex::Shearlet(s) => f64::exp2(-0.75 * f64::from(s.j)),
        AtomIndex::Wavelet(w) => f64::exp2(-f64::from(w.j)),
    }
}

// ---------------------------------------------------------------------------
// Support geometry
// ---------------------------------------------------------------------------

/// Closed interval helper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        !self.is_empty() && !o.is_empty() && self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.max(o.lo), self.hi.min(o.hi))
    }
}

/// Exact analytic description of an atom's frequency support.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportRegion {
    /// `r in radial`, `(omega mod pi) in theta` (theta clipped to `[0, pi]`).
    CurveletWedge { radial: Interval, theta: Interval },
    /// `|xi_axis| in band`, slope relative to the cone axis in `slope`
    /// (already intersected with `[-1, 1]`).
    ShearletStrip {
        cone: Cone,
        band: Interval,
        slope: Interval,
    },
    /// `|xi1| in abs1`, `|xi2| in abs2`.
    WaveletSquare { abs1: Interval, abs2: Interval },
}

/// Exact frequency support of an atom.
pub fn support_box(idx: &AtomIndex) -> SupportRegion {
    match idx {
        AtomIndex::Curvelet(c) => {
            let p = f64::exp2(f64::from(c.j));
            let d = f64::exp2(-0.5 * f64::from(c.j));
            let lo = (c.ell as f64 - 1.0) * d;
            let hi = (c.ell as f64 + 1.0) * d;
            SupportRegion::CurveletWedge {
                radial: Interval::new(0.5 * p, 2.0 * p),
                theta: Interval::new(lo.max(0.0), hi.min(PI)),
            }
        }
        AtomIndex::Shearlet(s) => {
            let p = f64::exp2(f64::from(s.j));
            let d = f64::exp2(-0.5 * f64::from(s.j));
            let slope = Interval::new((-1.0 - s.k as f64) * d, (1.0 - s.k as f64) * d)
                .intersect(&Interval::new(-1.0, 1.0));
            SupportRegion::ShearletStrip {
                cone: s.cone,
                band: Interval::new(0.5 * p, 2.0 * p),
                slope,
            }
        }
        AtomIndex::Wavelet(w) => {
            let p = f64::exp2(f64::from(w.j));
            let pass = Interval::new(0.5 * p, 2.0 * p);
            let low = Interval::new(0.0, p);
            let (abs1, abs2) = match w.h {
                1 => (low, pass),
                2 => (pass, low),
                3 => (pass, pass),
                _ => panic!("wavelet type must be 1, 2 or 3"),
            };
            SupportRegion::WaveletSquare { abs1, abs2 }
        }
    }
}

impl SupportRegion {
    /// Membership test (closed support).
    pub fn contains(&self, xi: [f64; 2]) -> bool {
        match self {
            SupportRegion::CurveletWedge { radial, theta } => {
                let r = xi[0].hypot(xi[1]);
                if r == 0.0 {
                    return false;
                }
                radial.contains(r) && theta.contains(mod_pi(xi[1].atan2(xi[0])))
            }
            SupportRegion::ShearletStrip { cone, band, slope } => {
                let (a, b) = match cone {
                    Cone::One => (xi[0], xi[1]),
                    Cone::Two => (xi[1], xi[0]),
                };
                if a == 0.0 {
                    return false;
                }
                band.contains(a.abs()) && slope.contains(b / a)
            }
            SupportRegion::WaveletSquare { abs1, abs2 } => {
                abs1.contains(xi[0].abs()) && abs2.contains(xi[1].abs())
            }
        }
    }

    /// Angular footprint in the mod-pi coordinate: up to two intervals.
    fn angular_footprint(&self) -> Vec<Interval> {
        match self {
            SupportRegion::CurveletWedge { theta, .. } => vec![*theta],
            SupportRegion::ShearletStrip { cone, slope, .. } => {
                if slope.is_empty() {
                    return vec![];
                }
                match cone {
                    Cone::One => {
                        let lo = slope.lo.atan();
                        let hi = slope.hi.atan();
                        if lo >= 0.0 {
                            vec![Interval::new(lo, hi)]
                        } else if hi <= 0.0 {
                            vec![Interval::new(PI + lo, PI + hi)]
                        } else {
                            vec![Interval::new(0.0, hi), Interval::new(PI + lo, PI)]
                        }
                    }
                    Cone::Two => {
                        // omega = pi/2 - arctan(t), single interval in (0, pi)
                        vec![Interval::new(
                            0.5 * PI - slope.hi.atan(),
                            0.5 * PI - slope.lo.atan(),
                        )]
                    }
                }
            }
            SupportRegion::WaveletSquare { abs1, abs2 } => {
                // conservative hull: used only for mixed wavelet/curvelet tests
                let lo = if abs2.lo == 0.0 {
                    0.0
                } else {
                    (abs2.lo / abs1.hi.max(1e-300)).atan()
                };
                let hi = if abs1.lo == 0.0 {
                    0.5 * PI
                } else {
                    (abs2.hi / abs1.lo).atan()
                };
                vec![Interval::new(lo, hi), Interval::new(PI - hi, PI - lo)]
            }
        }
    }

    /// Range of the radial weight `rho(omega)` over an angular interval,
    /// where the support condition reads `r * rho(omega) in band`.
    fn rho_range(&self, th: &Interval) -> (f64, f64) {
        fn abs_cos_range(th: &Interval) -> (f64, f64) {
            let vals = [th.lo.cos().abs(), th.hi.cos().abs()];
            let mut lo = vals[0].min(vals[1]);
            let mut hi = vals[0].max(vals[1]);
            if th.contains(0.5 * PI) {
                lo = 0.0;
            }
            if th.contains(0.0) || th.contains(PI) {
                hi = 1.0;
            }
            (lo, hi)
        }
        fn abs_sin_range(th: &Interval) -> (f64, f64) {
            let vals = [th.lo.sin().abs(), th.hi.sin().abs()];
            let mut lo = vals[0].min(vals[1]);
            let mut hi = vals[0].max(vals[1]);
            if th.contains(0.5 * PI) {
                hi = 1.0;
            }
            if th.contains(0.0) || th.contains(PI) {
                lo = 0.0;
            }
            (lo, hi)
        }
        match self {
            SupportRegion::CurveletWedge { .. } => (1.0, 1.0),
            SupportRegion::ShearletStrip { cone: Cone::One, .. } => abs_cos_range(th),
            SupportRegion::ShearletStrip { cone: Cone::Two, .. } => abs_sin_range(th),
            SupportRegion::WaveletSquare { .. } => (1.0, 1.0),
        }
    }

    fn radial_band(&self) -> Interval {
        match self {
            SupportRegion::CurveletWedge { radial, .. } => *radial,
            SupportRegion::ShearletStrip { band, .. } => *band,
            SupportRegion::WaveletSquare { abs1, abs2 } => {
                // Euclidean hull
                Interval::new(
                    abs1.lo.hypot(abs2.lo),
                    abs1.hi.hypot(abs2.hi),
                )
            }
        }
    }

    /// Exact intersection test for curvelet/shearlet pairs, exact for
    /// wavelet/wavelet and wavelet/shearlet; conservative (superset) for
    /// wavelet/curvelet.
    pub fn intersects(&self, other: &SupportRegion) -> bool {
        use SupportRegion::*;
        match (self, other) {
            (WaveletSquare { abs1: a1, abs2: a2 }, WaveletSquare { abs1: b1, abs2: b2 }) => {
                a1.overlaps(b1) && a2.overlaps(b2)
            }
            (WaveletSquare { abs1, abs2 }, ShearletStrip { cone, band, slope })
            | (ShearletStrip { cone, band, slope }, WaveletSquare { abs1, abs2 }) => {
                if slope.is_empty() {
                    return false;
                }
                let (axis, perp) = match cone {
                    Cone::One => (abs1, abs2),
                    Cone::Two => (abs2, abs1),
                };
                let c = axis.intersect(band);
                if c.is_empty() {
                    return false;
                }
                let smax = slope.lo.abs().max(slope.hi.abs());
                let smin = if slope.contains(0.0) {
                    0.0
                } else {
                    slope.lo.abs().min(slope.hi.abs())
                };
                Interval::new(smin * c.lo, smax * c.hi).overlaps(perp)
            }
            _ => {
                // angular-interval x radial-compatibility logic
                for ta in self.angular_footprint() {
                    for tb in other.angular_footprint() {
                        let th = ta.intersect(&tb);
                        if th.is_empty() {
                            continue;
                        }
                        let (ra_lo, ra_hi) = self.rho_range(&th);
                        let (rb_lo, rb_hi) = other.rho_range(&th);
                        let ba = self.radial_band();
                        let bb = other.radial_band();
                        let fa = Interval::new(
                            ba.lo / ra_hi.max(1e-300),
                            if ra_lo == 0.0 { f64::INFINITY } else { ba.hi / ra_lo },
                        );
                        let fb = Interval::new(
                            bb.lo / rb_hi.max(1e-300),
                            if rb_lo == 0.0 { f64::INFINITY } else { bb.hi / rb_lo },
                        );
                        if fa.overlaps(&fb) {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }
}

/// Exact support-overlap predicate for two atoms.
pub fn supports_overlap(a: &AtomIndex, b: &AtomIndex) -> bool {
    support_box(a).intersects(&support_box(b))
}
