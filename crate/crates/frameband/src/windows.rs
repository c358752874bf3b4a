//! Meyer-type window profiles.
//!
//! Every atom in the crate is generated by one pair of band-limited profiles:
//! a radial wavelet window `W` supported on `[-2,-1/2] ∪ [1/2,2]` and an
//! angular bump `V` supported on `[-1,1]`. Both are built from a polynomial
//! smoothstep ramp and satisfy their square-partition identities exactly
//! (up to floating-point rounding):
//!
//! - `sum_{j>=0} W(r/2^j)^2 = 1` for all `|r| >= 1`,
//! - `sum_{k in Z} V(t+k)^2 = 1` for all `t`.
//!
//! The associated scaling profile `phi` (`phi(t)^2 + sum_{j>=0} W(t/2^j)^2 = 1`)
//! is exposed for the separable wavelet system and low-pass tiles.

use std::f64::consts::FRAC_PI_2;

/// Polynomial smoothstep ramp of the given order.
///
/// `meyer_ramp(s, t)` is 0 for `t <= 0`, 1 for `t >= 1`, and the unique
/// polynomial of degree `2s+1` with `s` vanishing derivatives at both ends
/// in between. Order 3 is the classical `t^4(35 - 84t + 70t^2 - 20t^3)`
/// quartic ramp. Satisfies `ramp(t) + ramp(1-t) = 1`.
pub fn meyer_ramp(order: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    match order {
        1 => t * t * (3.0 - 2.0 * t),
        2 => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        3 => t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
        4 => {
            let t5 = t * t * t * t * t;
            t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))
        }
        n => {
            // S_n(t) = t^{n+1} * sum_{k=0..n} C(n+k,k) C(2n+1,n-k) (-t)^k
            let n = n as i64;
            let mut acc = 0.0;
            for k in 0..=n {
                let c1 = binomial(n + k, k);
                let c2 = binomial(2 * n + 1, n - k);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * c1 * c2 * t.powi(k as i32);
            }
            acc * t.powi((n + 1) as i32)
        }
    }
}

fn binomial(n: i64, k: i64) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// The pair of generating profiles (plus the derived scaling function).
///
/// Immutable and `Copy`; safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPair {
    smoothness_order: u32,
}

/// Construct the Meyer-ramp window pair.
///
/// `smoothness_order >= 1` selects the ramp; the windows are `C^order` with
/// bounded finite differences one order beyond.
pub fn make_meyer_windows(smoothness_order: u32) -> WindowPair {
    assert!(smoothness_order >= 1, "smoothness_order must be >= 1");
    WindowPair { smoothness_order }
}

impl WindowPair {
    /// Default window pair used across the crate.
    pub fn default_pair() -> Self {
        make_meyer_windows(DEFAULT_SMOOTHNESS_ORDER)
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    fn ramp(&self, t: f64) -> f64 {
        meyer_ramp(self.smoothness_order, t)
    }

    /// Radial profile `W`, even, supported on `[1/2, 2]` in `|r|`.
    ///
    /// Rises as `sin(pi/2 ramp(2|r|-1))` on `[1/2,1]` and falls as
    /// `cos(pi/2 ramp(|r|-1))` on `[1,2]`, so consecutive dyadic dilates
    /// square-sum to one.
    pub fn radial(&self, r: f64) -> f64 {
        let a = r.abs();
        if a <= 0.5 || a >= 2.0 {
            0.0
        } else if a < 1.0 {
            (FRAC_PI_2 * self.ramp(2.0 * a - 1.0)).sin()
        } else {
            (FRAC_PI_2 * self.ramp(a - 1.0)).cos()
        }
    }

    /// Angular bump `V`, even, supported on `[-1, 1]`, with
    /// `sum_k V(t+k)^2 = 1`.
    pub fn angular(&self, t: f64) -> f64 {
        let a = t.abs();
        if a >= 1.0 {
            0.0
        } else {
            (FRAC_PI_2 * self.ramp(a)).cos()
        }
    }

    /// Scaling profile `phi`: 1 on `[-1/2,1/2]`, decays to 0 on `[1/2,1]`,
    /// complementary to `W`: `phi(t)^2 + W(t)^2 = phi(t/2)^2`.
    pub fn scaling(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 {
            1.0
        } else if a >= 1.0 {
            0.0
        } else {
            (FRAC_PI_2 * self.ramp(2.0 * a - 1.0)).cos()
        }
    }
}

/// Ramp order used when no explicit order is requested.
///
/// Order 4 keeps the windows one derivative smoother than the quartic ramp,
/// which pushes cross-Grammian decay safely past the slope -4 mark and
/// tightens truncated p-sum tails.
pub const DEFAULT_SMOOTHNESS_ORDER: u32 = 4;
