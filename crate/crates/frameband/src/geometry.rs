//! Parabolic scaling, shear and rotation helpers.
//!
//! A minimal 2x2 matrix type is enough for every geometric operation in the
//! crate; the atoms and Grammian displacement vectors compose these three
//! families.

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2 {
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }
}

/// Parabolic scaling `A_a = diag(a, sqrt(a))`.
pub fn parabolic_scaling(a: f64) -> Mat2 {
    Mat2 {
        a,
        b: 0.0,
        c: 0.0,
        d: a.sqrt(),
    }
}

/// Shear matrix `S_k = [[1, k], [0, 1]]`.
pub fn shear(k: f64) -> Mat2 {
    Mat2 {
        a: 1.0,
        b: k,
        c: 0.0,
        d: 1.0,
    }
}

/// Planar rotation by `-theta` radians.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2 {
        a: c,
        b: s,
        c: -s,
        d: c,
    }
}

/// Bracket `<y> = (1 + y^2)^(1/2)`.
pub fn bracket(y: f64) -> f64 {
    y.hypot(1.0)
}

/// Euclidean norm of a 2-vector.
pub fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scaling_composes() {
        let m = parabolic_scaling(4.0).mul(&parabolic_scaling(0.25));
        assert_abs_diff_eq!(m.a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.d, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.b, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.c, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn shears_add() {
        let m = shear(2.0).mul(&shear(3.5));
        assert_abs_diff_eq!(m.b, 5.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.a, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let r = rotation(0.7321);
        assert_abs_diff_eq!(r.det(), 1.0, epsilon = 1e-15);
        let rt_r = r.transpose().mul(&r);
        assert_abs_diff_eq!(rt_r.a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rt_r.b, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rt_r.d, 1.0, epsilon = 1e-15);
        // rotation by -theta: e1 maps to (cos, -sin)
        let v = rotation(0.5).apply([1.0, 0.0]);
        assert_abs_diff_eq!(v[0], 0.5f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], -(0.5f64.sin()), epsilon = 1e-15);
    }

    #[test]
    fn bracket_at_zero() {
        assert_eq!(bracket(0.0), 1.0);
        assert_abs_diff_eq!(bracket(1.0), 2.0f64.sqrt(), epsilon = 1e-15);
    }
}
