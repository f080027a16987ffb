//! Fixed-size complex 4x4 matrices and a few dense helpers.
//!
//! Matrices are stored row-major as `m[row][col]`. For spinor operators the
//! row is the upper (contravariant) spinor index and the column the lower one.

use num_complex::Complex64 as C64;

pub type Spinor = [C64; 4];
pub type Mat4 = [[C64; 4]; 4];
pub type RealMat4 = [[f64; 4]; 4];

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub const fn c(re: f64, im: f64) -> C64 {
    C64 { re, im }
}

pub fn zeros() -> Mat4 {
    [[ZERO; 4]; 4]
}

pub fn identity() -> Mat4 {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn from_real(r: &RealMat4) -> Mat4 {
    let mut m = zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = c(r[i][j], 0.0);
        }
    }
    m
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = zeros();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                m[i][j] += aik * b[k][j];
            }
        }
    }
    m
}

pub fn add(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = *a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn sub(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = *a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] -= b[i][j];
        }
    }
    m
}

pub fn scale(a: &Mat4, s: C64) -> Mat4 {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut m = zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[j][i];
        }
    }
    m
}

pub fn conj(a: &Mat4) -> Mat4 {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = x.conj();
        }
    }
    m
}

pub fn adjoint(a: &Mat4) -> Mat4 {
    conj(&transpose(a))
}

pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    sub(&mul(a, b), &mul(b, a))
}

pub fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
    add(&mul(a, b), &mul(b, a))
}

/// Largest entry modulus.
pub fn max_abs(a: &Mat4) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn apply(a: &Mat4, v: &Spinor) -> Spinor {
    let mut out = [ZERO; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
pub fn inverse(a: &Mat4) -> Option<Mat4> {
    let mut lhs = *a;
    let mut rhs = identity();
    let scale_ref = max_abs(a).max(f64::MIN_POSITIVE);
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| lhs[i][col].norm().total_cmp(&lhs[j][col].norm()))?;
        if lhs[pivot][col].norm() <= 1e-14 * scale_ref {
            return None;
        }
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = ONE / lhs[col][col];
        for j in 0..4 {
            lhs[col][j] *= inv;
            rhs[col][j] *= inv;
        }
        for i in 0..4 {
            if i != col {
                let f = lhs[i][col];
                if f != ZERO {
                    for j in 0..4 {
                        let (l, r) = (lhs[col][j], rhs[col][j]);
                        lhs[i][j] -= f * l;
                        rhs[i][j] -= f * r;
                    }
                }
            }
        }
    }
    Some(rhs)
}

/// Inverse of a real 4x4 matrix; `None` when singular.
pub fn inverse_real(a: &RealMat4) -> Option<RealMat4> {
    let inv = inverse(&from_real(a))?;
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = inv[i][j].re;
        }
    }
    Some(out)
}

/// Determinant of a square complex matrix given as rows, by LU with
/// partial pivoting. Returns exactly `1` for the empty matrix.
pub fn determinant(rows: &[Vec<C64>]) -> C64 {
    let n = rows.len();
    let mut a: Vec<Vec<C64>> = rows.to_vec();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap_or(col);
        if a[pivot][col] == ZERO {
            return ZERO;
        }
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for i in col + 1..n {
            let f = a[i][col] / p;
            if f != ZERO {
                for j in col..n {
                    let v = a[col][j];
                    a[i][j] -= f * v;
                }
            }
        }
    }
    det
}

/// Determinant of a real 4x4 matrix.
pub fn det_real(a: &RealMat4) -> f64 {
    let rows: Vec<Vec<C64>> = a.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
    determinant(&rows).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a: Mat4 = [
            [c(2.0, 1.0), c(0.5, 0.0), ZERO, c(0.0, -1.0)],
            [ONE, c(3.0, 0.0), c(0.0, 0.3), ZERO],
            [ZERO, c(1.0, 1.0), c(4.0, 0.0), ONE],
            [c(0.2, 0.0), ZERO, ONE, c(1.0, -2.0)],
        ];
        let inv = inverse(&a).unwrap();
        assert!(max_abs(&sub(&mul(&a, &inv), &identity())) < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        let mut a = identity();
        a[3][3] = ZERO;
        assert!(inverse(&a).is_none());
    }

    #[test]
    fn determinant_of_permutation_and_empty() {
        let rows = vec![vec![ZERO, ONE], vec![ONE, ZERO]];
        assert_eq!(determinant(&rows), -ONE);
        assert_eq!(determinant(&[]), ONE);
        assert_eq!(det_real(&[[1.21, 0., 0., 0.], [0., -1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]]), -1.21);
    }
}
