//! Small dense linear algebra used by the solvers: LU determinants and a
//! Gaussian-elimination solve. Matrices here are a handful of rows (one per
//! delta center), so plain partial-pivot elimination is all that is needed.

use num_complex::Complex64;

/// Determinant of a row-major `n x n` complex matrix by LU with partial
/// pivoting. The input is consumed as scratch space.
pub(crate) fn complex_det(n: usize, a: &mut [Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut pivot_norm = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let norm = a[row * n + col].norm_sqr();
            if norm > pivot_norm {
                pivot = row;
                pivot_norm = norm;
            }
        }
        if pivot_norm == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let diag = a[col * n + col];
        det *= diag;
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col + 1..n {
                let sub = factor * a[col * n + j];
                a[row * n + j] -= sub;
            }
        }
    }
    det
}

/// Determinant of a row-major `n x n` real matrix, same scheme.
pub(crate) fn real_det(n: usize, a: &mut [f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut pivot_abs = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot_abs {
                pivot = row;
                pivot_abs = v;
            }
        }
        if pivot_abs == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let diag = a[col * n + col];
        det *= diag;
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
        }
    }
    det
}

/// Solves the row-major real system `a x = b` in place; `b` holds the
/// solution on return. Returns `false` when the matrix is numerically
/// singular.
pub(crate) fn solve_real(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        let mut pivot_abs = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot_abs {
                pivot = row;
                pivot_abs = v;
            }
        }
        if pivot_abs == 0.0 || !pivot_abs.is_finite() {
            return false;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut sum = b[row];
        for j in row + 1..n {
            sum -= a[row * n + j] * b[j];
        }
        b[row] = sum / a[row * n + row];
    }
    b.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complex_det_2x2() {
        // det [[1+i, 2], [3, 4-i]] = (1+i)(4-i) - 6 = (5+3i) - 6 = -1+3i
        let mut a = vec![
            Complex64::new(1.0, 1.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(4.0, -1.0),
        ];
        let d = complex_det(2, &mut a);
        assert_relative_eq!(d.re, -1.0, max_relative = 1e-14);
        assert_relative_eq!(d.im, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn complex_det_singular() {
        let mut a = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        ];
        assert_eq!(complex_det(2, &mut a), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn real_det_3x3() {
        let mut a = vec![2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 1.0];
        // expansion: 2*(3-2) - 0 + 1*(1-3) = 0
        assert_relative_eq!(real_det(3, &mut a), 0.0, epsilon = 1e-14);
        // 2*(3*4 - 2*1) - 0 + 1*(1*1 - 3*1) = 18
        let mut b = vec![2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 4.0];
        assert_relative_eq!(real_det(3, &mut b), 18.0, max_relative = 1e-14);
    }

    #[test]
    fn solve_real_roundtrip() {
        let a0 = [4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0];
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a0[i * 3 + j] * x_true[j];
            }
        }
        let mut a = a0;
        assert!(solve_real(3, &mut a, &mut b));
        for i in 0..3 {
            assert_relative_eq!(b[i], x_true[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn solve_real_reports_singular() {
        let mut a = [1.0, 1.0, 2.0, 2.0];
        let mut b = [1.0, 0.0];
        assert!(!solve_real(2, &mut a, &mut b));
    }
}
