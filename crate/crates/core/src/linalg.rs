//! Dense complex determinants for the small matrices of the closed form.

use num_complex::Complex64;

/// Determinant of a square row-major matrix by LU factorisation with partial
/// pivoting. A zero pivot column yields an exact zero.
pub fn determinant(matrix: &[Vec<Complex64>]) -> Complex64 {
    let n = matrix.len();
    assert!(matrix.iter().all(|row| row.len() == n), "matrix must be square");
    let mut a: Vec<Vec<Complex64>> = matrix.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .expect("non-empty pivot range");
        if a[pivot][k] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        let p = a[k][k];
        det *= p;
        for i in k + 1..n {
            let factor = a[i][k] / p;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let t = a[k][j];
                a[i][j] -= factor * t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplace(m: &[Vec<Complex64>]) -> Complex64 {
        let n = m.len();
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..n {
            let minor: Vec<Vec<Complex64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect())
                .collect();
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[0][col] * laplace(&minor) * sign;
        }
        acc
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_cases() {
        assert_eq!(determinant(&[]), c(1.0, 0.0));
        assert_eq!(determinant(&[vec![c(2.0, -1.0)]]), c(2.0, -1.0));
        let m = vec![vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.5, 0.0), c(0.0, -3.0)]];
        let expected = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((determinant(&m) - expected).norm() < 1e-14);
        let singular = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(determinant(&singular).norm() < 1e-14);
        let zero_col = vec![vec![c(0.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(4.0, 0.0)]];
        assert_eq!(determinant(&zero_col), c(0.0, 0.0));
    }

    fn matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Complex64>>> {
        prop::collection::vec(prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(|(a, b)| c(a, b)).collect()).collect())
    }

    proptest! {
        #[test]
        fn lu_agrees_with_laplace(m in (1usize..=5).prop_flat_map(matrix)) {
            let lu = determinant(&m);
            let lp = laplace(&m);
            prop_assert!((lu - lp).norm() <= 1e-11 * lp.norm().max(1.0));
        }
    }
}
