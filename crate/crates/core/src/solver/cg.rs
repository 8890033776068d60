use crate::assembly::SparseMatrix;
use crate::{Error, Result};

/// Relative residual target used by the Newton driver.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, stopping at
/// `||b - A x|| <= tol ||b||`. Fails after `10 n` iterations or on a
/// non-positive curvature.
pub fn linear_solve(a: &SparseMatrix, b: &[f64], tol: f64) -> Result<LinearSolve> {
    let n = a.n;
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(LinearSolve { x, iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { f64::NAN })
        .collect();
    if inv_diag.iter().any(|d| d.is_nan()) {
        return Err(Error::LinearSolverBreakdown { iterations: 0, residual: 1.0 });
    }

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = 10 * n.max(1);
    let target = tol * b_norm;
    for it in 1..=cap {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolverBreakdown { iterations: it, residual: dot(&r, &r).sqrt() / b_norm });
        }
        let alpha = rz / pap;
        let mut rr = 0.0;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr += r[i] * r[i];
        }
        let res = rr.sqrt();
        if res <= target {
            return Ok(LinearSolve { x, iterations: it, relative_residual: res / b_norm });
        }
        let mut rz_new = 0.0;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
            rz_new += r[i] * z[i];
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolverBreakdown { iterations: cap, residual: dot(&r, &r).sqrt() / b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_in_one_iteration() {
        let a = SparseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let s = linear_solve(&a, &b, 1e-12).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.x, b);
    }

    #[test]
    fn hand_invertible_3x3() {
        // A = [[4,1,0],[1,3,1],[0,1,2]], det = 18; A^{-1} = adj(A)/18
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let inv = [[5.0, -2.0, 1.0], [-2.0, 8.0, -4.0], [1.0, -4.0, 11.0]].map(|r| r.map(|v: f64| v / 18.0));
        let b = [1.0, 2.0, 3.0];
        let s = linear_solve(&a, &b, 1e-14).unwrap();
        for i in 0..3 {
            let expected: f64 = (0..3).map(|j| inv[i][j] * b[j]).sum();
            assert!((s.x[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        // A = M^T M + n I
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>() + if i == j { n as f64 } else { 0.0 })
                    .collect()
            })
            .collect();
        let a = SparseMatrix::from_dense(&dense);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = linear_solve(&a, &b, 1e-12).unwrap();
        let ax = a.matvec(&s.x);
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / bn <= 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let s = linear_solve(&SparseMatrix::identity(3), &[0.0; 3], 1e-12).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.x, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(linear_solve(&a, &[1.0, -1.0], 1e-12), Err(Error::LinearSolverBreakdown { .. })));
    }
}
