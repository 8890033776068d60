//! Gauss-Legendre rules on `[0, 1]` and symmetric rules on the reference
//! triangle.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

/// Abscissae in `[0, 1]`; weights sum to 1.
pub type EdgeRule = QuadratureRule<f64>;
/// Barycentric points on the reference triangle; weights sum to 1/2.
pub type TriangleRule = QuadratureRule<[f64; 3]>;

impl<P: Copy> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn edge_gauss_rule(n: usize) -> Result<EdgeRule> {
    if !(1..=16).contains(&n) {
        return Err(Error::UnsupportedQuadrature(n));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(EdgeRule { points, weights, degree: 2 * n - 1 })
}

fn orbit3(a: f64, w: f64, points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    points.extend([[b, a, a], [a, b, a], [a, a, b]]);
    weights.extend([w; 3]);
}

/// Symmetric triangle rule exact to at least `degree` (1 to 5).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let exact = match degree {
        0 | 1 => {
            points.push([1.0 / 3.0; 3]);
            weights.push(0.5);
            1
        }
        2 => {
            orbit3(1.0 / 6.0, 1.0 / 6.0, &mut points, &mut weights);
            2
        }
        3 | 4 => {
            orbit3(0.445_948_490_915_965, 0.5 * 0.223_381_589_678_011, &mut points, &mut weights);
            orbit3(0.091_576_213_509_771, 0.5 * 0.109_951_743_655_322, &mut points, &mut weights);
            4
        }
        5 => {
            let s = 15f64.sqrt();
            points.push([1.0 / 3.0; 3]);
            weights.push(9.0 / 80.0);
            orbit3((6.0 - s) / 21.0, (155.0 - s) / 2400.0, &mut points, &mut weights);
            orbit3((6.0 + s) / 21.0, (155.0 + s) / 2400.0, &mut points, &mut weights);
            5
        }
        other => return Err(Error::UnsupportedQuadrature(other)),
    };
    Ok(TriangleRule { points, weights, degree: exact })
}
