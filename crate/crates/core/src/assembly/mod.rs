//! P1 assembly of the discrete nonlinear problem
//!
//! ```text
//! G(u)_i = int sigma grad u . grad phi_i + int_{Gamma_C} f(u) phi_i - int_{Gamma_A} g phi_i
//! ```
//!
//! its Jacobian, and the energy functional
//!
//! ```text
//! J(u) = 1/2 int sigma |grad u|^2 + int_{Gamma_C} F(u) - int_{Gamma_A} g u
//! ```
//!
//! whose gradient is `G`.

mod quadrature;
mod sparse;

use std::io::{BufRead, Write};

pub use quadrature::{edge_gauss_rule, triangle_rule, EdgeRule, QuadratureRule, TriangleRule};
pub use sparse::SparseMatrix;

use crate::mesh::{cross, BoundaryLabel, Mesh, Point};
use crate::problem::ProblemSpec;
use crate::{Error, Result};

/// Gauss points used for cathode integrals of the cubic law (exact: the
/// integrands are polynomials of degree at most 4).
pub const CUBIC_EDGE_POINTS: usize = 3;
/// Gauss points for Butler-Volmer cathode integrals and anode flux integrals.
pub const SMOOTH_EDGE_POINTS: usize = 7;

/// Nodal coefficients of a P1 function on a specific mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    pub generation: u64,
    pub coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(mesh: &Mesh) -> Self {
        FeFunction { generation: mesh.generation, coeffs: vec![0.0; mesh.n_vertices()] }
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        FeFunction { generation: mesh.generation, coeffs: mesh.vertices.iter().map(|&p| f(p)).collect() }
    }

    pub fn new(mesh: &Mesh, coeffs: Vec<f64>) -> Result<Self> {
        let f = FeFunction { generation: mesh.generation, coeffs };
        f.check(mesh)?;
        Ok(f)
    }

    /// Verifies the function is bound to `mesh` and finite.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.generation != mesh.generation {
            return Err(Error::GenerationMismatch { expected: mesh.generation, found: self.generation });
        }
        if self.coeffs.len() != mesh.n_vertices() {
            return Err(Error::InvalidParameter(format!(
                "function has {} coefficients, mesh has {} vertices",
                self.coeffs.len(),
                mesh.n_vertices()
            )));
        }
        if let Some(i) = self.coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("coefficient {i} is not finite")));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `afem-fn v1`, the generation id, the count and one value per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "afem-fn v1")?;
        writeln!(out, "{}", self.generation)?;
        writeln!(out, "{}", self.coeffs.len())?;
        for c in &self.coeffs {
            writeln!(out, "{c}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Parse(format!("missing {what}")))
        };
        if next("header")?.trim() != "afem-fn v1" {
            return Err(Error::Parse("expected `afem-fn v1` header".into()));
        }
        let generation = next("generation")?.trim().parse().map_err(|_| Error::Parse("bad generation".into()))?;
        let n: usize = next("count")?.trim().parse().map_err(|_| Error::Parse("bad count".into()))?;
        let coeffs = (0..n)
            .map(|i| {
                next("value")?
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value on line {}", i + 4)))
            })
            .collect::<Result<_>>()?;
        Ok(FeFunction { generation, coeffs })
    }

    /// Rebinds to `mesh` (same vertex set, e.g. after reading both from disk).
    pub fn rebind(mut self, mesh: &Mesh) -> Result<Self> {
        self.generation = mesh.generation;
        self.check(mesh)?;
        Ok(self)
    }
}

/// Exact P1 stiffness `K_ij = sigma |T| grad phi_i . grad phi_j`.
pub fn element_stiffness(p: [Point; 3], sigma: f64) -> Result<[[f64; 3]; 3]> {
    let two_a = cross(p[0], p[1], p[2]);
    if !(two_a.abs() > 0.0) {
        return Err(Error::DegenerateTriangle { id: usize::MAX, area: 0.5 * two_a });
    }
    let grads: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let (b, c) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [(b.y - c.y) / two_a, (c.x - b.x) / two_a]
    });
    let area = 0.5 * two_a.abs();
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| sigma * area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]))
    }))
}

#[derive(Clone, Copy, Debug)]
struct BoundarySegment {
    a: usize,
    b: usize,
    pa: Point,
    pb: Point,
    len: f64,
}

/// Mesh-dependent parts of the discrete problem: stiffness matrix, anode
/// load vector and cathode edge list. Residual, Jacobian and energy are
/// evaluated against it for any coefficient vector.
pub struct Discretization<'a> {
    pub mesh: &'a Mesh,
    pub spec: &'a ProblemSpec,
    pub stiffness: SparseMatrix,
    pub load: Vec<f64>,
    cathode: Vec<BoundarySegment>,
    cathode_rule: EdgeRule,
}

fn segments(mesh: &Mesh, label: BoundaryLabel) -> Vec<BoundarySegment> {
    mesh.boundary_edges(label)
        .map(|e| {
            let [a, b] = mesh.edges[e].vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            BoundarySegment { a, b, pa, pb, len: pa.dist(pb) }
        })
        .collect()
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a Mesh, spec: &'a ProblemSpec) -> Result<Self> {
        let mut stiffness = SparseMatrix::from_mesh_pattern(mesh);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let k = element_stiffness(mesh.triangle_points(t), tri.sigma)
                .map_err(|_| Error::DegenerateTriangle { id: t, area: mesh.signed_area(t) })?;
            for i in 0..3 {
                for j in 0..3 {
                    stiffness.add(tri.vertices[i], tri.vertices[j], k[i][j]);
                }
            }
        }

        let mut load = vec![0.0; mesh.n_vertices()];
        if !spec.flux.is_zero() {
            let rule = edge_gauss_rule(SMOOTH_EDGE_POINTS)?;
            for s in segments(mesh, BoundaryLabel::GammaA) {
                let (mut la, mut lb) = (0.0, 0.0);
                for (t, w) in rule.iter() {
                    let g = spec.flux.value(s.pa.lerp(s.pb, t));
                    la += w * g * (1.0 - t);
                    lb += w * g * t;
                }
                load[s.a] += s.len * la;
                load[s.b] += s.len * lb;
            }
        }

        let cathode_rule =
            edge_gauss_rule(if spec.law.is_polynomial() { CUBIC_EDGE_POINTS } else { SMOOTH_EDGE_POINTS })?;
        Ok(Discretization { mesh, spec, stiffness, load, cathode: segments(mesh, BoundaryLabel::GammaC), cathode_rule })
    }

    /// `G(u)`.
    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.stiffness.matvec(u);
        let law = &self.spec.law;
        for s in &self.cathode {
            let (mut ra, mut rb) = (0.0, 0.0);
            for (t, w) in self.cathode_rule.iter() {
                let f = law.value(u[s.a] * (1.0 - t) + u[s.b] * t)?;
                ra += w * f * (1.0 - t);
                rb += w * f * t;
            }
            r[s.a] += s.len * ra;
            r[s.b] += s.len * rb;
        }
        for (ri, li) in r.iter_mut().zip(&self.load) {
            *ri -= li;
        }
        Ok(r)
    }

    /// `G'(u) = K + B(u)` with `B_ij = int_{Gamma_C} f'(u) phi_i phi_j`.
    pub fn jacobian(&self, u: &[f64]) -> Result<SparseMatrix> {
        let mut jac = self.stiffness.clone();
        let law = &self.spec.law;
        for s in &self.cathode {
            let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
            for (t, w) in self.cathode_rule.iter() {
                let d = w * law.derivative(u[s.a] * (1.0 - t) + u[s.b] * t)?;
                aa += d * (1.0 - t) * (1.0 - t);
                ab += d * (1.0 - t) * t;
                bb += d * t * t;
            }
            jac.add(s.a, s.a, s.len * aa);
            jac.add(s.a, s.b, s.len * ab);
            jac.add(s.b, s.a, s.len * ab);
            jac.add(s.b, s.b, s.len * bb);
        }
        Ok(jac)
    }

    /// `J(u)`.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        let ku = self.stiffness.matvec(u);
        let quadratic: f64 = 0.5 * u.iter().zip(&ku).map(|(a, b)| a * b).sum::<f64>();
        let mut boundary = 0.0;
        for s in &self.cathode {
            let mut acc = 0.0;
            for (t, w) in self.cathode_rule.iter() {
                acc += w * self.spec.law.antiderivative(u[s.a] * (1.0 - t) + u[s.b] * t)?;
            }
            boundary += s.len * acc;
        }
        let load: f64 = u.iter().zip(&self.load).map(|(a, b)| a * b).sum();
        Ok(quadratic + boundary - load)
    }
}

pub fn assemble_residual(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction) -> Result<Vec<f64>> {
    u.check(mesh)?;
    Discretization::new(mesh, spec)?.residual(&u.coeffs)
}

pub fn assemble_jacobian(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction) -> Result<SparseMatrix> {
    u.check(mesh)?;
    Discretization::new(mesh, spec)?.jacobian(&u.coeffs)
}

pub fn energy_functional(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction) -> Result<f64> {
    u.check(mesh)?;
    Discretization::new(mesh, spec)?.energy(&u.coeffs)
}

/// `|u|_{H^1}^2 = sum_T |T| |grad u|_T|^2`.
pub fn h1_seminorm_sq(mesh: &Mesh, coeffs: &[f64]) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = mesh.gradient(t, coeffs);
            mesh.area(t) * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// `||u||_{L^2}^2` with the degree-2 triangle rule (exact for P1).
pub fn l2_norm_sq(mesh: &Mesh, coeffs: &[f64]) -> f64 {
    let rule = triangle_rule(2).expect("degree-2 rule exists");
    (0..mesh.n_triangles())
        .map(|t| {
            let v = mesh.triangles[t].vertices;
            let area = mesh.area(t);
            rule.iter()
                .map(|(b, w)| {
                    let val = b[0] * coeffs[v[0]] + b[1] * coeffs[v[1]] + b[2] * coeffs[v[2]];
                    2.0 * area * w * val * val
                })
                .sum::<f64>()
        })
        .sum()
}

pub fn h1_norm_sq(mesh: &Mesh, coeffs: &[f64]) -> f64 {
    h1_seminorm_sq(mesh, coeffs) + l2_norm_sq(mesh, coeffs)
}
