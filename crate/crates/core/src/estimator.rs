//! Residual error indicators
//!
//! ```text
//! eta_T^2 = h_T^2 ||R_T||^2 + 1/2 sum_{F interior} h_T ||J_F||^2 + sum_{F boundary} h_T ||J_F||^2
//! osc_T^2 = h_T^2 ||R_T - R_T'||^2 + sum_F h_T ||J_F - J_F'||^2
//! ```
//!
//! with `h_T = |T|^{1/2}` and primes denoting L2 projections onto
//! polynomials. For P1 functions and elementwise constant `sigma` the
//! element residual `R_T = div(sigma grad u)` vanishes identically.
//! Edge residuals are
//!
//! | edge      | `J_F`                       |
//! |-----------|-----------------------------|
//! | interior  | `[sigma grad u . n_F]`      |
//! | `Gamma_0` | `sigma grad u . n`          |
//! | `Gamma_A` | `g - sigma grad u . n`      |
//! | `Gamma_C` | `f(u) + sigma grad u . n`   |
//!
//! The projection degree is 3 on cathode edges with the cubic law and 0
//! everywhere else.

use std::io::Write;

use crate::assembly::{edge_gauss_rule, EdgeRule, FeFunction};
use crate::mesh::{BoundaryLabel, Mesh};
use crate::problem::ProblemSpec;
use crate::Result;

/// Gauss points for all edge norms. Squared cubic-law residuals have
/// degree 6; the rest is for Butler-Volmer and `sin(20y)` data, whose
/// square completes up to 8 radians of oscillation on a coarse edge.
pub const ESTIMATOR_EDGE_POINTS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorField {
    pub mesh_generation: u64,
    pub eta_sq: Vec<f64>,
    pub osc_sq: Vec<f64>,
}

impl IndicatorField {
    pub fn eta_sq_sum(&self) -> f64 {
        self.eta_sq.iter().sum()
    }

    pub fn osc_sq_sum(&self) -> f64 {
        self.osc_sq.iter().sum()
    }

    /// Writes `element_id,eta_sq,osc_sq` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "element_id,eta_sq,osc_sq")?;
        for (i, (e, o)) in self.eta_sq.iter().zip(&self.osc_sq).enumerate() {
            writeln!(out, "{i},{e:e},{o:e}")?;
        }
        Ok(())
    }
}

/// Sums of `eta_T^2` and `osc_T^2` over `subset` (all elements if `None`),
/// accumulated in the order given.
pub fn global_indicator(field: &IndicatorField, subset: Option<&[usize]>) -> (f64, f64) {
    match subset {
        None => (field.eta_sq_sum(), field.osc_sq_sum()),
        Some(ids) => ids
            .iter()
            .fold((0.0, 0.0), |(e, o), &t| (e + field.eta_sq[t], o + field.osc_sq[t])),
    }
}

/// Shifted Legendre polynomial `P_k(2t - 1)` on `[0, 1]`, `k <= 3`.
fn shifted_legendre(k: usize, t: f64) -> f64 {
    let x = 2.0 * t - 1.0;
    match k {
        0 => 1.0,
        1 => x,
        2 => 0.5 * (3.0 * x * x - 1.0),
        3 => 0.5 * (5.0 * x * x * x - 3.0 * x),
        _ => unreachable!("projection degree above 3"),
    }
}

/// Samples of `J_F` at the quadrature points of `rule` (parametrised from
/// the lower to the higher vertex id).
pub fn edge_residual(mesh: &Mesh, spec: &ProblemSpec, u: &[f64], e: usize, rule: &EdgeRule) -> Result<Vec<f64>> {
    let edge = &mesh.edges[e];
    let n = mesh.edge_normal(e);
    let flux = |t: usize| {
        let g = mesh.gradient(t, u);
        mesh.triangles[t].sigma * (g[0] * n[0] + g[1] * n[1])
    };
    let own = flux(edge.first);
    let [a, b] = edge.vertices;
    let [pa, pb] = mesh.edge_points(e);
    rule.points
        .iter()
        .map(|&t| {
            Ok(match (edge.second, edge.label) {
                (Some(other), _) => own - flux(other),
                (None, BoundaryLabel::GammaA) => spec.flux.value(pa.lerp(pb, t)) - own,
                (None, BoundaryLabel::GammaC) => spec.law.value(u[a] * (1.0 - t) + u[b] * t)? + own,
                (None, _) => own,
            })
        })
        .collect()
}

/// Degree of the polynomial space `J_F` is projected onto for oscillation.
pub fn projection_degree(mesh: &Mesh, spec: &ProblemSpec, e: usize) -> usize {
    let edge = &mesh.edges[e];
    if edge.second.is_none() && edge.label == BoundaryLabel::GammaC && spec.law.is_polynomial() {
        3
    } else {
        0
    }
}

/// L2 projection of sampled values onto polynomials of `degree` on the
/// edge, returned at the same quadrature points.
pub fn project(samples: &[f64], rule: &EdgeRule, degree: usize) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..=degree)
        .map(|k| {
            let m: f64 = rule.iter().zip(samples).map(|((t, w), s)| w * s * shifted_legendre(k, t)).sum();
            (2 * k + 1) as f64 * m
        })
        .collect();
    rule.points
        .iter()
        .map(|&t| coeffs.iter().enumerate().map(|(k, c)| c * shifted_legendre(k, t)).sum())
        .collect()
}

fn weighted_sq(samples: &[f64], rule: &EdgeRule, len: f64) -> f64 {
    len * rule.weights.iter().zip(samples).map(|(w, s)| w * s * s).sum::<f64>()
}

/// `(||J_F||^2, ||J_F - J_F'||^2)` over edge `e`.
fn edge_norms(mesh: &Mesh, spec: &ProblemSpec, u: &[f64], e: usize, rule: &EdgeRule) -> Result<(f64, f64)> {
    let j = edge_residual(mesh, spec, u, e, rule)?;
    let proj = project(&j, rule, projection_degree(mesh, spec, e));
    let diff: Vec<f64> = j.iter().zip(&proj).map(|(a, b)| a - b).collect();
    let len = mesh.edge_length(e);
    Ok((weighted_sq(&j, rule, len), weighted_sq(&diff, rule, len)))
}

/// `eta_T^2` and `osc_T^2` for every element.
pub fn compute_indicators(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction) -> Result<IndicatorField> {
    u.check(mesh)?;
    let rule = edge_gauss_rule(ESTIMATOR_EDGE_POINTS)?;
    let norms = (0..mesh.edges.len())
        .map(|e| edge_norms(mesh, spec, &u.coeffs, e, &rule))
        .collect::<Result<Vec<_>>>()?;
    let mut eta_sq = Vec::with_capacity(mesh.n_triangles());
    let mut osc_sq = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let h = mesh.mesh_size(t);
        let (mut eta, mut osc) = (0.0, 0.0);
        for &e in &mesh.triangle_edges[t] {
            let (j, d) = norms[e];
            let weight = if mesh.edges[e].is_boundary() { h } else { 0.5 * h };
            eta += weight * j;
            osc += h * d;
        }
        eta_sq.push(eta);
        osc_sq.push(osc);
    }
    Ok(IndicatorField { mesh_generation: mesh.generation, eta_sq, osc_sq })
}

/// `eta_T^2` for a single element.
pub fn local_indicator(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction, t: usize) -> Result<f64> {
    Ok(local_terms(mesh, spec, u, t)?.0)
}

/// `osc_T^2` for a single element.
pub fn local_oscillation(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction, t: usize) -> Result<f64> {
    Ok(local_terms(mesh, spec, u, t)?.1)
}

fn local_terms(mesh: &Mesh, spec: &ProblemSpec, u: &FeFunction, t: usize) -> Result<(f64, f64)> {
    u.check(mesh)?;
    if t >= mesh.n_triangles() {
        return Err(crate::Error::UnknownTriangle(t));
    }
    let rule = edge_gauss_rule(ESTIMATOR_EDGE_POINTS)?;
    let h = mesh.mesh_size(t);
    let (mut eta, mut osc) = (0.0, 0.0);
    for &e in &mesh.triangle_edges[t] {
        let (j, d) = edge_norms(mesh, spec, &u.coeffs, e, &rule)?;
        eta += if mesh.edges[e].is_boundary() { h * j } else { 0.5 * h * j };
        osc += h * d;
    }
    Ok((eta, osc))
}
