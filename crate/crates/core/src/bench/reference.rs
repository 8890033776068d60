use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::assembly::{h1_norm_sq, triangle_rule, FeFunction};
use crate::mesh::{build_lshape_divisions, Mesh, Point, PointLocator};
use crate::problem::ProblemSpec;
use crate::solver::{newton_solve, DEFAULT_MAX_ITER, REFERENCE_EPS};
use crate::{Error, Result};

use super::thread_pool;

/// Tolerance for the intermediate levels of the nested reference solve.
const NESTED_EPS: f64 = 1e-8;
/// Coarsest level of the nested reference solve.
const NESTED_START: usize = 4;
/// Reference triangles per parallel work unit (fixes the summation order).
const CHUNK: usize = 4096;

/// Solution on a fine uniform mesh that stands in for the exact solution.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    /// Squares per unit length (`h = 1/divisions`).
    pub divisions: usize,
    pub mesh: Mesh,
    pub solution: FeFunction,
    pub eps: f64,
    pub h1_norm: f64,
    pub energy: f64,
}

/// `h` as an integer number of divisions of the unit length.
pub fn divisions_for(h: f64) -> Result<usize> {
    let n = (1.0 / h).round();
    if !(h > 0.0) || !h.is_finite() || n < 1.0 || (n * h - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeshSize(h));
    }
    Ok(n as usize)
}

/// Nodal values of `u` (on `from`) at the vertices of `to`.
pub fn transfer(from: &Mesh, u: &FeFunction, to: &Mesh) -> Result<FeFunction> {
    u.check(from)?;
    let locator = PointLocator::new(from);
    let coeffs = to.vertices.iter().map(|&p| locator.evaluate(&u.coeffs, p)).collect::<Result<_>>()?;
    Ok(FeFunction { generation: to.generation, coeffs })
}

/// Newton solve on the uniform mesh with `h = 1/divisions`, started by
/// nested iteration from coarser uniform meshes (`divisions / 2^k`, down to
/// 4) and finished at tolerance `eps`.
pub fn reference_solve(spec: &ProblemSpec, divisions: usize, eps: f64) -> Result<ReferenceSolution> {
    reference_solve_with(spec, divisions, eps, &mut |_, _| {})
}

/// As [`reference_solve`], reporting `(divisions, newton iterations)` after
/// every level.
pub fn reference_solve_with(
    spec: &ProblemSpec,
    divisions: usize,
    eps: f64,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<ReferenceSolution> {
    if eps > REFERENCE_EPS {
        return Err(Error::InvalidParameter(format!("reference tolerance {eps:e} exceeds {REFERENCE_EPS:e}")));
    }
    spec.validate()?;
    let mut levels = vec![divisions];
    while levels.last().is_some_and(|&n| n % 2 == 0 && n / 2 >= NESTED_START) {
        levels.push(levels.last().unwrap() / 2);
    }
    levels.reverse();

    let mut previous: Option<(Mesh, FeFunction)> = None;
    for (i, &n) in levels.iter().enumerate() {
        let mesh = build_lshape_divisions(n, &spec.partition, spec.sigma)?;
        let guess = match &previous {
            Some((m, u)) => transfer(m, u, &mesh)?,
            None => FeFunction::zeros(&mesh),
        };
        let tol = if i + 1 == levels.len() { eps } else { NESTED_EPS.max(eps) };
        let (u, report) = newton_solve(&mesh, spec, &guess, tol, DEFAULT_MAX_ITER)?;
        progress(n, report.iterations);
        if i + 1 == levels.len() {
            let energy = *report.energies.last().expect("initial energy recorded");
            let h1_norm = h1_norm_sq(&mesh, &u.coeffs).sqrt();
            return Ok(ReferenceSolution { divisions, mesh, solution: u, eps: tol, h1_norm, energy });
        }
        previous = Some((mesh, u));
    }
    unreachable!("at least one level")
}

impl ReferenceSolution {
    /// Writes `afem-ref v1`, the divisions and tolerance, then the nodal values.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "afem-ref v1")?;
        writeln!(out, "{} {}", self.divisions, self.eps)?;
        self.solution.write(out)
    }

    /// Reads a file from [`ReferenceSolution::write`], rebuilding the mesh
    /// from `spec`.
    pub fn read<R: BufRead>(mut input: R, spec: &ProblemSpec) -> Result<Self> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        if line.trim() != "afem-ref v1" {
            return Err(Error::Parse("expected `afem-ref v1` header".into()));
        }
        line.clear();
        input.read_line(&mut line)?;
        let mut parts = line.split_whitespace();
        let bad = || Error::Parse("bad reference parameters".into());
        let divisions: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let eps: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let mesh = build_lshape_divisions(divisions, &spec.partition, spec.sigma)?;
        let solution = FeFunction::read(input)?.rebind(&mesh)?;
        let h1_norm = h1_norm_sq(&mesh, &solution.coeffs).sqrt();
        let energy = crate::assembly::energy_functional(&mesh, spec, &solution)?;
        Ok(ReferenceSolution { divisions, mesh, solution, eps, h1_norm, energy })
    }

    /// `||u_ref - u||^2_{H^1}` for `u` on `mesh`. The integrand is sampled
    /// at the degree-2 quadrature points of every reference triangle, with
    /// `u` evaluated on whichever triangle of `mesh` contains the point.
    pub fn h1_error_sq(&self, mesh: &Mesh, u: &FeFunction) -> Result<f64> {
        u.check(mesh)?;
        let locator = PointLocator::new(mesh);
        let rule = triangle_rule(2)?;
        let reference = &self.mesh;
        let uref = &self.solution.coeffs;
        let n = reference.n_triangles();
        let chunk_sum = |c: usize| -> Result<f64> {
            let mut acc = 0.0;
            for t in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let v = reference.triangles[t].vertices;
                let p = reference.triangle_points(t);
                let gref = reference.gradient(t, uref);
                let area = reference.area(t);
                for (b, w) in rule.iter() {
                    let q = Point::new(
                        b[0] * p[0].x + b[1] * p[1].x + b[2] * p[2].x,
                        b[0] * p[0].y + b[1] * p[1].y + b[2] * p[2].y,
                    );
                    let loc = locator.locate(q)?;
                    let g = mesh.gradient(loc.triangle, &u.coeffs);
                    let value = mesh.evaluate(&u.coeffs, &loc);
                    let rv = b[0] * uref[v[0]] + b[1] * uref[v[1]] + b[2] * uref[v[2]];
                    let (dx, dy, d) = (gref[0] - g[0], gref[1] - g[1], rv - value);
                    acc += 2.0 * area * w * (dx * dx + dy * dy + d * d);
                }
            }
            Ok(acc)
        };
        let chunks = n.div_ceil(CHUNK);
        let partial: Vec<Result<f64>> = thread_pool().install(|| (0..chunks).into_par_iter().map(chunk_sum).collect());
        let mut total = 0.0;
        for p in partial {
            total += p?;
        }
        Ok(total)
    }

    /// `||u_ref - u||_{H^1} / ||u_ref||_{H^1}`.
    pub fn relative_h1_error(&self, mesh: &Mesh, u: &FeFunction) -> Result<f64> {
        Ok(self.h1_error_sq(mesh, u)?.sqrt() / self.h1_norm)
    }
}
