use crate::assembly::FeFunction;
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Prolongs `u` from the parent of `fine` onto `fine`: old vertices keep
/// their values and each bisection midpoint gets the mean of its edge's
/// endpoints.
pub fn interpolate(u: &FeFunction, fine: &Mesh) -> Result<FeFunction> {
    let history = fine
        .history
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("target mesh has no refinement history".into()))?;
    if history.parent_generation != u.generation {
        return Err(Error::GenerationMismatch { expected: history.parent_generation, found: u.generation });
    }
    let n_old = fine.n_vertices() - history.new_vertex_parents.len();
    if u.coeffs.len() != n_old {
        return Err(Error::InvalidParameter(format!(
            "function has {} coefficients, parent mesh had {n_old} vertices",
            u.coeffs.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(fine.n_vertices());
    coeffs.extend_from_slice(&u.coeffs);
    for &[a, b] in &history.new_vertex_parents {
        let v = 0.5 * (coeffs[a] + coeffs[b]);
        coeffs.push(v);
    }
    Ok(FeFunction { generation: fine.generation, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RefineMode;
    use crate::problem::ProblemSpec;

    #[test]
    fn linear_functions_are_reproduced() {
        let spec = ProblemSpec::example(1).unwrap();
        let mut mesh = spec.initial_mesh(0.5).unwrap();
        let f = |p: crate::mesh::Point| 0.3 - 1.5 * p.x + 2.25 * p.y;
        let mut u = FeFunction::from_fn(&mesh, f);
        for round in 0..4 {
            let marked: Vec<usize> = (0..mesh.n_triangles()).filter(|t| t % 3 == round % 3).collect();
            let fine = mesh.refine(&marked, RefineMode::AllEdges).unwrap();
            u = interpolate(&u, &fine).unwrap();
            let exact = FeFunction::from_fn(&fine, f);
            for (a, b) in u.coeffs.iter().zip(&exact.coeffs) {
                assert!((a - b).abs() < 1e-14);
            }
            mesh = fine;
        }
    }

    #[test]
    fn constants_stay_constant() {
        let spec = ProblemSpec::example(2).unwrap();
        let mesh = spec.initial_mesh(0.5).unwrap();
        let u = FeFunction::from_fn(&mesh, |_| -4.0);
        let fine = mesh.refine_uniform().unwrap();
        assert!(interpolate(&u, &fine).unwrap().coeffs.iter().all(|&c| c == -4.0));
    }

    #[test]
    fn wrong_parent_rejected() {
        let spec = ProblemSpec::example(1).unwrap();
        let a = spec.initial_mesh(0.5).unwrap();
        let b = spec.initial_mesh(0.5).unwrap();
        let fine = a.refine_uniform().unwrap();
        assert!(matches!(interpolate(&FeFunction::zeros(&b), &fine), Err(Error::GenerationMismatch { .. })));
        assert!(interpolate(&FeFunction::zeros(&a), &a).is_err());
    }
}
