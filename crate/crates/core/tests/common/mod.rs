//! Checks shared by the property tests and the acceptance report.

use afem::adapt::doerfler_mark;
use afem::assembly::{Discretization, FeFunction};
use afem::estimator::compute_indicators;
use afem::mesh::{Mesh, Point, RefineMode};
use afem::problem::ProblemSpec;
use afem::solver::{interpolate, newton_solve, ADAPTIVE_EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The property suite of the acceptance report, in reporting order.
#[allow(dead_code)]
pub const PROPERTY_CHECKS: &[(&str, fn())] = &[
    ("Jacobian equals finite difference of residual", jacobian_matches_finite_differences),
    ("residual equals gradient of energy", residual_is_energy_gradient),
    ("residual matches dense oracle on 6 triangles", residual_matches_dense_oracle),
    ("Doerfler matches exhaustive minimal cardinality", doerfler_matches_exhaustive_search),
    ("conformity and area after 20 random refinements", random_refinement_stays_conforming),
    ("shape regularity within 2x after 20 NVB rounds", shape_regularity_bounded_under_nvb),
    ("zero data gives zero solution and estimator", zero_data_gives_zero_solution_and_estimator),
    ("frozen-function estimator reduction", frozen_function_estimator_reduction),
];

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn random_state(mesh: &Mesh, rng: &mut impl Rng, scale: f64) -> Vec<f64> {
    (0..mesh.n_vertices()).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn axpy(u: &[f64], a: f64, v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(x, y)| x + a * y).collect()
}

pub fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for id in [1, 2] {
        let spec = ProblemSpec::example(id).unwrap();
        let mesh = spec.initial_mesh(0.25).unwrap();
        let d = Discretization::new(&mesh, &spec).unwrap();
        let scale = if id == 1 { 2.0 } else { 0.5 };
        for _ in 0..5 {
            let u = random_state(&mesh, &mut rng, scale);
            let v = random_state(&mesh, &mut rng, 1.0);
            let jv = d.jacobian(&u).unwrap().matvec(&v);
            let h = 1e-6;
            let gp = d.residual(&axpy(&u, h, &v)).unwrap();
            let gm = d.residual(&axpy(&u, -h, &v)).unwrap();
            let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let diff: Vec<f64> = jv.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let rel = norm(&diff) / norm(&jv);
            assert!(rel < 1e-6, "example {id}: relative difference {rel:e}");
        }
    }
}

pub fn residual_is_energy_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for id in [1, 2] {
        let spec = ProblemSpec::example(id).unwrap();
        let mesh = spec.initial_mesh(0.25).unwrap();
        let d = Discretization::new(&mesh, &spec).unwrap();
        let scale = if id == 1 { 2.0 } else { 0.5 };
        for _ in 0..5 {
            let u = random_state(&mesh, &mut rng, scale);
            let v = random_state(&mesh, &mut rng, 1.0);
            let g = d.residual(&u).unwrap();
            let directional: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
            let h = 1e-5;
            let fd = (d.energy(&axpy(&u, h, &v)).unwrap() - d.energy(&axpy(&u, -h, &v)).unwrap()) / (2.0 * h);
            let rel = (directional - fd).abs() / directional.abs();
            assert!(rel < 1e-6, "example {id}: {directional} vs {fd}");
        }
    }
}

/// Residual of the cubic-law problem assembled from scratch: dense
/// stiffness from vertex coordinates, boundary edges found by counting,
/// and Boole's rule (exact to degree 5) on every boundary edge.
pub fn dense_residual_example1(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    let n = mesh.n_vertices();
    let mut k = vec![vec![0.0; n]; n];
    let mut edge_count = std::collections::HashMap::new();
    for t in &mesh.triangles {
        let [a, b, c] = t.vertices.map(|v| mesh.vertices[v]);
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let area = det.abs() / 2.0;
        // gradients of barycentric coordinates
        let g = [
            [(b.y - c.y) / det, (c.x - b.x) / det],
            [(c.y - a.y) / det, (a.x - c.x) / det],
            [(a.y - b.y) / det, (b.x - a.x) / det],
        ];
        for i in 0..3 {
            for j in 0..3 {
                k[t.vertices[i]][t.vertices[j]] += area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
        for (p, q) in [(0, 1), (1, 2), (2, 0)] {
            let key = (t.vertices[p].min(t.vertices[q]), t.vertices[p].max(t.vertices[q]));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    let mut r: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * u[j]).sum()).collect();
    let boole = [(0.0, 7.0), (0.25, 32.0), (0.5, 12.0), (0.75, 32.0), (1.0, 7.0)];
    for (&(a, b), &count) in &edge_count {
        if count != 1 {
            continue;
        }
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let len = ((pb.x - pa.x).powi(2) + (pb.y - pa.y).powi(2)).sqrt();
        let cathode = pa.x == -1.0 && pb.x == -1.0;
        for &(s, w) in &boole {
            let w = w / 90.0 * len;
            let x = pa.x + s * (pb.x - pa.x);
            let y = pa.y + s * (pb.y - pa.y);
            let value = if cathode {
                let uu = (1.0 - s) * u[a] + s * u[b];
                uu + uu * uu * uu
            } else {
                -(x * x + y * y)
            };
            r[a] += w * value * (1.0 - s);
            r[b] += w * value * s;
        }
    }
    r
}

pub fn residual_matches_dense_oracle() {
    let spec = ProblemSpec::example(1).unwrap();
    let mesh = spec.initial_mesh(1.0).unwrap();
    assert_eq!(mesh.n_triangles(), 6);
    let d = Discretization::new(&mesh, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let u = random_state(&mesh, &mut rng, 2.0);
        let ours = d.residual(&u).unwrap();
        let oracle = dense_residual_example1(&mesh, &u);
        let diff: Vec<f64> = ours.iter().zip(&oracle).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&oracle);
        assert!(rel < 1e-12, "relative difference {rel:e}");
    }
}

pub fn min_cardinality_bruteforce(values: &[f64], theta: f64) -> usize {
    let total: f64 = values.iter().sum();
    let n = values.len();
    (0u32..1 << n)
        .filter(|mask| {
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum();
            s >= theta * total * (1.0 - 1e-12)
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

pub fn doerfler_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..12 {
        let n = rng.gen_range(1..=12);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64).powi(3)).collect();
        let theta = rng.gen_range(0.05..1.0);
        let marked = doerfler_mark(&values, theta).unwrap();
        assert_eq!(marked.len(), min_cardinality_bruteforce(&values, theta), "{values:?} theta={theta}");
        let total: f64 = values.iter().sum();
        let s: f64 = marked.iter().map(|&i| values[i]).sum();
        assert!(s >= theta * total * (1.0 - 1e-12));
    }
}

/// Every edge bordering one triangle lies on the L-shape boundary, every
/// other edge borders exactly two, and no vertex sits inside any edge.
pub fn assert_conforming_bruteforce(mesh: &Mesh) {
    let mut edges = std::collections::HashMap::new();
    for t in &mesh.triangles {
        for (p, q) in [(0, 1), (1, 2), (2, 0)] {
            let (a, b) = (t.vertices[p], t.vertices[q]);
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let on_boundary = |p: Point| {
        let eps = 1e-12;
        let on = |v: f64, c: f64| (v - c).abs() < eps;
        let within = |v: f64, lo: f64, hi: f64| v >= lo - eps && v <= hi + eps;
        (on(p.x, -1.0) && within(p.y, -1.0, 1.0))
            || (on(p.y, 1.0) && within(p.x, -1.0, 1.0))
            || (on(p.x, 1.0) && within(p.y, 0.0, 1.0))
            || (on(p.y, 0.0) && within(p.x, 0.0, 1.0))
            || (on(p.x, 0.0) && within(p.y, -1.0, 0.0))
            || (on(p.y, -1.0) && within(p.x, -1.0, 0.0))
    };
    for (&(a, b), &count) in &edges {
        assert!(count <= 2, "edge ({a}, {b}) shared by {count} triangles");
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        if count == 1 {
            let mid = Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y));
            assert!(on_boundary(pa) && on_boundary(pb) && on_boundary(mid), "interior edge ({a}, {b}) is one-sided");
        }
        for (v, p) in mesh.vertices.iter().enumerate() {
            if v == a || v == b {
                continue;
            }
            let cross = (pb.x - pa.x) * (p.y - pa.y) - (pb.y - pa.y) * (p.x - pa.x);
            let dot = (p.x - pa.x) * (pb.x - pa.x) + (p.y - pa.y) * (pb.y - pa.y);
            let len2 = (pb.x - pa.x).powi(2) + (pb.y - pa.y).powi(2);
            let inside = cross.abs() <= 1e-12 * len2 && dot > 0.0 && dot < len2;
            assert!(!inside, "vertex {v} hangs on edge ({a}, {b})");
        }
    }
}

pub fn random_refinement_stays_conforming() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ProblemSpec::example(2).unwrap();
    let mut mesh = spec.initial_mesh(0.5).unwrap();
    for _ in 0..20 {
        let count = rng.gen_range(1..=4);
        let marked: Vec<usize> = (0..count).map(|_| rng.gen_range(0..mesh.n_triangles())).collect();
        let mode = if rng.gen_bool(0.5) { RefineMode::AllEdges } else { RefineMode::SingleEdge };
        mesh = mesh.refine(&marked, mode).unwrap();
        mesh.validate_conformity().unwrap();
        assert_conforming_bruteforce(&mesh);
        assert!((mesh.total_area() - 3.0).abs() < 1e-12);
    }
}

pub fn shape_regularity_bounded_under_nvb() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = ProblemSpec::example(1).unwrap();
    let mut mesh = spec.initial_mesh(0.2).unwrap();
    let initial = mesh.shape_regularity();
    for round in 0..20 {
        // triangles touching the re-entrant corner, plus random picks
        let mut marked: Vec<usize> = (0..mesh.n_triangles())
            .filter(|&t| mesh.triangle_points(t).iter().any(|p| p.x == 0.0 && p.y == 0.0))
            .collect();
        marked.extend((0..3).map(|_| rng.gen_range(0..mesh.n_triangles())));
        let mode = if round % 2 == 0 { RefineMode::AllEdges } else { RefineMode::SingleEdge };
        mesh = mesh.refine(&marked, mode).unwrap();
        assert!(mesh.shape_regularity() <= 2.0 * initial + 1e-12, "round {round}");
    }
}

pub fn zero_data_gives_zero_solution_and_estimator() {
    for id in [1, 2] {
        let spec = ProblemSpec::example(id).unwrap().with_zero_flux();
        let mesh = spec.initial_mesh(0.2).unwrap();
        let (u, _) = newton_solve(&mesh, &spec, &FeFunction::zeros(&mesh), ADAPTIVE_EPS, 50).unwrap();
        assert!(u.coeffs.iter().all(|&c| c == 0.0));
        let field = compute_indicators(&mesh, &spec, &u).unwrap();
        assert_eq!(field.eta_sq_sum(), 0.0);
    }
}

pub fn frozen_function_estimator_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for id in [1, 2] {
        let spec = ProblemSpec::example(id).unwrap();
        let mut mesh = spec.initial_mesh(0.2).unwrap();
        for _ in 0..3 {
            let marked: Vec<usize> = (0..5).map(|_| rng.gen_range(0..mesh.n_triangles())).collect();
            mesh = mesh.refine(&marked, RefineMode::AllEdges).unwrap();
        }
        let u = FeFunction::new(&mesh, random_state(&mesh, &mut rng, 0.5)).unwrap();
        let fine = mesh.refine_uniform().unwrap();
        let uf = interpolate(&u, &fine).unwrap();
        let coarse = compute_indicators(&mesh, &spec, &u).unwrap().eta_sq_sum();
        let refined = compute_indicators(&fine, &spec, &uf).unwrap().eta_sq_sum();
        assert!(refined <= coarse / 2f64.sqrt() + 1e-12, "example {id}: {refined} vs {coarse}");
    }
}
