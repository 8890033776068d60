//! Newest vertex bisection towards the re-entrant corner of the L-shape.
//!
//! Writes `nvb_refinement.mesh` and `nvb_refinement.vtk` to the directory
//! given as the first argument (default: current directory).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use afem::mesh::{write_mesh, write_vtk, RefineMode};
use afem::problem::ProblemSpec;
use anyhow::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let spec = ProblemSpec::example(2)?;
    let mut mesh = spec.initial_mesh(0.5)?;
    println!("round  triangles  vertices  shape_regularity");
    for round in 0..12 {
        let corner: Vec<usize> = (0..mesh.n_triangles())
            .filter(|&t| mesh.triangle_points(t).iter().any(|p| p.x == 0.0 && p.y == 0.0))
            .collect();
        let mode = if round % 2 == 0 { RefineMode::AllEdges } else { RefineMode::SingleEdge };
        mesh = mesh.refine(&corner, mode)?;
        mesh.validate_conformity()?;
        println!("{round:>5}  {:>9}  {:>8}  {:>16.4}", mesh.n_triangles(), mesh.n_vertices(), mesh.shape_regularity());
    }
    println!("area = {:.15}", mesh.total_area());

    write_mesh(&mesh, BufWriter::new(File::create(out.join("nvb_refinement.mesh"))?))?;
    // every bisection halves the area of the initial 0.125 triangles
    let level: Vec<f64> = (0..mesh.n_triangles()).map(|t| (0.125 / mesh.area(t)).log2().round()).collect();
    write_vtk(&mesh, &[], &[("bisections", &level)], BufWriter::new(File::create(out.join("nvb_refinement.vtk"))?))?;
    Ok(())
}
