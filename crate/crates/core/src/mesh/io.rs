//! Plain-text mesh format and legacy VTK export.
//!
//! ```text
//! afem-mesh v1
//! <n_vertices>
//! x y                       (one line per vertex)
//! <n_triangles>
//! v0 v1 v2 refedge sigma    (one line per triangle)
//! v0 v1 LABEL               (one line per boundary edge, until EOF)
//! ```
//!
//! Floats are written in shortest round-trip form, so write/read is exact.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{BoundaryLabel, Mesh, Point, Triangle};
use crate::{Error, Result};

const HEADER: &str = "afem-mesh v1";

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{}", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(out, "{} {}", p.x, p.y)?;
    }
    writeln!(out, "{}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        let [a, b, c] = t.vertices;
        writeln!(out, "{a} {b} {c} {} {}", t.refinement_edge, t.sigma)?;
    }
    for e in mesh.edges.iter().filter(|e| e.is_boundary()) {
        writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.label)?;
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing field")))?;
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: cannot parse `{tok}`")))
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<(usize, String)> {
        loop {
            match lines.next() {
                Some((i, l)) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        return Ok((i, l));
                    }
                }
                None => return Err(Error::Parse("unexpected end of file".into())),
            }
        }
    };

    let (_, header) = next()?;
    if header.trim() != HEADER {
        return Err(Error::Parse(format!("expected `{HEADER}` header, found `{}`", header.trim())));
    }
    let (i, l) = next()?;
    let nv: usize = parse(Some(l.trim()), i)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (i, l) = next()?;
        let mut it = l.split_whitespace();
        vertices.push(Point::new(parse(it.next(), i)?, parse(it.next(), i)?));
    }
    let (i, l) = next()?;
    let nt: usize = parse(Some(l.trim()), i)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (i, l) = next()?;
        let mut it = l.split_whitespace();
        let vertices = [parse(it.next(), i)?, parse(it.next(), i)?, parse(it.next(), i)?];
        let refinement_edge: u8 = parse(it.next(), i)?;
        let sigma: f64 = parse(it.next(), i)?;
        triangles.push(Triangle { vertices, refinement_edge, sigma });
    }
    let mut labels = HashMap::new();
    loop {
        let (i, l) = match next() {
            Ok(x) => x,
            Err(Error::Parse(_)) => break,
            Err(e) => return Err(e),
        };
        let mut it = l.split_whitespace();
        let a: usize = parse(it.next(), i)?;
        let b: usize = parse(it.next(), i)?;
        let label: BoundaryLabel = parse(it.next(), i)?;
        labels.insert([a.min(b), a.max(b)], label);
    }
    Mesh::from_labeled_edges(vertices, triangles, &labels)
}

/// Legacy ASCII VTK unstructured grid with optional per-vertex and
/// per-triangle scalar fields.
pub fn write_vtk<W: Write>(
    mesh: &Mesh,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
    mut out: W,
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "afem mesh {}", mesh.generation)?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(out, "{} {} 0", p.x, p.y)?;
    }
    let nt = mesh.triangles.len();
    writeln!(out, "CELLS {nt} {}", 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t.vertices[0], t.vertices[1], t.vertices[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.vertices.len())?;
        for (name, values) in point_data {
            writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
            for v in *values {
                writeln!(out, "{v}")?;
            }
        }
    }
    if !cell_data.is_empty() {
        writeln!(out, "CELL_DATA {nt}")?;
        for (name, values) in cell_data {
            writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
            for v in *values {
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lshape_initial, BoundaryPartition, LabeledSegment, RefineMode};

    #[test]
    fn text_round_trip_is_exact() {
        let p = BoundaryPartition {
            segments: vec![LabeledSegment::new(Point::new(-1.0, -1.0), Point::new(-1.0, 1.0), BoundaryLabel::GammaC)],
            default: BoundaryLabel::GammaA,
        };
        let m = build_lshape_initial(0.5, &p, 1.0).unwrap().refine(&[0, 5], RefineMode::AllEdges).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(&buf[..]).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.edges, m.edges);
        back.validate_conformity().unwrap();
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(read_mesh(&b"afem-mesh v2\n0\n0\n"[..]), Err(Error::Parse(_))));
    }

    #[test]
    fn truncated_file_rejected() {
        assert!(read_mesh(&b"afem-mesh v1\n3\n0 0\n1 0\n"[..]).is_err());
    }

    #[test]
    fn vtk_has_expected_sections() {
        let m = build_lshape_initial(1.0, &BoundaryPartition::uniform(BoundaryLabel::GammaA), 1.0).unwrap();
        let u = vec![0.0; m.n_vertices()];
        let eta = vec![1.0; m.n_triangles()];
        let mut buf = Vec::new();
        write_vtk(&m, &[("u", &u)], &[("eta_sq", &eta)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("POINTS 8 double"));
        assert!(s.contains("CELLS 6 24"));
        assert!(s.contains("POINT_DATA 8"));
        assert!(s.contains("CELL_DATA 6"));
    }
}
