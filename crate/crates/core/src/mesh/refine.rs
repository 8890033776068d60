//! Newest vertex bisection with conforming closure.
//!
//! Refinement works on marked edges: marked elements mark their edges, the
//! closure marks the refinement edge of every element that has any marked
//! edge, and each element is then split by recursive bisection of its
//! refinement edge. Every new vertex is the midpoint of an edge of the
//! input mesh.

use std::collections::{HashMap, VecDeque};
use std::str::FromStr;

use super::{Mesh, Point, RefinementHistory, Triangle};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefineMode {
    /// Bisect all three edges of a marked element (four children).
    #[default]
    AllEdges,
    /// Bisect only the refinement edge of a marked element.
    SingleEdge,
}

impl RefineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RefineMode::AllEdges => "all-edges",
            RefineMode::SingleEdge => "single-edge",
        }
    }
}

impl FromStr for RefineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-edges" => Ok(RefineMode::AllEdges),
            "single-edge" => Ok(RefineMode::SingleEdge),
            other => Err(Error::Parse(format!("unknown refinement mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for RefineMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Mesh {
    /// Refines the `marked` triangles and closes the result conformingly.
    ///
    /// Surviving vertices keep their ids; new vertices are appended in
    /// ascending order of the edge they bisect and recorded in
    /// [`Mesh::history`].
    pub fn refine(&self, marked: &[usize], mode: RefineMode) -> Result<Mesh> {
        let mut edge_marked = vec![false; self.edges.len()];
        for &t in marked {
            let edges = self.triangle_edges.get(t).ok_or(Error::UnknownTriangle(t))?;
            match mode {
                RefineMode::AllEdges => edges.iter().for_each(|&e| edge_marked[e] = true),
                RefineMode::SingleEdge => edge_marked[edges[self.triangles[t].refinement_edge as usize]] = true,
            }
        }
        self.close(&mut edge_marked);

        let n_old = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut midpoint = HashMap::new();
        let mut new_vertex_parents = Vec::new();
        for (e, _) in edge_marked.iter().enumerate().filter(|(_, &m)| m) {
            let [a, b] = self.edges[e].vertices;
            midpoint.insert([a, b], vertices.len());
            vertices.push(self.vertices[a].midpoint(self.vertices[b]));
            new_vertex_parents.push([a, b]);
        }

        let mut labels = HashMap::new();
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            match midpoint.get(&e.vertices) {
                Some(&m) => {
                    labels.insert(sorted(e.vertices[0], m), e.label);
                    labels.insert(sorted(m, e.vertices[1]), e.label);
                }
                None => {
                    labels.insert(e.vertices, e.label);
                }
            }
        }

        let mut triangles = Vec::with_capacity(self.triangles.len() + 3 * new_vertex_parents.len());
        for t in &self.triangles {
            bisect(t.clone(), &midpoint, &mut triangles);
        }

        let mut mesh = Mesh::from_labeled_edges(vertices, triangles, &labels)?;
        debug_assert_eq!(mesh.vertices.len(), n_old + new_vertex_parents.len());
        mesh.history = Some(RefinementHistory { parent_generation: self.generation, new_vertex_parents });
        debug_assert!(mesh.validate_conformity().is_ok(), "{:?}", mesh.validate_conformity());
        Ok(mesh)
    }

    /// Marks refinement edges until every triangle with a marked edge also
    /// has its refinement edge marked.
    fn close(&self, edge_marked: &mut [bool]) {
        let mut queue: VecDeque<usize> = VecDeque::new();
        for (e, _) in edge_marked.iter().enumerate().filter(|(_, &m)| m) {
            let edge = &self.edges[e];
            queue.push_back(edge.first);
            queue.extend(edge.second);
        }
        while let Some(t) = queue.pop_front() {
            let edges = self.triangle_edges[t];
            let refinement = edges[self.triangles[t].refinement_edge as usize];
            if !edge_marked[refinement] && edges.iter().any(|&e| edge_marked[e]) {
                edge_marked[refinement] = true;
                let edge = &self.edges[refinement];
                queue.push_back(edge.first);
                queue.extend(edge.second);
            }
        }
    }

    /// Uniform refinement: every triangle split into four.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let all: Vec<usize> = (0..self.n_triangles()).collect();
        self.refine(&all, RefineMode::AllEdges)
    }

    /// Parent edge endpoints recorded for vertex `v`, if it was created by
    /// the refinement that produced this mesh.
    pub fn vertex_parents(&self, v: usize) -> Option<[usize; 2]> {
        let history = self.history.as_ref()?;
        let first_new = self.vertices.len() - history.new_vertex_parents.len();
        v.checked_sub(first_new).map(|i| history.new_vertex_parents[i])
    }

    /// Coordinates of the midpoint vertex of the parent edge `[a, b]`.
    pub fn midpoint_of(&self, a: usize, b: usize) -> Point {
        self.vertices[a].midpoint(self.vertices[b])
    }
}

fn sorted(a: usize, b: usize) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

/// Splits `t` along its refinement edge while that edge has a midpoint,
/// pushing the leaves onto `out`. Children are `[p, m, r]` and `[m, q, r]`
/// for refinement edge `(p, q)` opposite `r`; their refinement edges are the
/// edges opposite the new vertex `m`.
fn bisect(t: Triangle, midpoint: &HashMap<[usize; 2], usize>, out: &mut Vec<Triangle>) {
    let k = t.refinement_edge as usize;
    let [p, q] = t.local_edge(k);
    let Some(&m) = midpoint.get(&sorted(p, q)) else {
        out.push(t);
        return;
    };
    let r = t.vertices[k];
    bisect(Triangle { vertices: [p, m, r], refinement_edge: 1, sigma: t.sigma }, midpoint, out);
    bisect(Triangle { vertices: [m, q, r], refinement_edge: 0, sigma: t.sigma }, midpoint, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lshape_initial, BoundaryLabel, BoundaryPartition};

    fn lshape(h: f64) -> Mesh {
        build_lshape_initial(h, &BoundaryPartition::uniform(BoundaryLabel::GammaA), 1.0).unwrap()
    }

    fn single_triangle() -> Mesh {
        let vertices = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let triangles = vec![Triangle { vertices: [0, 1, 2], refinement_edge: 0, sigma: 1.0 }];
        Mesh::from_triangles(vertices, triangles, |_, _| BoundaryLabel::GammaA).unwrap()
    }

    #[test]
    fn all_edges_gives_four_quarters() {
        let m = single_triangle();
        let r = m.refine(&[0], RefineMode::AllEdges).unwrap();
        assert_eq!(r.n_triangles(), 4);
        for t in 0..4 {
            assert!((r.area(t) - 0.125).abs() < 1e-15);
        }
        r.validate_conformity().unwrap();
    }

    #[test]
    fn single_edge_bisects_once() {
        let m = single_triangle();
        let r = m.refine(&[0], RefineMode::SingleEdge).unwrap();
        assert_eq!(r.n_triangles(), 2);
        assert_eq!(r.vertices[3], Point::new(0.5, 0.5));
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = lshape(0.5);
        let r = m.refine(&[], RefineMode::AllEdges).unwrap();
        assert_eq!(r.vertices, m.vertices);
        assert_eq!(r.triangles, m.triangles);
        assert_eq!(r.edges, m.edges);
        assert_eq!(r.history.unwrap().new_vertex_parents.len(), 0);
    }

    #[test]
    fn closure_keeps_conformity() {
        let m = lshape(1.0);
        let r = m.refine(&[0], RefineMode::SingleEdge).unwrap();
        // the hypotenuse is shared with triangle 1, which must be bisected too
        assert_eq!(r.n_triangles(), 8);
        r.validate_conformity().unwrap();
        let r2 = r.refine(&[0], RefineMode::AllEdges).unwrap();
        r2.validate_conformity().unwrap();
        assert!((r2.total_area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_labels_inherited() {
        let p = BoundaryPartition {
            segments: vec![crate::mesh::LabeledSegment::new(
                Point::new(-1.0, -1.0),
                Point::new(-1.0, 1.0),
                BoundaryLabel::GammaC,
            )],
            default: BoundaryLabel::GammaA,
        };
        let m = build_lshape_initial(1.0, &p, 1.0).unwrap();
        let r = m.refine_uniform().unwrap().refine_uniform().unwrap();
        let cathode_len: f64 = r.boundary_edges(BoundaryLabel::GammaC).map(|e| r.edge_length(e)).sum();
        assert!((cathode_len - 2.0).abs() < 1e-12);
        for e in r.boundary_edges(BoundaryLabel::GammaC) {
            let [a, b] = r.edge_points(e);
            assert_eq!((a.x, b.x), (-1.0, -1.0));
        }
    }

    #[test]
    fn new_vertices_are_parent_midpoints() {
        let m = lshape(0.5);
        let r = m.refine(&[3, 7, 11], RefineMode::AllEdges).unwrap();
        for v in m.n_vertices()..r.n_vertices() {
            let [a, b] = r.vertex_parents(v).unwrap();
            assert!(a < m.n_vertices() && b < m.n_vertices());
            assert_eq!(r.vertices[v], m.vertices[a].midpoint(m.vertices[b]));
        }
        assert!(r.vertex_parents(0).is_none());
    }

    #[test]
    fn unknown_triangle_rejected() {
        let m = lshape(1.0);
        assert!(matches!(m.refine(&[6], RefineMode::AllEdges), Err(Error::UnknownTriangle(6))));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("all-edges".parse::<RefineMode>().unwrap(), RefineMode::AllEdges);
        assert_eq!("single-edge".parse::<RefineMode>().unwrap(), RefineMode::SingleEdge);
        assert!("red-green".parse::<RefineMode>().is_err());
    }
}
