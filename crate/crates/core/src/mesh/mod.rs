//! Conforming triangle meshes with labeled boundary edges.
//!
//! Triangles are stored counterclockwise. Local edge `k` of a triangle is the
//! edge opposite its local vertex `k`; the refinement edge used by newest
//! vertex bisection is stored as such a local index. Edges are kept in an
//! explicit table, sorted by their (ascending) vertex pair, so adjacency and
//! boundary lookups are O(1).

mod io;
mod locate;
mod refine;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

pub use io::{read_mesh, write_mesh, write_vtk};
pub use locate::{Location, PointLocator};
pub use refine::RefineMode;

use crate::{Error, Result};

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

/// Returns a process-unique mesh id.
pub(crate) fn next_generation() -> u64 {
    NEXT_GENERATION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn dist(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Twice the signed area of `(a, b, c)`.
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryLabel {
    Interior,
    /// Insulated boundary, zero flux.
    Gamma0,
    /// Anode, prescribed flux `g`.
    GammaA,
    /// Cathode, nonlinear law `f(u)`.
    GammaC,
}

impl BoundaryLabel {
    pub fn is_boundary(self) -> bool {
        self != BoundaryLabel::Interior
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::Interior => "Interior",
            BoundaryLabel::Gamma0 => "Gamma0",
            BoundaryLabel::GammaA => "GammaA",
            BoundaryLabel::GammaC => "GammaC",
        }
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Interior" => Ok(BoundaryLabel::Interior),
            "Gamma0" => Ok(BoundaryLabel::Gamma0),
            "GammaA" => Ok(BoundaryLabel::GammaA),
            "GammaC" => Ok(BoundaryLabel::GammaC),
            other => Err(Error::Parse(format!("unknown boundary label `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    /// Local index of the refinement edge (the edge opposite the newest vertex).
    pub refinement_edge: u8,
    pub sigma: f64,
}

impl Triangle {
    /// Vertex ids of local edge `k`, i.e. the edge opposite local vertex `k`.
    pub fn local_edge(&self, k: usize) -> [usize; 2] {
        [self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Ascending vertex ids.
    pub vertices: [usize; 2],
    /// The triangle whose outward normal defines the fixed edge normal.
    pub first: usize,
    pub second: Option<usize>,
    pub label: BoundaryLabel,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }
}

/// Provenance of a mesh produced by [`Mesh::refine`].
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementHistory {
    pub parent_generation: u64,
    /// Parent edge endpoints of each new vertex, in creation order. New
    /// vertices are appended after all vertices of the parent mesh.
    pub new_vertex_parents: Vec<[usize; 2]>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// Edge ids of the three local edges of every triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    pub generation: u64,
    pub history: Option<RefinementHistory>,
}

/// A straight boundary piece carrying a label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSegment {
    pub a: Point,
    pub b: Point,
    pub label: BoundaryLabel,
}

impl LabeledSegment {
    pub fn new(a: Point, b: Point, label: BoundaryLabel) -> Self {
        Self { a, b, label }
    }

    fn contains(&self, p: Point) -> bool {
        let len2 = (self.b.x - self.a.x).powi(2) + (self.b.y - self.a.y).powi(2);
        let scale = len2.sqrt().max(1.0);
        if cross(self.a, self.b, p).abs() > 1e-12 * scale * scale {
            return false;
        }
        let t = ((p.x - self.a.x) * (self.b.x - self.a.x) + (p.y - self.a.y) * (self.b.y - self.a.y)) / len2;
        (-1e-12..=1.0 + 1e-12).contains(&t)
    }
}

/// Rule assigning a label to every boundary edge: the first segment that
/// contains both endpoints wins, anything else gets `default`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPartition {
    pub segments: Vec<LabeledSegment>,
    pub default: BoundaryLabel,
}

impl BoundaryPartition {
    pub fn uniform(label: BoundaryLabel) -> Self {
        Self { segments: Vec::new(), default: label }
    }

    pub fn label_for(&self, p: Point, q: Point) -> BoundaryLabel {
        self.segments
            .iter()
            .find(|s| s.contains(p) && s.contains(q))
            .map_or(self.default, |s| s.label)
    }

    /// Rejects interior labels and overlapping segments, so each boundary
    /// point is covered exactly once.
    pub fn validate(&self) -> Result<()> {
        if !self.default.is_boundary() || self.segments.iter().any(|s| !s.label.is_boundary()) {
            return Err(Error::InvalidParameter("boundary partition uses the Interior label".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.a.dist(s.b) == 0.0 {
                return Err(Error::InvalidParameter(format!("boundary segment {i} has zero length")));
            }
            for t in &self.segments[i + 1..] {
                let overlap = s.contains(t.a) && s.contains(t.b)
                    || t.contains(s.a) && t.contains(s.b)
                    || s.contains(t.a.midpoint(t.b))
                    || (s.contains(t.a) && t.contains(s.a) && s.a.dist(t.a) > 1e-12)
                    || (s.contains(t.a) && t.contains(s.b) && s.b.dist(t.a) > 1e-12)
                    || (s.contains(t.b) && t.contains(s.a) && s.a.dist(t.b) > 1e-12)
                    || (s.contains(t.b) && t.contains(s.b) && s.b.dist(t.b) > 1e-12);
                if overlap {
                    return Err(Error::InvalidParameter(format!("boundary segment {i} overlaps another segment")));
                }
            }
        }
        Ok(())
    }
}

/// Uniform right-triangle mesh of the L-shape `[-1,1]^2 \ ([0,1] x [-1,0])`.
///
/// Each `h x h` square is cut along its `/` diagonal, which is the refinement
/// edge of both halves.
pub fn build_lshape_initial(h: f64, partition: &BoundaryPartition, sigma: f64) -> Result<Mesh> {
    let inv = 1.0 / h;
    let n = inv.round();
    if !(h > 0.0) || !h.is_finite() || n < 1.0 || (n * h - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeshSize(h));
    }
    build_lshape_divisions(n as usize, partition, sigma)
}

/// Same as [`build_lshape_initial`] with `h = 1/n`.
pub fn build_lshape_divisions(n: usize, partition: &BoundaryPartition, sigma: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMeshSize(f64::INFINITY));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    partition.validate()?;
    let side = 2 * n;
    let coord = |i: usize| i as f64 / n as f64 - 1.0;
    // Squares with lower-left corner (i, j) on the 2n x 2n grid, minus the
    // lower-right quadrant.
    let in_domain = |i: usize, j: usize| !(i >= n && j < n);

    let mut index = vec![usize::MAX; (side + 1) * (side + 1)];
    let mut vertices = Vec::new();
    for j in 0..=side {
        for i in 0..=side {
            let touches = [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                .iter()
                .any(|&(a, b)| a < side && b < side && in_domain(a, b));
            if touches {
                index[j * (side + 1) + i] = vertices.len();
                vertices.push(Point::new(coord(i), coord(j)));
            }
        }
    }
    let vid = |i: usize, j: usize| index[j * (side + 1) + i];

    let mut triangles = Vec::with_capacity(4 * n * n * 3 / 2);
    for j in 0..side {
        for i in 0..side {
            if !in_domain(i, j) {
                continue;
            }
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push(Triangle { vertices: [a, b, c], refinement_edge: 1, sigma });
            triangles.push(Triangle { vertices: [a, c, d], refinement_edge: 2, sigma });
        }
    }
    Mesh::from_triangles(vertices, triangles, |p, q| partition.label_for(p, q))
}

impl Mesh {
    /// Builds the edge table for `triangles`. One-sided edges are labeled
    /// by `label_of`; no conformity checks are made here.
    pub fn from_triangles(
        vertices: Vec<Point>,
        triangles: Vec<Triangle>,
        label_of: impl Fn(Point, Point) -> BoundaryLabel,
    ) -> Result<Mesh> {
        let mut mesh = Self::assemble_topology(vertices, triangles)?;
        for e in mesh.edges.iter_mut().filter(|e| e.second.is_none()) {
            e.label = label_of(mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        }
        Ok(mesh)
    }

    /// Like [`Mesh::from_triangles`] with labels given per vertex pair.
    /// One-sided edges missing from `labels` are left `Interior`, which
    /// [`Mesh::validate_conformity`] reports.
    pub fn from_labeled_edges(
        vertices: Vec<Point>,
        triangles: Vec<Triangle>,
        labels: &HashMap<[usize; 2], BoundaryLabel>,
    ) -> Result<Mesh> {
        let mut mesh = Self::assemble_topology(vertices, triangles)?;
        for e in mesh.edges.iter_mut().filter(|e| e.second.is_none()) {
            if let Some(&l) = labels.get(&e.vertices) {
                e.label = l;
            }
        }
        Ok(mesh)
    }

    fn assemble_topology(vertices: Vec<Point>, triangles: Vec<Triangle>) -> Result<Mesh> {
        for (id, t) in triangles.iter().enumerate() {
            if t.vertices.iter().any(|&v| v >= vertices.len()) || t.refinement_edge > 2 {
                return Err(Error::NonConforming(format!("triangle {id} has invalid vertex or edge index")));
            }
        }
        let (edges, triangle_edges) = build_edge_table(&triangles)?;
        Ok(Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            generation: next_generation(),
            history: None,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let v = self.triangles[t].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * cross(a, b, c)
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    /// `h_T = |T|^(1/2)`.
    pub fn mesh_size(&self, t: usize) -> f64 {
        self.area(t).sqrt()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        a.dist(b)
    }

    /// Unit normal of edge `e` pointing out of its `first` triangle. On the
    /// boundary this is the outward normal of the domain.
    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        let edge = &self.edges[e];
        let [a, b] = self.edge_points(e);
        let len = a.dist(b);
        let mut n = [(b.y - a.y) / len, -(b.x - a.x) / len];
        // Orient away from the vertex of `first` that is not on the edge.
        let opposite = self.triangles[edge.first]
            .vertices
            .iter()
            .copied()
            .find(|v| !edge.vertices.contains(v))
            .expect("triangle has a vertex off each of its edges");
        let c = self.vertices[opposite];
        if n[0] * (c.x - a.x) + n[1] * (c.y - a.y) > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// Gradients of the three nodal basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let p = self.triangle_points(t);
        let two_a = cross(p[0], p[1], p[2]);
        std::array::from_fn(|i| {
            let (b, c) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            [(b.y - c.y) / two_a, (c.x - b.x) / two_a]
        })
    }

    /// Gradient of the P1 function with nodal values `coeffs` on triangle `t`.
    pub fn gradient(&self, t: usize, coeffs: &[f64]) -> [f64; 2] {
        let g = self.basis_gradients(t);
        let v = self.triangles[t].vertices;
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += coeffs[v[i]] * g[i][0];
            out[1] += coeffs[v[i]] * g[i][1];
        }
        out
    }

    /// `max_T h_T / rho_T` with `h_T = sqrt|T|` and `rho_T` the inscribed
    /// circle diameter.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                let area = self.area(t);
                let perimeter = a.dist(b) + b.dist(c) + c.dist(a);
                let rho = 4.0 * area / perimeter;
                area.sqrt() / rho
            })
            .fold(0.0, f64::max)
    }

    pub fn boundary_edges(&self, label: BoundaryLabel) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.second.is_none() && e.label == label)
            .map(|(i, _)| i)
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        for t in &mut self.triangles {
            t.sigma = sigma;
        }
    }

    /// Checks positive orientation, edge-table consistency, boundary labels
    /// and the absence of hanging nodes. Returns the first violation.
    pub fn validate_conformity(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::NonConforming(format!("vertex {i} has non-finite coordinates")));
            }
        }
        for t in 0..self.n_triangles() {
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { id: t, area });
            }
        }
        let (edges, triangle_edges) = build_edge_table(&self.triangles)?;
        let grid = VertexGrid::new(&self.vertices);
        if triangle_edges != self.triangle_edges || edges.len() != self.edges.len() {
            return Err(Error::NonConforming("edge table out of date with triangles".into()));
        }
        for (id, (stored, fresh)) in self.edges.iter().zip(&edges).enumerate() {
            if stored.vertices != fresh.vertices || stored.first != fresh.first || stored.second != fresh.second {
                return Err(Error::NonConforming(format!("edge {id} adjacency inconsistent")));
            }
            match (stored.second.is_none(), stored.label.is_boundary()) {
                (true, false) => {
                    let [a, b] = self.edge_points(id);
                    // A one-sided edge without a boundary label is either a
                    // hanging-node edge or a labeling bug.
                    if let Some(v) = self.vertex_inside_edge(&grid, id) {
                        return Err(Error::NonConforming(format!(
                            "hanging node: vertex {v} lies on edge {id} ({}, {})-({}, {})",
                            a.x, a.y, b.x, b.y
                        )));
                    }
                    return Err(Error::NonConforming(format!("one-sided edge {id} has no boundary label")));
                }
                (false, true) => {
                    return Err(Error::NonConforming(format!("interior edge {id} carries label {}", stored.label)));
                }
                _ => {}
            }
        }
        for e in (0..self.edges.len()).filter(|&e| self.edges[e].is_boundary()) {
            if let Some(v) = self.vertex_inside_edge(&grid, e) {
                return Err(Error::NonConforming(format!("hanging node: vertex {v} lies on edge {e}")));
            }
        }
        Ok(())
    }

    /// A vertex strictly inside edge `e`, if any.
    fn vertex_inside_edge(&self, grid: &VertexGrid, e: usize) -> Option<usize> {
        let [a, b] = self.edge_points(e);
        let [ia, ib] = self.edges[e].vertices;
        let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
        let (xmin, xmax) = (a.x.min(b.x), a.x.max(b.x));
        let (ymin, ymax) = (a.y.min(b.y), a.y.max(b.y));
        grid.candidates(xmin, xmax, ymin, ymax).find(|&v| {
            let p = self.vertices[v];
            if v == ia || v == ib || p.x < xmin || p.x > xmax || p.y < ymin || p.y > ymax {
                return false;
            }
            let t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2;
            cross(a, b, p).abs() <= 1e-10 * len2 && t > 1e-12 && t < 1.0 - 1e-12
        })
    }
}

/// Vertex buckets on a uniform grid, used for hanging-node queries.
struct VertexGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl VertexGrid {
    fn new(points: &[Point]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
        }
        let extent = (x1 - x0).max(y1 - y0).max(1e-300);
        let per_side = ((points.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = extent / per_side as f64 * (1.0 + 1e-12);
        let nx = (((x1 - x0) / cell) as usize + 1).max(1);
        let ny = (((y1 - y0) / cell) as usize + 1).max(1);
        let mut grid = VertexGrid { x0, y0, cell, nx, ny, start: vec![0; nx * ny + 1], items: vec![0; points.len()] };
        let cells: Vec<usize> = points.iter().map(|p| grid.cell_of(p.x, p.y)).collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        for (v, &c) in cells.iter().enumerate() {
            grid.items[fill[c]] = v;
            fill[c] += 1;
        }
        grid
    }

    fn index(&self, x: f64, y: f64) -> (usize, usize) {
        let i = (((x - self.x0) / self.cell).max(0.0) as usize).min(self.nx - 1);
        let j = (((y - self.y0) / self.cell).max(0.0) as usize).min(self.ny - 1);
        (i, j)
    }

    fn cell_of(&self, x: f64, y: f64) -> usize {
        let (i, j) = self.index(x, y);
        j * self.nx + i
    }

    fn candidates(&self, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> impl Iterator<Item = usize> + '_ {
        let (i0, j0) = self.index(xmin, ymin);
        let (i1, j1) = self.index(xmax, ymax);
        (j0..=j1).flat_map(move |j| {
            (i0..=i1).flat_map(move |i| {
                let c = j * self.nx + i;
                self.items[self.start[c]..self.start[c + 1]].iter().copied()
            })
        })
    }
}

fn build_edge_table(triangles: &[Triangle]) -> Result<(Vec<Edge>, Vec<[usize; 3]>)> {
    let mut keys: Vec<(usize, usize, usize, u8)> = Vec::with_capacity(3 * triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let [a, b] = tri.local_edge(k);
            keys.push((a.min(b), a.max(b), t, k as u8));
        }
    }
    keys.sort_unstable();
    let mut edges = Vec::with_capacity(keys.len() / 2 + 1);
    let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
    let mut i = 0;
    while i < keys.len() {
        let (a, b, t, k) = keys[i];
        let mut j = i + 1;
        while j < keys.len() && keys[j].0 == a && keys[j].1 == b {
            j += 1;
        }
        if j - i > 2 {
            return Err(Error::NonConforming(format!("edge ({a}, {b}) shared by {} triangles", j - i)));
        }
        if a == b {
            return Err(Error::NonConforming(format!("triangle {t} repeats vertex {a}")));
        }
        let id = edges.len();
        triangle_edges[t][k as usize] = id;
        let second = (j - i == 2).then(|| {
            let (_, _, t2, k2) = keys[i + 1];
            triangle_edges[t2][k2 as usize] = id;
            t2
        });
        edges.push(Edge { vertices: [a, b], first: t, second, label: BoundaryLabel::Interior });
        i = j;
    }
    Ok((edges, triangle_edges))
}
