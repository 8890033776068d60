//! Point location.
//!
//! A point belongs to a triangle when its distance outside every edge is at
//! most [`TOLERANCE`]. Points on shared edges or vertices go to the lowest
//! triangle id.

use super::{cross, Mesh, Point};
use crate::{Error, Result};

pub const TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub triangle: usize,
    /// Barycentric coordinates, clamped to be non-negative and summing to 1.
    pub barycentric: [f64; 3],
}

/// Barycentric coordinates of `p` in triangle `t`, plus the largest signed
/// distance of `p` outside any edge (negative when strictly inside).
fn barycentric(mesh: &Mesh, t: usize, p: Point) -> ([f64; 3], f64) {
    let v = mesh.triangle_points(t);
    let two_a = cross(v[0], v[1], v[2]);
    let mut lambda = [0.0; 3];
    let mut outside = f64::MIN;
    for i in 0..3 {
        let (b, c) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        lambda[i] = cross(p, b, c) / two_a;
        // lambda_i * height_i is the signed distance to edge i
        let dist = lambda[i] * two_a / b.dist(c);
        outside = outside.max(-dist);
    }
    (lambda, outside)
}

fn normalized(mut lambda: [f64; 3]) -> [f64; 3] {
    lambda.iter_mut().for_each(|l| *l = l.max(0.0));
    let s: f64 = lambda.iter().sum();
    lambda.map(|l| l / s)
}

impl Mesh {
    /// Locates `p` by scanning every triangle. See [`PointLocator`] for
    /// repeated queries.
    pub fn locate_point(&self, p: Point) -> Result<Location> {
        (0..self.n_triangles())
            .find_map(|t| {
                let (lambda, outside) = barycentric(self, t, p);
                (outside <= TOLERANCE).then(|| Location { triangle: t, barycentric: normalized(lambda) })
            })
            .ok_or(Error::PointOutsideDomain { x: p.x, y: p.y })
    }

    /// Value of the P1 function `coeffs` at a located point.
    pub fn evaluate(&self, coeffs: &[f64], loc: &Location) -> f64 {
        let v = self.triangles[loc.triangle].vertices;
        (0..3).map(|i| loc.barycentric[i] * coeffs[v[i]]).sum()
    }
}

/// Bucket grid over triangle bounding boxes. Gives the same answers as
/// [`Mesh::locate_point`].
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &mesh.vertices {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let pad = 1e-9 * (x1 - x0).max(y1 - y0).max(1.0);
        (x0, y0, x1, y1) = (x0 - pad, y0 - pad, x1 + pad, y1 + pad);
        let aspect = (x1 - x0) / (y1 - y0);
        let cells = mesh.n_triangles().max(1) as f64;
        let nx = ((cells * aspect).sqrt().ceil() as usize).max(1);
        let ny = ((cells / aspect).sqrt().ceil() as usize).max(1);
        let (dx, dy) = ((x1 - x0) / nx as f64, (y1 - y0) / ny as f64);

        let mut locator = PointLocator { mesh, x0, y0, dx, dy, nx, ny, start: vec![0; nx * ny + 1], items: Vec::new() };
        let ranges: Vec<_> = (0..mesh.n_triangles()).map(|t| locator.cell_range(t)).collect();
        for &(i0, i1, j0, j1) in &ranges {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    locator.start[j * nx + i + 1] += 1;
                }
            }
        }
        for c in 0..nx * ny {
            locator.start[c + 1] += locator.start[c];
        }
        let mut fill: Vec<u32> = locator.start.clone();
        locator.items = vec![0; *locator.start.last().unwrap() as usize];
        for (t, &(i0, i1, j0, j1)) in ranges.iter().enumerate() {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let c = j * nx + i;
                    locator.items[fill[c] as usize] = t as u32;
                    fill[c] += 1;
                }
            }
        }
        locator
    }

    fn cell_index(&self, x: f64, y: f64) -> (usize, usize) {
        let i = (((x - self.x0) / self.dx).floor().max(0.0) as usize).min(self.nx - 1);
        let j = (((y - self.y0) / self.dy).floor().max(0.0) as usize).min(self.ny - 1);
        (i, j)
    }

    fn cell_range(&self, t: usize) -> (usize, usize, usize, usize) {
        let p = self.mesh.triangle_points(t);
        let pad = 2.0 * TOLERANCE;
        let xmin = p.iter().map(|q| q.x).fold(f64::MAX, f64::min) - pad;
        let xmax = p.iter().map(|q| q.x).fold(f64::MIN, f64::max) + pad;
        let ymin = p.iter().map(|q| q.y).fold(f64::MAX, f64::min) - pad;
        let ymax = p.iter().map(|q| q.y).fold(f64::MIN, f64::max) + pad;
        let (i0, j0) = self.cell_index(xmin, ymin);
        let (i1, j1) = self.cell_index(xmax, ymax);
        (i0, i1, j0, j1)
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn locate(&self, p: Point) -> Result<Location> {
        let outside_grid = p.x < self.x0 || p.y < self.y0 || p.x > self.x0 + self.dx * self.nx as f64 || p.y > self.y0 + self.dy * self.ny as f64;
        if outside_grid || !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::PointOutsideDomain { x: p.x, y: p.y });
        }
        let (i, j) = self.cell_index(p.x, p.y);
        let c = j * self.nx + i;
        self.items[self.start[c] as usize..self.start[c + 1] as usize]
            .iter()
            .find_map(|&t| {
                let (lambda, outside) = barycentric(self.mesh, t as usize, p);
                (outside <= TOLERANCE).then(|| Location { triangle: t as usize, barycentric: normalized(lambda) })
            })
            .ok_or(Error::PointOutsideDomain { x: p.x, y: p.y })
    }

    /// Value of the P1 function `coeffs` at `p`.
    pub fn evaluate(&self, coeffs: &[f64], p: Point) -> Result<f64> {
        let loc = self.locate(p)?;
        Ok(self.mesh.evaluate(coeffs, &loc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lshape_initial, BoundaryLabel, BoundaryPartition};

    fn lshape(h: f64) -> Mesh {
        build_lshape_initial(h, &BoundaryPartition::uniform(BoundaryLabel::GammaA), 1.0).unwrap()
    }

    #[test]
    fn centroid_of_first_triangle() {
        let m = lshape(0.5);
        let [a, b, c] = m.triangle_points(0);
        let p = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        for loc in [m.locate_point(p).unwrap(), PointLocator::new(&m).locate(p).unwrap()] {
            assert_eq!(loc.triangle, 0);
            for l in loc.barycentric {
                assert!((l - 1.0 / 3.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shared_vertex_goes_to_lowest_id() {
        let m = lshape(0.5);
        let v = Point::new(0.0, 0.0);
        let lowest = (0..m.n_triangles())
            .find(|&t| m.triangles[t].vertices.iter().any(|&i| m.vertices[i] == v))
            .unwrap();
        assert_eq!(m.locate_point(v).unwrap().triangle, lowest);
        assert_eq!(PointLocator::new(&m).locate(v).unwrap().triangle, lowest);
    }

    #[test]
    fn outside_points_rejected() {
        let m = lshape(0.5);
        let loc = PointLocator::new(&m);
        for p in [Point::new(0.5, -0.5), Point::new(1.5, 0.0), Point::new(f64::NAN, 0.0)] {
            assert!(matches!(m.locate_point(p), Err(Error::PointOutsideDomain { .. })) || p.x.is_nan());
            assert!(loc.locate(p).is_err());
        }
    }

    #[test]
    fn evaluates_linear_function() {
        let m = lshape(0.25);
        let coeffs: Vec<f64> = m.vertices.iter().map(|p| 1.0 + 2.0 * p.x - p.y).collect();
        let loc = PointLocator::new(&m);
        let p = Point::new(-0.37, 0.61);
        assert!((loc.evaluate(&coeffs, p).unwrap() - (1.0 - 0.74 - 0.61)).abs() < 1e-14);
    }
}
