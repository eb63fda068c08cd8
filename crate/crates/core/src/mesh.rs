//! Structured triangulations of axis-aligned rectangles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::scalar::{Real, Vec2};

/// Absolute tolerance for coordinate comparisons in boundary predicates.
pub const COORD_TOL: f64 = 1e-10;

/// Side of the rectangle a boundary facet lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    /// Outward unit normal of this side.
    pub fn normal<T: Real>(self) -> Vec2<T> {
        let (o, z) = (T::one(), T::zero());
        match self {
            Side::Bottom => [z, -o],
            Side::Right => [o, z],
            Side::Top => [z, o],
            Side::Left => [-o, z],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 2],
    pub side: Side,
    pub tag: u32,
}

/// Axis-aligned closed box; a missing axis range means unbounded on that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<[f64; 2]>,
}

impl BoxRegion {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Self {
            x: Some(x),
            y: Some(y),
        }
    }

    pub fn contains<T: Real>(&self, p: Vec2<T>) -> bool {
        let inside = |range: Option<[f64; 2]>, v: f64| match range {
            Some([lo, hi]) => v >= lo - COORD_TOL && v <= hi + COORD_TOL,
            None => true,
        };
        inside(self.x, p[0].to_f64_lossy()) && inside(self.y, p[1].to_f64_lossy())
    }
}

/// Union of boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Region(pub Vec<BoxRegion>);

impl Region {
    pub fn single(b: BoxRegion) -> Self {
        Region(vec![b])
    }

    pub fn contains<T: Real>(&self, p: Vec2<T>) -> bool {
        self.0.iter().any(|b| b.contains(p))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub type Predicate<T> = Arc<dyn Fn(Vec2<T>) -> bool + Send + Sync>;

/// A boundary marker: facets whose midpoint satisfies `predicate` get `id`.
#[derive(Clone)]
pub struct BoundaryTag<T> {
    pub id: u32,
    pub predicate: Predicate<T>,
}

impl<T: Real> BoundaryTag<T> {
    pub fn new(id: u32, predicate: impl Fn(Vec2<T>) -> bool + Send + Sync + 'static) -> Self {
        Self {
            id,
            predicate: Arc::new(predicate),
        }
    }

    pub fn from_region(id: u32, region: Region) -> Self {
        Self::new(id, move |p| region.contains(p))
    }
}

impl<T> fmt::Debug for BoundaryTag<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryTag").field("id", &self.id).finish()
    }
}

/// Uniform triangulation of `(x0,x1)×(y0,y1)`; every grid cell is split along
/// its lower-left to upper-right diagonal.
#[derive(Debug, Clone)]
pub struct RectMesh<T> {
    bounds: [T; 4],
    nx: usize,
    ny: usize,
    vertices: Vec<Vec2<T>>,
    triangles: Vec<[usize; 3]>,
    boundary_facets: Vec<BoundaryFacet>,
}

impl<T: Real> RectMesh<T> {
    pub fn build(bounds: [T; 4], nx: usize, ny: usize) -> Result<Self> {
        let [x0, y0, x1, y1] = bounds;
        if nx == 0 || ny == 0 {
            return Err(config(format!("cell counts must be positive, got nx={nx}, ny={ny}")));
        }
        if !(x1 > x0 && y1 > y0) || !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
            return Err(config(format!("degenerate bounds ({x0}, {y0}) – ({x1}, {y1})")));
        }
        let row = nx + 1;
        let mut vertices = Vec::with_capacity(row * (ny + 1));
        for j in 0..=ny {
            let y = y0 + (y1 - y0) * T::count(j) / T::count(ny);
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * T::count(i) / T::count(nx);
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let v00 = i + j * row;
                let v10 = v00 + 1;
                let v01 = v00 + row;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let mut boundary_facets = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            boundary_facets.push(BoundaryFacet { vertices: [i, i + 1], side: Side::Bottom, tag: 0 });
        }
        for j in 0..ny {
            boundary_facets.push(BoundaryFacet {
                vertices: [nx + j * row, nx + (j + 1) * row],
                side: Side::Right,
                tag: 0,
            });
        }
        for i in (0..nx).rev() {
            boundary_facets.push(BoundaryFacet {
                vertices: [i + 1 + ny * row, i + ny * row],
                side: Side::Top,
                tag: 0,
            });
        }
        for j in (0..ny).rev() {
            boundary_facets.push(BoundaryFacet {
                vertices: [(j + 1) * row, j * row],
                side: Side::Left,
                tag: 0,
            });
        }
        Ok(Self { bounds, nx, ny, vertices, triangles, boundary_facets })
    }

    pub fn bounds(&self) -> [T; 4] {
        self.bounds
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Grid index `(i, j)` of vertex `v`.
    pub fn grid_index(&self, v: usize) -> (usize, usize) {
        (v % (self.nx + 1), v / (self.nx + 1))
    }

    pub fn vertex_at(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    /// Area of the rectangle `|D|`.
    pub fn domain_area(&self) -> T {
        let [x0, y0, x1, y1] = self.bounds;
        (x1 - x0) * (y1 - y0)
    }

    /// `h = 4|D| / (N_T √3)`.
    pub fn mesh_diameter(&self) -> T {
        T::lit(4.0) * self.domain_area() / (T::count(self.triangle_count()) * T::lit(3.0).sqrt())
    }

    /// `√h`: edge length of an equilateral triangle with the mean element
    /// area. Length scale of the level-set transport and reinitialization.
    pub fn element_size(&self) -> T {
        self.mesh_diameter().sqrt()
    }

    /// Twice the signed area of triangle `t`.
    pub fn signed_area2(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
    }

    pub fn facet_midpoint(&self, f: &BoundaryFacet) -> Vec2<T> {
        let (a, b) = (self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
        let half = T::lit(0.5);
        [(a[0] + b[0]) * half, (a[1] + b[1]) * half]
    }

    /// Assigns tag ids to every boundary facet: the first matching predicate
    /// wins, unmatched facets get tag 0.
    pub fn tag_boundary(mut self, tags: &[BoundaryTag<T>]) -> Self {
        for k in 0..self.boundary_facets.len() {
            let mid = self.facet_midpoint(&self.boundary_facets[k]);
            self.boundary_facets[k].tag = tags
                .iter()
                .find(|t| (t.predicate)(mid))
                .map(|t| t.id)
                .unwrap_or(0);
        }
        self
    }

    pub fn facets_with_tag(&self, tag: u32) -> impl Iterator<Item = &BoundaryFacet> {
        self.boundary_facets.iter().filter(move |f| f.tag == tag)
    }

    /// Sorted, deduplicated vertices lying on facets carrying any of `tags`.
    pub fn boundary_vertices(&self, tags: &[u32]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_facets
            .iter()
            .filter(|f| tags.contains(&f.tag))
            .flat_map(|f| f.vertices)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All vertices on the rectangle boundary.
    pub fn all_boundary_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.boundary_facets.iter().flat_map(|f| f.vertices).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Same connectivity and tags with vertices moved by `map`. Used to realize
    /// perturbations of the identity `x ↦ x + tθ(x)`.
    pub fn displaced(&self, map: impl Fn(usize, Vec2<T>) -> Vec2<T>) -> Self {
        let mut out = self.clone();
        for (k, v) in out.vertices.iter_mut().enumerate() {
            *v = map(k, *v);
        }
        out
    }

    /// The same rectangle refined `factor` times per axis; coarse vertex
    /// `(i, j)` coincides with fine vertex `(factor·i, factor·j)`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        RectMesh::build(self.bounds, self.nx * factor, self.ny * factor)
    }

    /// Triangles sharing an edge with each triangle.
    pub fn triangle_neighbors(&self) -> Vec<Vec<usize>> {
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(3 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut nbrs = vec![Vec::with_capacity(3); self.triangles.len()];
        for ts in edges.values() {
            if let [a, b] = ts.as_slice() {
                nbrs[*a].push(*b);
                nbrs[*b].push(*a);
            }
        }
        for n in &mut nbrs {
            n.sort_unstable();
        }
        nbrs
    }
}
