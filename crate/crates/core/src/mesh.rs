//! Oriented facet meshes: 2D polylines (segments) and 3D triangle soups.
//!
//! Vertices are stored as 3-vectors in both dimensions; 2D meshes keep
//! `z = 0`. Facet vertex order defines orientation. In 3D the front-side
//! normal follows the right-hand rule; in 2D it is the segment direction
//! rotated by -90 degrees, so a counter-clockwise polygon has its front
//! sides facing outward.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Relative tolerance (times the bounding-box diagonal) below which a facet is
/// considered degenerate.
pub const DEGENERATE_REL: f64 = 1e-12;
/// Relative tolerance (times the bounding-box diagonal) for refusing angle
/// evaluation near facet boundaries.
pub const SINGULAR_REL: f64 = 1e-9;
/// Relative tolerance (times the bounding-box diagonal) for treating two facet
/// boundary elements as geometrically coincident.
pub const COINCIDENT_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    Three,
}

/// Normalizing constants that depend only on the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionConstants {
    /// Full angle around a point: 2π in 2D, 4π in 3D.
    pub total_angle: f64,
    /// Magnitude of the facet angle just off a facet interior.
    pub surface_jump: f64,
}

impl Dimension {
    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::Config(format!("dimension must be 2 or 3, got {d}"))),
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// Number of vertices per facet.
    pub fn arity(self) -> usize {
        self.as_usize()
    }

    pub fn constants(self) -> DimensionConstants {
        let total_angle = match self {
            Dimension::Two => 2.0 * PI,
            Dimension::Three => 4.0 * PI,
        };
        DimensionConstants {
            total_angle,
            surface_jump: total_angle / 2.0,
        }
    }
}

/// Indexed mesh of oriented facets.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    dimension: Dimension,
    vertices: Vec<Vec3>,
    // 2D facets leave the third slot at zero; see `facet`.
    facets: Vec<[usize; 3]>,
    diagonal: f64,
}

impl SurfaceMesh {
    /// Builds a mesh and checks every invariant: index range, no repeated
    /// vertex within a facet, and facet measure above the degeneracy floor.
    pub fn new(dimension: Dimension, vertices: Vec<Vec3>, facets: Vec<Vec<usize>>) -> Result<Self> {
        let arity = dimension.arity();
        let mut packed = Vec::with_capacity(facets.len());
        for (fi, f) in facets.iter().enumerate() {
            if f.len() != arity {
                return Err(Error::DegenerateFacet {
                    facet: fi,
                    reason: format!("expected {arity} vertices, got {}", f.len()),
                });
            }
            let mut slot = [0usize; 3];
            for (k, &v) in f.iter().enumerate() {
                if v >= vertices.len() {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        len: vertices.len(),
                    });
                }
                slot[k] = v;
            }
            packed.push(slot);
        }
        if dimension == Dimension::Two && vertices.iter().any(|v| v.z != 0.0) {
            return Err(Error::Config("2D mesh vertices must have z = 0".into()));
        }
        let diagonal = diagonal_of(&vertices);
        let mesh = SurfaceMesh {
            dimension,
            vertices,
            facets: packed,
            diagonal,
        };
        mesh.check_facets()?;
        Ok(mesh)
    }

    /// Convenience constructor for 2D polylines.
    pub fn polyline(vertices: &[[f64; 2]], segments: &[[usize; 2]]) -> Result<Self> {
        Self::new(
            Dimension::Two,
            vertices.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect(),
            segments.iter().map(|s| s.to_vec()).collect(),
        )
    }

    /// Convenience constructor for 3D triangle meshes.
    pub fn triangles(vertices: &[[f64; 3]], triangles: &[[usize; 3]]) -> Result<Self> {
        Self::new(
            Dimension::Three,
            vertices.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            triangles.iter().map(|t| t.to_vec()).collect(),
        )
    }

    fn check_facets(&self) -> Result<()> {
        let floor = DEGENERATE_REL * self.diagonal;
        for fi in 0..self.facets.len() {
            let f = self.facet(fi);
            for a in 0..f.len() {
                for b in a + 1..f.len() {
                    if f[a] == f[b] {
                        return Err(Error::DegenerateFacet {
                            facet: fi,
                            reason: format!("vertex {} repeated", f[a]),
                        });
                    }
                }
            }
            let measure = self.facet_measure(fi);
            if !(measure >= floor) || measure == 0.0 {
                return Err(Error::DegenerateFacet {
                    facet: fi,
                    reason: format!("measure {measure:e} below {floor:e}"),
                });
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn constants(&self) -> DimensionConstants {
        self.dimension.constants()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Vertex indices of facet `i` in orientation order.
    pub fn facet(&self, i: usize) -> &[usize] {
        &self.facets[i][..self.dimension.arity()]
    }

    pub fn facets(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.facets.len()).map(move |i| self.facet(i))
    }

    /// Bounding-box diagonal length; zero for empty or single-vertex meshes.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// Length scale used for relative tolerances; never zero.
    pub fn scale(&self) -> f64 {
        if self.diagonal > 0.0 {
            self.diagonal
        } else {
            1.0
        }
    }

    pub fn eps_singular(&self) -> f64 {
        SINGULAR_REL * self.scale()
    }

    pub fn eps_coincident(&self) -> f64 {
        COINCIDENT_REL * self.scale()
    }

    /// Corner positions of facet `i`.
    pub fn facet_points(&self, i: usize) -> ([Vec3; 3], usize) {
        let f = self.facets[i];
        let arity = self.dimension.arity();
        (
            [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]],
            arity,
        )
    }

    /// Length (2D) or area (3D) of facet `i`.
    pub fn facet_measure(&self, i: usize) -> f64 {
        let ([a, b, c], _) = self.facet_points(i);
        match self.dimension {
            Dimension::Two => (b - a).norm(),
            Dimension::Three => 0.5 * (b - a).cross(&(c - a)).norm(),
        }
    }

    /// Unit front-side normal of facet `i`.
    pub fn facet_normal(&self, i: usize) -> Vec3 {
        let ([a, b, c], _) = self.facet_points(i);
        match self.dimension {
            Dimension::Two => {
                let d = b - a;
                Vec3::new(d.y, -d.x, 0.0).normalize()
            }
            Dimension::Three => (b - a).cross(&(c - a)).normalize(),
        }
    }

    pub fn facet_centroid(&self, i: usize) -> Vec3 {
        let f = self.facet(i);
        f.iter().map(|&v| self.vertices[v]).sum::<Vec3>() / f.len() as f64
    }

    /// Reverses the orientation of one facet. Segments swap endpoints;
    /// triangles `(a, b, c)` become `(a, c, b)`.
    pub fn flip_facet(&self, i: usize) -> Result<SurfaceMesh> {
        if i >= self.facets.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.facets.len(),
            });
        }
        let mut out = self.clone();
        out.flip_in_place(i);
        Ok(out)
    }

    pub(crate) fn flip_in_place(&mut self, i: usize) {
        match self.dimension {
            Dimension::Two => self.facets[i].swap(0, 1),
            Dimension::Three => self.facets[i].swap(1, 2),
        }
    }

    /// Tight axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> Result<(Vec3, Vec3)> {
        bounding_box_of(&self.vertices).ok_or(Error::EmptyMesh)
    }

    /// Distance from `p` to the boundary of facet `i`: endpoints in 2D, the
    /// three edges in 3D. This is where facet angles are undefined.
    pub fn distance_to_facet_boundary(&self, i: usize, p: &Vec3) -> f64 {
        let ([a, b, c], _) = self.facet_points(i);
        match self.dimension {
            Dimension::Two => (a - p).norm().min((b - p).norm()),
            Dimension::Three => point_segment_distance(p, &a, &b)
                .min(point_segment_distance(p, &b, &c))
                .min(point_segment_distance(p, &c, &a)),
        }
    }

    /// Distance from `p` to the closed facet `i`.
    pub fn distance_to_facet(&self, i: usize, p: &Vec3) -> f64 {
        let ([a, b, c], _) = self.facet_points(i);
        match self.dimension {
            Dimension::Two => point_segment_distance(p, &a, &b),
            Dimension::Three => point_triangle_distance(p, &a, &b, &c),
        }
    }

    /// Distance from `p` to the whole mesh surface.
    pub fn distance_to_surface(&self, p: &Vec3) -> f64 {
        (0..self.facets.len())
            .map(|i| self.distance_to_facet(i, p))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn bounding_box_of(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = points.first()?;
    let mut lo = *first;
    let mut hi = *first;
    for p in &points[1..] {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    Some((lo, hi))
}

fn diagonal_of(points: &[Vec3]) -> f64 {
    bounding_box_of(points).map_or(0.0, |(lo, hi)| (hi - lo).norm())
}

pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let n2 = n.norm_squared();
    if n2 > 0.0 {
        let d = (p - a).dot(&n) / n2;
        let q = p - n * d;
        // barycentric sign test against each edge
        let inside = (b - a).cross(&(q - a)).dot(&n) >= 0.0
            && (c - b).cross(&(q - b)).dot(&n) >= 0.0
            && (a - c).cross(&(q - c)).dot(&n) >= 0.0;
        if inside {
            return (p - q).norm();
        }
    }
    point_segment_distance(p, a, b)
        .min(point_segment_distance(p, b, c))
        .min(point_segment_distance(p, c, a))
}
