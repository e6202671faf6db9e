//! Signed facet angles, their gradients, and the sign-parameterized
//! generalized winding number.
//!
//! Angles are positive on the back side of a facet. A counter-clockwise
//! polygon (or an outward-oriented closed triangle mesh) therefore has
//! winding number 1 inside and 0 outside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Dimension, SurfaceMesh, Vec3};
use crate::patching::PatchDecomposition;

/// One sign in {-1, +1} per patch. `-1` means the patch is flipped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignAssignment(Vec<i8>);

impl SignAssignment {
    pub fn new(signs: Vec<i64>) -> Result<Self> {
        signs
            .into_iter()
            .map(|s| match s {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                other => Err(Error::InvalidSign(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(SignAssignment)
    }

    pub fn all_positive(n: usize) -> Self {
        SignAssignment(vec![1; n])
    }

    /// Parses a comma-separated list such as `"1,-1,1"` (a `+` prefix is allowed).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.trim_start_matches('+')
                    .parse::<i64>()
                    .map_err(|_| Error::Config(format!("bad sign '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub(crate) fn from_bits(bits: &[i8]) -> Self {
        debug_assert!(bits.iter().all(|&b| b == 1 || b == -1));
        SignAssignment(bits.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        SignAssignment(self.0.iter().map(|s| -s).collect())
    }

    /// Global flip so that the first sign is +1.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(&-1) => self.negated(),
            _ => self.clone(),
        }
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.0.iter().map(|&s| i64::from(s)).collect()
    }
}

fn perp(v: &Vec3) -> Vec3 {
    Vec3::new(v.y, -v.x, 0.0)
}

/// Signed angle of a segment `a -> b` seen from `p`.
pub(crate) fn segment_angle(a: &Vec3, b: &Vec3, p: &Vec3) -> f64 {
    let ra = a - p;
    let rb = b - p;
    (ra.x * rb.y - ra.y * rb.x).atan2(ra.x * rb.x + ra.y * rb.y)
}

pub(crate) fn segment_angle_gradient(a: &Vec3, b: &Vec3, p: &Vec3) -> Vec3 {
    let ra = a - p;
    let rb = b - p;
    perp(&rb) / rb.norm_squared() - perp(&ra) / ra.norm_squared()
}

/// Signed solid angle of triangle `(a, b, c)` seen from `p`
/// (Van Oosterom-Strackee form).
pub(crate) fn triangle_solid_angle(a: &Vec3, b: &Vec3, c: &Vec3, p: &Vec3) -> f64 {
    let ra = a - p;
    let rb = b - p;
    let rc = c - p;
    let (la, lb, lc) = (ra.norm(), rb.norm(), rc.norm());
    let det = ra.dot(&rb.cross(&rc));
    let denom = la * lb * lc + ra.dot(&rb) * lc + ra.dot(&rc) * lb + rb.dot(&rc) * la;
    2.0 * det.atan2(denom)
}

/// Contribution of the directed edge `r1 -> r2` (relative to the evaluation
/// point) to the solid-angle gradient.
fn edge_term(r1: &Vec3, r2: &Vec3) -> Vec3 {
    let (l1, l2) = (r1.norm(), r2.norm());
    r1.cross(r2) * ((l1 + l2) / (l1 * l2 * (l1 * l2 + r1.dot(r2))))
}

pub(crate) fn triangle_solid_angle_gradient(a: &Vec3, b: &Vec3, c: &Vec3, p: &Vec3) -> Vec3 {
    let ra = a - p;
    let rb = b - p;
    let rc = c - p;
    edge_term(&ra, &rb) + edge_term(&rb, &rc) + edge_term(&rc, &ra)
}

/// Angle of facet `f` without the singularity check.
pub(crate) fn angle_unchecked(mesh: &SurfaceMesh, f: usize, p: &Vec3) -> f64 {
    let ([a, b, c], _) = mesh.facet_points(f);
    match mesh.dimension() {
        Dimension::Two => segment_angle(&a, &b, p),
        Dimension::Three => triangle_solid_angle(&a, &b, &c, p),
    }
}

pub(crate) fn gradient_unchecked(mesh: &SurfaceMesh, f: usize, p: &Vec3) -> Vec3 {
    let ([a, b, c], _) = mesh.facet_points(f);
    match mesh.dimension() {
        Dimension::Two => segment_angle_gradient(&a, &b, p),
        Dimension::Three => triangle_solid_angle_gradient(&a, &b, &c, p),
    }
}

fn check_facet(mesh: &SurfaceMesh, f: usize) -> Result<()> {
    if f >= mesh.num_facets() {
        return Err(Error::IndexOutOfRange {
            index: f,
            len: mesh.num_facets(),
        });
    }
    Ok(())
}

fn check_singular(mesh: &SurfaceMesh, f: usize, p: &Vec3) -> Result<()> {
    let distance = mesh.distance_to_facet_boundary(f, p);
    if distance < mesh.eps_singular() {
        return Err(Error::SingularEvaluation { facet: f, distance });
    }
    Ok(())
}

/// Embeds a d-tuple of coordinates (d = 2 or 3) as a 3-vector.
pub fn point(coords: &[f64]) -> Vec3 {
    match coords {
        [x, y] => Vec3::new(*x, *y, 0.0),
        [x, y, z] => Vec3::new(*x, *y, *z),
        _ => panic!("points must have 2 or 3 coordinates"),
    }
}

/// Signed angle (radians in 2D, steradians in 3D) subtended by facet `f`
/// at `p`; positive on the facet's back side.
pub fn facet_angle(mesh: &SurfaceMesh, f: usize, p: &Vec3) -> Result<f64> {
    check_facet(mesh, f)?;
    check_singular(mesh, f, p)?;
    Ok(angle_unchecked(mesh, f, p))
}

/// Analytic gradient of [`facet_angle`] with respect to `p`.
pub fn facet_angle_gradient(mesh: &SurfaceMesh, f: usize, p: &Vec3) -> Result<Vec3> {
    check_facet(mesh, f)?;
    check_singular(mesh, f, p)?;
    Ok(gradient_unchecked(mesh, f, p))
}

/// Winding number of the mesh with patch `i` multiplied by `signs[i]`,
/// each facet taken in its patch's reference orientation.
pub fn winding_number(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    signs: &SignAssignment,
    p: &Vec3,
) -> Result<f64> {
    decomp.check_signs(signs)?;
    let mut sum = 0.0;
    for f in 0..mesh.num_facets() {
        check_singular(mesh, f, p)?;
        sum += decomp.facet_sign(f, signs) * angle_unchecked(mesh, f, p);
    }
    Ok(sum / mesh.constants().total_angle)
}

pub fn winding_gradient(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    signs: &SignAssignment,
    p: &Vec3,
) -> Result<Vec3> {
    decomp.check_signs(signs)?;
    let mut sum = Vec3::zeros();
    for f in 0..mesh.num_facets() {
        check_singular(mesh, f, p)?;
        sum += gradient_unchecked(mesh, f, p) * decomp.facet_sign(f, signs);
    }
    Ok(sum / mesh.constants().total_angle)
}

/// Unnormalized angle gradient of one patch at sign +1 (reference orientation).
pub(crate) fn patch_angle_gradient(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    patch: usize,
    p: &Vec3,
) -> Vec3 {
    let pt = &decomp.patches[patch];
    pt.facets
        .iter()
        .zip(&pt.internal_flips)
        .map(|(&f, &flip)| {
            let g = gradient_unchecked(mesh, f, p);
            if flip {
                -g
            } else {
                g
            }
        })
        .sum()
}
