//! Small synthetic meshes used by tests, examples and the Python smoke test.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Dimension, SurfaceMesh, Vec3};

/// Counter-clockwise unit square `[0,1]^2`.
pub fn unit_square() -> SurfaceMesh {
    SurfaceMesh::polyline(
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[[0, 1], [1, 2], [2, 3], [3, 0]],
    )
    .expect("valid fixture")
}

/// Unit cube `[0,1]^3`, 12 triangles with outward normals.
pub fn unit_cube() -> SurfaceMesh {
    let v = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let t = [
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    SurfaceMesh::triangles(&v, &t).expect("valid fixture")
}

/// `k` triangles sharing the edge `(0, 1)` along the x axis.
pub fn triangle_fan(k: usize) -> SurfaceMesh {
    let mut v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
    let mut t = Vec::new();
    for i in 0..k {
        let a = 2.0 * PI * i as f64 / k as f64;
        v.push([0.5, a.cos(), a.sin()]);
        t.push([0, 1, i + 2]);
    }
    SurfaceMesh::triangles(&v, &t).expect("valid fixture")
}

/// Cyclic triangle strip over `m` vertices of a half-twisted band. For odd
/// `m` the strip is a Mobius band and admits no consistent orientation.
pub fn mobius_strip(m: usize) -> SurfaceMesh {
    let (radius, half_width) = (2.0, 0.5);
    let v: Vec<[f64; 3]> = (0..m)
        .map(|k| {
            let u = 2.0 * PI * k as f64 / m as f64;
            let w = if k % 2 == 0 { half_width } else { -half_width };
            let r = radius + w * (u / 2.0).cos();
            [r * u.cos(), r * u.sin(), w * (u / 2.0).sin()]
        })
        .collect();
    let t: Vec<[usize; 3]> = (0..m).map(|k| [k, (k + 1) % m, (k + 2) % m]).collect();
    SurfaceMesh::triangles(&v, &t).expect("valid fixture")
}

/// Concatenates two meshes of equal dimension, shifting `b` by `offset_x`.
pub fn disjoint_union(a: &SurfaceMesh, b: &SurfaceMesh, offset_x: f64) -> SurfaceMesh {
    assert_eq!(a.dimension(), b.dimension());
    let shift = Vec3::new(offset_x, 0.0, 0.0);
    let base = a.num_vertices();
    let vertices = a
        .vertices()
        .iter()
        .copied()
        .chain(b.vertices().iter().map(|p| p + shift))
        .collect();
    let facets = a
        .facets()
        .map(|f| f.to_vec())
        .chain(b.facets().map(|f| f.iter().map(|i| i + base).collect()))
        .collect();
    SurfaceMesh::new(a.dimension(), vertices, facets).expect("valid union")
}

/// Builds a 2D mesh from open or closed polylines given as point lists.
/// Each polyline gets its own vertices; `closed` adds the wrap-around segment.
pub fn polylines(chains: &[(Vec<[f64; 2]>, bool)]) -> SurfaceMesh {
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for (points, closed) in chains {
        let base = vertices.len();
        vertices.extend(points.iter().map(|p| Vec3::new(p[0], p[1], 0.0)));
        let n = points.len();
        let segs = if *closed { n } else { n - 1 };
        for k in 0..segs {
            facets.push(vec![base + k, base + (k + 1) % n]);
        }
    }
    SurfaceMesh::new(Dimension::Two, vertices, facets).expect("valid polylines")
}

/// Point at arclength fraction `t` in `[0, 1]` along a closed outline.
fn outline_point(outline: &[[f64; 2]], t: f64) -> [f64; 2] {
    let n = outline.len();
    let lens: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (outline[k], outline[(k + 1) % n]);
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .collect();
    let total: f64 = lens.iter().sum();
    let mut s = t.rem_euclid(1.0) * total;
    for k in 0..n {
        if s <= lens[k] || k == n - 1 {
            let (a, b) = (outline[k], outline[(k + 1) % n]);
            let u = (s / lens[k]).min(1.0);
            return [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
        }
        s -= lens[k];
    }
    unreachable!()
}

/// Counter-clockwise closed outline cut into `arcs` open arcs of equal
/// arclength, each shortened by `gap_fraction` of its share so that
/// neighbouring arcs are separated by gaps. Corners of the outline are kept.
pub fn gapped_outline(
    outline: &[[f64; 2]],
    arcs: usize,
    segments_per_arc: usize,
    gap_fraction: f64,
) -> SurfaceMesh {
    let share = 1.0 / arcs as f64;
    let chains: Vec<_> = (0..arcs)
        .map(|k| {
            let start = (k as f64 + 0.5 * gap_fraction) * share;
            let end = (k as f64 + 1.0 - 0.5 * gap_fraction) * share;
            (sample_arc(outline, start, end, segments_per_arc), false)
        })
        .collect();
    polylines(&chains)
}

/// Samples a sub-arc `[start, end]` (arclength fractions) of a closed
/// outline, inserting the outline's own corners that fall inside it.
fn sample_arc(outline: &[[f64; 2]], start: f64, end: f64, segments: usize) -> Vec<[f64; 2]> {
    let n = outline.len();
    let lens: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (outline[k], outline[(k + 1) % n]);
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .collect();
    let total: f64 = lens.iter().sum();
    let mut corners = Vec::new();
    let mut acc = 0.0;
    for len in &lens {
        corners.push(acc / total);
        acc += len;
    }
    let mut ts: Vec<f64> = (0..=segments)
        .map(|i| start + (end - start) * i as f64 / segments as f64)
        .collect();
    let min_sep = 0.25 * (end - start) / segments as f64;
    for c in corners {
        for c in [c, c + 1.0] {
            if c > start && c < end && ts.iter().all(|t| (t - c).abs() > min_sep) {
                ts.push(c);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.into_iter().map(|t| outline_point(outline, t)).collect()
}

/// Regular `sides`-gon approximating a circle, counter-clockwise.
pub fn circle_outline(sides: usize, radius: f64, center: [f64; 2]) -> Vec<[f64; 2]> {
    (0..sides)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / sides as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

/// Circle of `radius` split into `arcs` arcs separated by gaps.
pub fn gapped_circle(arcs: usize, segments_per_arc: usize, radius: f64, gap_fraction: f64) -> SurfaceMesh {
    gapped_outline(&circle_outline(256, radius, [0.0, 0.0]), arcs, segments_per_arc, gap_fraction)
}

/// Closed circle split into `arcs` arcs whose endpoints coincide
/// geometrically but not topologically (each arc has its own vertices).
pub fn split_circle(arcs: usize, segments_per_arc: usize, radius: f64) -> SurfaceMesh {
    let total = arcs * segments_per_arc;
    let at = |i: usize| {
        let a = 2.0 * PI * (i % total) as f64 / total as f64;
        [radius * a.cos(), radius * a.sin()]
    };
    let chains: Vec<_> = (0..arcs)
        .map(|k| {
            let pts = (0..=segments_per_arc).map(|i| at(k * segments_per_arc + i)).collect();
            (pts, false)
        })
        .collect();
    polylines(&chains)
}

/// Inserts `per_edge - 1` evenly spaced points on every edge of a point chain.
pub fn subdivide(points: &[[f64; 2]], closed: bool, per_edge: usize) -> Vec<[f64; 2]> {
    let n = points.len();
    let edges = if closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(edges * per_edge + 1);
    for k in 0..edges {
        let (a, b) = (points[k], points[(k + 1) % n]);
        for i in 0..per_edge {
            let t = i as f64 / per_edge as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    if !closed {
        out.push(points[n - 1]);
    }
    out
}

/// Counter-clockwise axis-aligned rectangle outline.
pub fn rectangle_outline(width: f64, height: f64) -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]]
}

/// Counter-clockwise L-shaped (non-convex) outline.
pub fn l_outline() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]
}

/// A 2x4 torso outline open at the neck, with a small arm at the right
/// shoulder and a small attachment on the left side. Each attachment is an
/// open U whose ends reach slightly into the torso, crossing the outline at
/// segment interiors.
///
/// Every part is stored in its ground-truth orientation: counter-clockwise
/// around the region it bounds. Patches are `0` torso, `1` shoulder, `2` side.
pub fn torso_with_attachments() -> SurfaceMesh {
    let torso = subdivide(
        &[[-0.3, 2.0], [-1.0, 2.0], [-1.0, -2.0], [1.0, -2.0], [1.0, 2.0], [0.3, 2.0]],
        false,
        7,
    );
    let shoulder = subdivide(&[[0.9, 1.2], [1.8, 1.2], [1.8, 1.6], [0.9, 1.6]], false, 4);
    let side = subdivide(&[[-0.9, 0.2], [-1.5, 0.2], [-1.5, -0.2], [-0.9, -0.2]], false, 4);
    polylines(&[(torso, false), (shoulder, false), (side, false)])
}

/// Copy of `mesh` with each facet flipped independently with probability
/// `probability`, driven by a seeded generator.
pub fn randomly_flipped(mesh: &SurfaceMesh, seed: u64, probability: f64) -> SurfaceMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = mesh.clone();
    for f in 0..mesh.num_facets() {
        if rng.random_bool(probability) {
            out.flip_in_place(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patching::extract_patches;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(unit_cube().num_facets(), 12);
        assert_eq!(mobius_strip(9).num_facets(), 9);
        let g = gapped_circle(5, 6, 1.0, 0.2);
        assert_eq!(extract_patches(&g).unwrap().num_patches(), 5);
        let s = split_circle(2, 8, 1.0);
        assert_eq!(extract_patches(&s).unwrap().num_patches(), 2);
        let sq = gapped_outline(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]], 4, 3, 0.3);
        assert_eq!(extract_patches(&sq).unwrap().num_patches(), 4);
        assert_eq!(extract_patches(&torso_with_attachments()).unwrap().num_patches(), 3);
        let flipped = randomly_flipped(&g, 3, 0.5);
        assert_eq!(flipped, randomly_flipped(&g, 3, 0.5));
        assert_ne!(flipped, g);
    }
}
