//! Composite quadrature over a single facet.
//!
//! Segments use Gauss-Legendre panels; level `L` splits the segment into
//! `2^L` equal panels. Triangles use a symmetric rule on a uniform
//! subdivision with `2^L` divisions per edge (`4^L` sub-triangles).

use gauss_quad::GaussLegendre;

use crate::mesh::{Dimension, SurfaceMesh, Vec3};

/// Per-panel node set in reference coordinates.
#[derive(Debug, Clone)]
pub(crate) enum PanelRule {
    /// Nodes on `[0, 1]` with weights summing to 1.
    Segment(Vec<(f64, f64)>),
    /// Barycentric nodes `(l1, l2)` (with `l0 = 1 - l1 - l2`), weights summing to 1.
    Triangle(Vec<(f64, f64, f64)>),
}

impl PanelRule {
    /// Rule with at least `points` nodes per panel (capped at the 7-point
    /// degree-5 rule for triangles).
    pub(crate) fn new(dimension: Dimension, points: usize) -> Self {
        match dimension {
            Dimension::Two => {
                let nodes = if points < 2 {
                    vec![(0.5, 1.0)]
                } else {
                    GaussLegendre::new(points)
                        .expect("degree >= 2")
                        .as_node_weight_pairs()
                        .iter()
                        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                        .collect()
                };
                PanelRule::Segment(nodes)
            }
            Dimension::Three => PanelRule::Triangle(triangle_rule(points)),
        }
    }
}

fn triangle_rule(points: usize) -> Vec<(f64, f64, f64)> {
    match points {
        0 | 1 => vec![(1.0 / 3.0, 1.0 / 3.0, 1.0)],
        2 | 3 => vec![
            (1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
            (2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
            (1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
        ],
        _ => {
            let s15 = 15f64.sqrt();
            let (a1, b1) = ((6.0 - s15) / 21.0, (9.0 + 2.0 * s15) / 21.0);
            let (a2, b2) = ((6.0 + s15) / 21.0, (9.0 - 2.0 * s15) / 21.0);
            let (w1, w2) = ((155.0 - s15) / 1200.0, (155.0 + s15) / 1200.0);
            vec![
                (1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0),
                (a1, a1, w1),
                (b1, a1, w1),
                (a1, b1, w1),
                (a2, a2, w2),
                (b2, a2, w2),
                (a2, b2, w2),
            ]
        }
    }
}

/// Integrates `g` over facet `f` at refinement `level`. Nodes are visited in
/// a fixed order so results are reproducible.
pub(crate) fn integrate_facet(
    mesh: &SurfaceMesh,
    f: usize,
    rule: &PanelRule,
    level: usize,
    mut g: impl FnMut(&Vec3) -> f64,
) -> f64 {
    let ([a, b, c], _) = mesh.facet_points(f);
    let divisions = 1usize << level;
    match rule {
        PanelRule::Segment(nodes) => {
            let d = b - a;
            let h = 1.0 / divisions as f64;
            let mut sum = 0.0;
            for k in 0..divisions {
                let t0 = k as f64 * h;
                let mut panel = 0.0;
                for &(x, w) in nodes {
                    panel += w * g(&(a + d * (t0 + h * x)));
                }
                sum += panel;
            }
            sum * h * d.norm()
        }
        PanelRule::Triangle(nodes) => {
            let n = divisions as f64;
            let e1 = (b - a) / n;
            let e2 = (c - a) / n;
            let area = 0.5 * e1.cross(&e2).norm();
            let mut sum = 0.0;
            for i in 0..divisions {
                for j in 0..divisions - i {
                    let base = a + e1 * i as f64 + e2 * j as f64;
                    // upward sub-triangle: base, base+e1, base+e2
                    for &(l1, l2, w) in nodes {
                        sum += w * g(&(base + e1 * l1 + e2 * l2));
                    }
                    if i + j + 1 < divisions {
                        // downward: base+e1, base+e1+e2, base+e2
                        let top = base + e1 + e2;
                        for &(l1, l2, w) in nodes {
                            sum += w * g(&(top - e2 * l1 - e1 * l2));
                        }
                    }
                }
            }
            sum * area
        }
    }
}
