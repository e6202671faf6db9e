//! Decomposition of a mesh into orientable manifold patches.
//!
//! Facets are joined when they share a manifold boundary element (an edge
//! in 3D, a vertex in 2D) with exactly two incident facets. Elements with
//! three or more incident facets are non-manifold and sever connectivity.
//! Inside each patch, orientations are made consistent by breadth-first
//! propagation from the lowest-index facet, which keeps its original order.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Dimension, SurfaceMesh};
use crate::winding::SignAssignment;

/// Topological boundary element of a facet: a vertex in 2D, an undirected
/// edge `(lo, hi)` in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum BoundaryKey {
    Vertex(usize),
    Edge(usize, usize),
}

impl BoundaryKey {
    pub fn vertices(&self) -> Vec<usize> {
        match *self {
            BoundaryKey::Vertex(v) => vec![v],
            BoundaryKey::Edge(a, b) => vec![a, b],
        }
    }
}

/// Boundary elements of facet `f` with a traversal direction each. Two
/// facets sharing an element are compatibly oriented iff their directions
/// differ: opposite edge traversal in 3D, head meeting tail in 2D.
pub(crate) fn facet_boundary(mesh: &SurfaceMesh, f: usize) -> Vec<(BoundaryKey, bool)> {
    let v = mesh.facet(f);
    match mesh.dimension() {
        // (vertex, is_head)
        Dimension::Two => vec![
            (BoundaryKey::Vertex(v[0]), false),
            (BoundaryKey::Vertex(v[1]), true),
        ],
        Dimension::Three => (0..3)
            .map(|k| {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                (BoundaryKey::Edge(a.min(b), a.max(b)), a < b)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Patch {
    /// Facet indices, ascending.
    pub facets: Vec<usize>,
    /// Whether each facet (aligned with `facets`) is flipped to make the
    /// patch internally consistent.
    pub internal_flips: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchDecomposition {
    pub patches: Vec<Patch>,
    pub nonmanifold_edges: Vec<BoundaryKey>,
    facet_patch: Vec<usize>,
    facet_flip: Vec<bool>,
}

impl PatchDecomposition {
    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn patch_of(&self, facet: usize) -> usize {
        self.facet_patch[facet]
    }

    pub fn internal_flip(&self, facet: usize) -> bool {
        self.facet_flip[facet]
    }

    pub fn num_facets(&self) -> usize {
        self.facet_patch.len()
    }

    /// Multiplier applied to facet `f`'s original-orientation angle: the
    /// patch sign, negated again if the facet was flipped internally.
    pub fn facet_sign(&self, facet: usize, signs: &SignAssignment) -> f64 {
        let s = signs.get(self.facet_patch[facet]);
        if self.facet_flip[facet] {
            -s
        } else {
            s
        }
    }

    pub(crate) fn check_signs(&self, signs: &SignAssignment) -> Result<()> {
        if signs.len() != self.patches.len() {
            return Err(Error::SizeMismatch {
                expected: self.patches.len(),
                actual: signs.len(),
            });
        }
        Ok(())
    }

    /// The mesh with all internal flips applied (every patch at sign +1).
    pub fn reference_mesh(&self, mesh: &SurfaceMesh) -> SurfaceMesh {
        let mut out = mesh.clone();
        for f in 0..self.facet_flip.len() {
            if self.facet_flip[f] {
                out.flip_in_place(f);
            }
        }
        out
    }

    /// Boundary elements of a patch: those shared by no other facet of the
    /// same patch.
    pub fn patch_boundary(&self, mesh: &SurfaceMesh, patch: usize) -> Vec<BoundaryKey> {
        let mut count: BTreeMap<BoundaryKey, usize> = BTreeMap::new();
        for &f in &self.patches[patch].facets {
            for (key, _) in facet_boundary(mesh, f) {
                *count.entry(key).or_default() += 1;
            }
        }
        count.into_iter().filter(|&(_, c)| c == 1).map(|(k, _)| k).collect()
    }

    pub fn report(&self) -> PatchReport {
        PatchReport {
            n: self.patches.len(),
            patches: self
                .patches
                .iter()
                .enumerate()
                .map(|(i, p)| PatchSummary {
                    id: i + 1,
                    facets: p.facets.len(),
                    internal_flips: p.internal_flips.iter().filter(|&&x| x).count(),
                })
                .collect(),
            nonmanifold_edges: self.nonmanifold_edges.iter().map(|k| k.vertices()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchSummary {
    /// 1-based patch id.
    pub id: usize,
    pub facets: usize,
    pub internal_flips: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchReport {
    pub n: usize,
    pub patches: Vec<PatchSummary>,
    pub nonmanifold_edges: Vec<Vec<usize>>,
}

pub fn extract_patches(mesh: &SurfaceMesh) -> Result<PatchDecomposition> {
    let nf = mesh.num_facets();
    let boundaries: Vec<_> = (0..nf).map(|f| facet_boundary(mesh, f)).collect();

    let mut incidence: BTreeMap<BoundaryKey, Vec<(usize, bool)>> = BTreeMap::new();
    for (f, elems) in boundaries.iter().enumerate() {
        for &(key, dir) in elems {
            incidence.entry(key).or_default().push((f, dir));
        }
    }
    let nonmanifold_edges: Vec<BoundaryKey> = incidence
        .iter()
        .filter(|(_, inc)| inc.len() > 2)
        .map(|(k, _)| *k)
        .collect();

    let mut facet_patch = vec![usize::MAX; nf];
    let mut facet_flip = vec![false; nf];
    let mut patches = Vec::new();

    for seed in 0..nf {
        if facet_patch[seed] != usize::MAX {
            continue;
        }
        let pid = patches.len();
        facet_patch[seed] = pid;
        let mut members = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            for &(key, dir) in &boundaries[f] {
                let inc = &incidence[&key];
                if inc.len() != 2 {
                    continue;
                }
                for &(g, gdir) in inc {
                    if g == f {
                        continue;
                    }
                    let required = facet_flip[f] ^ (dir == gdir);
                    if facet_patch[g] == usize::MAX {
                        facet_patch[g] = pid;
                        facet_flip[g] = required;
                        members.push(g);
                        queue.push_back(g);
                    } else if facet_flip[g] != required {
                        return Err(Error::NonOrientablePatch { facet: g });
                    }
                }
            }
        }
        members.sort_unstable();
        let internal_flips = members.iter().map(|&f| facet_flip[f]).collect();
        patches.push(Patch {
            facets: members,
            internal_flips,
        });
    }

    Ok(PatchDecomposition {
        patches,
        nonmanifold_edges,
        facet_patch,
        facet_flip,
    })
}

/// Orients every facet by its patch sign: final orientation is
/// original XOR internal flip XOR (sign = -1).
pub fn apply_signs(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    signs: &SignAssignment,
) -> Result<SurfaceMesh> {
    decomp.check_signs(signs)?;
    if decomp.num_facets() != mesh.num_facets() {
        return Err(Error::SizeMismatch {
            expected: decomp.num_facets(),
            actual: mesh.num_facets(),
        });
    }
    let mut out = mesh.clone();
    for f in 0..mesh.num_facets() {
        if decomp.facet_sign(f, signs) < 0.0 {
            out.flip_in_place(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn two_triangles() -> SurfaceMesh {
        SurfaceMesh::triangles(
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            &[[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn consistent_pair_is_one_patch() {
        let d = extract_patches(&two_triangles()).unwrap();
        assert_eq!(d.num_patches(), 1);
        assert_eq!(d.patches[0].internal_flips, vec![false, false]);
        assert!(d.nonmanifold_edges.is_empty());
    }

    #[test]
    fn inconsistent_pair_gets_internal_flip() {
        let m = two_triangles().flip_facet(1).unwrap();
        let d = extract_patches(&m).unwrap();
        assert_eq!(d.num_patches(), 1);
        assert_eq!(d.patches[0].internal_flips, vec![false, true]);
        assert_eq!(d.reference_mesh(&m), two_triangles());
    }

    #[test]
    fn patch_boundaries() {
        let sq = fixtures::unit_square();
        assert!(extract_patches(&sq).unwrap().patch_boundary(&sq, 0).is_empty());
        let g = fixtures::gapped_circle(2, 4, 1.0, 0.2);
        let d = extract_patches(&g).unwrap();
        let b = d.patch_boundary(&g, 0);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0], BoundaryKey::Vertex(0));
        let two = two_triangles();
        assert_eq!(extract_patches(&two).unwrap().patch_boundary(&two, 0).len(), 4);
    }

    #[test]
    fn fan_splits_at_nonmanifold_edge() {
        let d = extract_patches(&fixtures::triangle_fan(3)).unwrap();
        assert_eq!(d.num_patches(), 3);
        assert_eq!(d.nonmanifold_edges, vec![BoundaryKey::Edge(0, 1)]);
    }

    #[test]
    fn mobius_is_rejected() {
        assert!(matches!(
            extract_patches(&fixtures::mobius_strip(9)),
            Err(Error::NonOrientablePatch { .. })
        ));
    }

    #[test]
    fn degree_three_vertex_splits_polylines() {
        // Y junction: three segments meeting at vertex 0
        let m = SurfaceMesh::polyline(
            &[[0.0, 0.0], [1.0, 0.0], [-1.0, 1.0], [-1.0, -1.0]],
            &[[0, 1], [2, 0], [0, 3]],
        )
        .unwrap();
        let d = extract_patches(&m).unwrap();
        assert_eq!(d.num_patches(), 3);
        assert_eq!(d.nonmanifold_edges, vec![BoundaryKey::Vertex(0)]);
    }

    #[test]
    fn apply_signs_cases() {
        let sq = fixtures::unit_square();
        let d = extract_patches(&sq).unwrap();
        let plus = SignAssignment::all_positive(1);
        assert_eq!(apply_signs(&sq, &d, &plus).unwrap(), sq);
        let minus = SignAssignment::new(vec![-1]).unwrap();
        let flipped = apply_signs(&sq, &d, &minus).unwrap();
        for f in 0..4 {
            assert_eq!(flipped.facet(f), sq.flip_facet(f).unwrap().facet(f));
        }
        let d2 = extract_patches(&flipped).unwrap();
        assert_eq!(apply_signs(&flipped, &d2, &minus).unwrap(), sq);
        assert!(matches!(
            apply_signs(&sq, &d, &SignAssignment::all_positive(2)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn disjoint_component_adds_its_patches() {
        let fan = fixtures::triangle_fan(3);
        let n_fan = extract_patches(&fan).unwrap().num_patches();
        let combined = fixtures::disjoint_union(&fan, &two_triangles(), 10.0);
        assert_eq!(extract_patches(&combined).unwrap().num_patches(), n_fan + 1);
    }
}
