//! Sampling, rendering and checking the winding-number field on a grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::grid_frame;
use crate::error::{Error, Result};
use crate::mesh::{Dimension, SurfaceMesh, Vec3};
use crate::patching::PatchDecomposition;
use crate::winding::{angle_unchecked, SignAssignment};

/// Regular grid of cell-centre samples, stored x-fastest, then y, then z.
/// `mask[k]` is true where the cell centre was too close to the surface to
/// evaluate; the matching `values[k]` is 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarGrid {
    #[serde(skip)]
    pub dimension: usize,
    #[serde(skip)]
    pub resolution: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub counts: Vec<usize>,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ScalarGrid {
    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> Option<f64> {
        let r = self.resolution;
        let k = (iz * r + iy) * r + ix;
        (!self.mask[k]).then_some(self.values[k])
    }

    pub fn cell_center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let c = |o: f64, i: usize| o + (i as f64 + 0.5) * self.spacing;
        let z = if self.dimension == 3 { c(self.origin[2], iz) } else { 0.0 };
        Vec3::new(c(self.origin[0], ix), c(self.origin[1], iy), z)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Smallest and largest unmasked value.
    pub fn range(&self) -> Option<(f64, f64)> {
        let live = self.values.iter().zip(&self.mask).filter(|(_, &m)| !m).map(|(v, _)| v);
        live.fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serializes")
    }
}

fn winding_at(mesh: &SurfaceMesh, decomp: &PatchDecomposition, signs: &SignAssignment, p: &Vec3) -> f64 {
    let sum: f64 = (0..mesh.num_facets())
        .map(|f| angle_unchecked(mesh, f, p) * decomp.facet_sign(f, signs))
        .sum();
    sum / mesh.constants().total_angle
}

/// Samples `w_s` at cell centres of a `resolution^d` grid spanning
/// `margin` times the mesh's largest extent.
pub fn sample_field(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    signs: &SignAssignment,
    resolution: usize,
    margin: f64,
) -> Result<ScalarGrid> {
    decomp.check_signs(signs)?;
    if resolution == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    if !(margin > 0.0) {
        return Err(Error::Config("margin must be positive".into()));
    }
    let (origin, spacing) = grid_frame(mesh, resolution, margin)?;
    let dimension = mesh.dimension().as_usize();
    let mut grid = ScalarGrid {
        dimension,
        resolution,
        origin: origin.as_slice()[..dimension].to_vec(),
        spacing,
        counts: vec![resolution; dimension],
        values: Vec::new(),
        mask: Vec::new(),
    };
    let rows = if dimension == 3 { resolution * resolution } else { resolution };
    let eps = mesh.eps_singular();
    let values: Vec<Vec<Option<f64>>> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let (iy, iz) = (row % resolution, row / resolution);
            (0..resolution)
                .map(|ix| {
                    let p = grid.cell_center(ix, iy, iz);
                    (mesh.distance_to_surface(&p) >= eps).then(|| winding_at(mesh, decomp, signs, &p))
                })
                .collect()
        })
        .collect();
    let values: Vec<Option<f64>> = values.into_iter().flatten().collect();
    grid.mask = values.iter().map(Option::is_none).collect();
    grid.values = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    Ok(grid)
}

/// Cold-to-warm ramp; every channel is monotone in `t`.
fn colormap(t: f64) -> [u8; 3] {
    const COLD: [f64; 3] = [59.0, 76.0, 192.0];
    const WARM: [f64; 3] = [180.0, 4.0, 38.0];
    let t = t.clamp(0.0, 1.0);
    let mut out = [0u8; 3];
    for k in 0..3 {
        out[k] = (COLD[k] + t * (WARM[k] - COLD[k])).round() as u8;
    }
    out
}

/// Binary PPM (P6) image of a 2D grid, values clamped to `[clamp_min,
/// clamp_max]`. Masked cells are black; the top image row is the largest y.
pub fn render(grid: &ScalarGrid, clamp_min: f64, clamp_max: f64) -> Result<Vec<u8>> {
    if !(clamp_min < clamp_max) {
        return Err(Error::BadClampRange {
            min: clamp_min,
            max: clamp_max,
        });
    }
    if grid.dimension != 2 {
        return Err(Error::Config("only 2D grids can be rendered".into()));
    }
    let r = grid.resolution;
    let mut out = format!("P6\n{r} {r}\n255\n").into_bytes();
    for iy in (0..r).rev() {
        for ix in 0..r {
            let rgb = match grid.get(ix, iy, 0) {
                Some(v) => colormap((v - clamp_min) / (clamp_max - clamp_min)),
                None => [0, 0, 0],
            };
            out.extend_from_slice(&rgb);
        }
    }
    Ok(out)
}

/// Central-difference Laplacian of `f` at `p` with spacing `step`.
pub fn stencil_laplacian(dimension: Dimension, p: &Vec3, step: f64, f: impl Fn(&Vec3) -> f64) -> f64 {
    let centre = f(p);
    let mut sum = 0.0;
    for k in 0..dimension.as_usize() {
        let mut e = Vec3::zeros();
        e[k] = step;
        sum += f(&(p + e)) + f(&(p - e)) - 2.0 * centre;
    }
    sum / (step * step)
}

/// Discrete Laplacian of `w_s` at each query point; points closer than
/// `2 * step` to the surface are rejected.
pub fn laplacian_residual(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    signs: &SignAssignment,
    points: &[Vec3],
    step: f64,
) -> Result<Vec<f64>> {
    decomp.check_signs(signs)?;
    if !(step > 0.0) {
        return Err(Error::Config("stencil step must be positive".into()));
    }
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let min_distance = mesh.distance_to_surface(p);
            if min_distance < 2.0 * step {
                return Err(Error::TooCloseToSurface { index, min_distance });
            }
            Ok(stencil_laplacian(mesh.dimension(), p, step, |q| {
                winding_at(mesh, decomp, signs, q)
            }))
        })
        .collect()
}
