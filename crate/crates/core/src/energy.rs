//! Patch interaction matrix `Q` and the Dirichlet energy of the winding number.
//!
//! The energy of `w_s` is the quadratic form `s^T Q s` with
//! `Q_ij = ∫ ∇w_i · ∇w_j dV`. Because the winding number is harmonic the
//! volume integral reduces to a boundary integral per facet pair,
//!
//! ```text
//! F(τ, μ) = (1 / total_angle) ∫_τ ∇θ_μ(p) · n_τ(p) dS
//! ```
//!
//! where `n_τ` is the front-side normal of `τ` (the domain's outward normal
//! on the front sheet is `-n_τ`, which absorbs the leading minus sign).
//! `F` is infinite when boundary elements of `τ` and `μ` coincide, so each
//! entry is either finite or divergent with a sign. The volumetric grid
//! integral is kept as an independent oracle.

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mesh::{point_segment_distance, Dimension, SurfaceMesh, Vec3};
use crate::patching::{BoundaryKey, PatchDecomposition};
use crate::quadrature::{integrate_facet, PanelRule};
use crate::winding::{gradient_unchecked, patch_angle_gradient, SignAssignment};

/// One entry of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QEntry {
    Finite(f64),
    /// Unbounded entry; the payload is the sign of the divergence.
    Divergent(i8),
}

impl QEntry {
    pub fn is_divergent(&self) -> bool {
        matches!(self, QEntry::Divergent(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            QEntry::Finite(v) => Some(v),
            QEntry::Divergent(_) => None,
        }
    }
}

impl Serialize for QEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            QEntry::Finite(v) => serializer.serialize_f64(v),
            QEntry::Divergent(s) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("divergent", &s)?;
                map.end()
            }
        }
    }
}

/// Quadrature budget for [`pair_interaction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre points per segment panel (2D); minimum points of the
    /// symmetric triangle rule (3D, capped at 7).
    pub base_points: usize,
    /// Number of refinement levels evaluated; level `L` has `2^L`
    /// subdivisions per facet edge.
    pub refinement_levels: usize,
    /// Relative change between consecutive levels accepted as converged.
    pub convergence_tol: f64,
    /// Magnitude beyond which a monotonically growing ladder is divergent.
    pub divergence_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            base_points: 6,
            refinement_levels: 8,
            convergence_tol: 1e-4,
            divergence_threshold: 1e6,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refinement_levels < 2 {
            return Err(Error::Config("refinement levels must be at least 2".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config("convergence tolerance must be positive".into()));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Config("divergence threshold must be positive".into()));
        }
        if self.base_points == 0 {
            return Err(Error::Config("base points must be positive".into()));
        }
        Ok(())
    }
}

/// How a pair interaction was classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Consecutive levels agreed within tolerance.
    Converged,
    /// The ladder converged geometrically; the Aitken limit agreed within tolerance.
    Extrapolated,
    /// Boundary elements coincide; no quadrature performed.
    Coincident,
    /// Ladder exceeded the divergence threshold while growing monotonically.
    ThresholdDivergence,
    /// Ladder grows by non-decaying increments (logarithmic divergence).
    LogDivergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub entry: QEntry,
    pub classification: Classification,
    /// Quadrature values per level (empty for coincident pairs).
    pub ladder: Vec<f64>,
    /// Relative change between the last two levels.
    pub last_change: f64,
}

fn abs_floor(mesh: &SurfaceMesh) -> f64 {
    match mesh.dimension() {
        Dimension::Two => 1e-12,
        Dimension::Three => 1e-12 * mesh.scale(),
    }
}

/// Directed boundary elements of a facet: `(point, point, tag)`. In 2D each
/// endpoint appears once with tag +1 for the head and -1 for the tail; in 3D
/// each directed edge appears with tag 0.
fn boundary_elements(mesh: &SurfaceMesh, f: usize) -> Vec<(Vec3, Vec3, i8)> {
    let ([a, b, c], _) = mesh.facet_points(f);
    match mesh.dimension() {
        Dimension::Two => vec![(a, a, -1), (b, b, 1)],
        Dimension::Three => vec![(a, b, 0), (b, c, 0), (c, a, 0)],
    }
}

/// Sign of the divergence of `F(τ, μ)` if their boundaries coincide
/// geometrically: -1 where orientations are compatible (an edge traversed in
/// opposite directions, or a head meeting a tail), +1 otherwise.
pub fn coincident_sign(mesh: &SurfaceMesh, tau: usize, mu: usize) -> Result<Option<i8>> {
    let eps = mesh.eps_coincident();
    let near = |p: &Vec3, q: &Vec3| (p - q).norm() <= eps;
    let mut found: Option<i8> = None;
    for (p0, p1, pt) in boundary_elements(mesh, tau) {
        for (q0, q1, qt) in boundary_elements(mesh, mu) {
            let sign = match mesh.dimension() {
                Dimension::Two if near(&p0, &q0) => Some(if pt == qt { 1 } else { -1 }),
                Dimension::Three if near(&p0, &q0) && near(&p1, &q1) => Some(1),
                Dimension::Three if near(&p0, &q1) && near(&p1, &q0) => Some(-1),
                _ => None,
            };
            if let Some(s) = sign {
                match found {
                    Some(prev) if prev != s => {
                        return Err(Error::ConflictingDivergence { i: tau, j: mu })
                    }
                    _ => found = Some(s),
                }
            }
        }
    }
    Ok(found)
}

/// Quadrature value of `F(τ, μ)` at a single refinement level.
fn pair_quadrature(mesh: &SurfaceMesh, tau: usize, mu: usize, rule: &PanelRule, level: usize) -> f64 {
    let normal = mesh.facet_normal(tau);
    let integral = integrate_facet(mesh, tau, rule, level, |p| {
        let g = gradient_unchecked(mesh, mu, p).dot(&normal);
        // nodes landing exactly on μ's boundary carry no measure
        if g.is_finite() {
            g
        } else {
            0.0
        }
    });
    integral / mesh.constants().total_angle
}

/// Raw quadrature values of `F(τ, μ)` at levels `0..levels`, with no
/// coincidence shortcut.
pub fn refinement_ladder(
    mesh: &SurfaceMesh,
    tau: usize,
    mu: usize,
    base_points: usize,
    levels: usize,
) -> Vec<f64> {
    let rule = PanelRule::new(mesh.dimension(), base_points);
    (0..levels)
        .map(|level| pair_quadrature(mesh, tau, mu, &rule, level))
        .collect()
}

fn rel_change(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// Aitken Δ² limit of the last three terms of `v`, when the increments
/// shrink geometrically.
fn aitken(v: &[f64]) -> Option<f64> {
    let n = v.len();
    if n < 3 {
        return None;
    }
    let d1 = v[n - 2] - v[n - 3];
    let d2 = v[n - 1] - v[n - 2];
    if d1 == 0.0 || d2 == 0.0 {
        return Some(v[n - 1]);
    }
    let ratio = d2 / d1;
    if !(ratio > 0.0 && ratio < 0.8) {
        return None;
    }
    Some(v[n - 1] + d2 * ratio / (1.0 - ratio))
}

fn monotone_growth(v: &[f64]) -> Option<i8> {
    let n = v.len();
    if n < 3 {
        return None;
    }
    let tail = &v[n - 3..];
    let sign = tail[2].signum();
    let same_sign = tail.iter().all(|x| x.signum() == sign && *x != 0.0);
    let growing = tail[0].abs() < tail[1].abs() && tail[1].abs() < tail[2].abs();
    (same_sign && growing).then_some(sign as i8)
}

/// Increments that stay the same size level after level: the signature of a
/// logarithmically divergent integral under uniform refinement.
fn log_divergence(v: &[f64]) -> Option<i8> {
    let n = v.len();
    if n < 4 {
        return None;
    }
    let d: Vec<f64> = v[n - 4..].windows(2).map(|w| w[1] - w[0]).collect();
    let sign = d[2].signum();
    if d.iter().any(|x| x.signum() != sign || *x == 0.0) {
        return None;
    }
    let steady = d.windows(2).all(|w| {
        let r = w[1] / w[0];
        (0.8..=1.25).contains(&r)
    });
    (steady && monotone_growth(v) == Some(sign as i8)).then_some(sign as i8)
}

/// Classifies `F(τ, μ)` for facets in their current orientation.
pub fn pair_interaction_detailed(
    mesh: &SurfaceMesh,
    tau: usize,
    mu: usize,
    cfg: &QuadratureConfig,
) -> Result<PairOutcome> {
    cfg.validate()?;
    for f in [tau, mu] {
        if f >= mesh.num_facets() {
            return Err(Error::IndexOutOfRange {
                index: f,
                len: mesh.num_facets(),
            });
        }
    }
    if let Some(sign) = coincident_sign(mesh, tau, mu)? {
        return Ok(PairOutcome {
            entry: QEntry::Divergent(sign),
            classification: Classification::Coincident,
            ladder: Vec::new(),
            last_change: f64::NAN,
        });
    }

    let rule = PanelRule::new(mesh.dimension(), cfg.base_points);
    let floor = abs_floor(mesh);
    let mut ladder = Vec::with_capacity(cfg.refinement_levels);
    for level in 0..cfg.refinement_levels {
        let v = pair_quadrature(mesh, tau, mu, &rule, level);
        ladder.push(v);
        if level < 2 {
            continue;
        }
        let prev = ladder[level - 1];
        if (v - prev).abs() <= cfg.convergence_tol * v.abs() + floor {
            return Ok(PairOutcome {
                entry: QEntry::Finite(v),
                classification: Classification::Converged,
                last_change: rel_change(v, prev),
                ladder,
            });
        }
        if v.abs() > cfg.divergence_threshold {
            if let Some(sign) = monotone_growth(&ladder) {
                return Ok(PairOutcome {
                    entry: QEntry::Divergent(sign),
                    classification: Classification::ThresholdDivergence,
                    last_change: rel_change(v, prev),
                    ladder,
                });
            }
        }
    }

    let n = ladder.len();
    let last_change = rel_change(ladder[n - 1], ladder[n - 2]);
    if n >= 4 {
        if let (Some(a_prev), Some(a_last)) = (aitken(&ladder[..n - 1]), aitken(&ladder)) {
            if (a_last - a_prev).abs() <= cfg.convergence_tol * a_last.abs() + floor {
                return Ok(PairOutcome {
                    entry: QEntry::Finite(a_last),
                    classification: Classification::Extrapolated,
                    last_change,
                    ladder,
                });
            }
        }
    }
    if let Some(sign) = log_divergence(&ladder) {
        return Ok(PairOutcome {
            entry: QEntry::Divergent(sign),
            classification: Classification::LogDivergence,
            last_change,
            ladder,
        });
    }
    Err(Error::NoConvergence {
        tau,
        mu,
        levels: n,
        last_change,
    })
}

/// `F(τ, μ)` as a [`QEntry`]; see [`pair_interaction_detailed`].
pub fn pair_interaction(mesh: &SurfaceMesh, tau: usize, mu: usize, cfg: &QuadratureConfig) -> Result<QEntry> {
    pair_interaction_detailed(mesh, tau, mu, cfg).map(|o| o.entry)
}

/// Per-entry bookkeeping from [`assemble_q`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntryDiagnostics {
    pub facet_pairs: usize,
    pub coincident_pairs: usize,
    pub extrapolated_pairs: usize,
    pub divergent_pairs: usize,
    /// Deepest refinement level used by any summand.
    pub max_levels: usize,
    /// Largest final relative change among converged summands.
    pub max_rel_change: f64,
}

/// Symmetric `n x n` interaction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    n: usize,
    entries: Vec<QEntry>,
    diagnostics: Vec<EntryDiagnostics>,
}

impl QMatrix {
    /// Matrix with divergent-positive diagonal and the given off-diagonal
    /// entries (each unordered pair set once, mirrored); unset pairs are 0.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, QEntry)]) -> Result<Self> {
        let mut q = QMatrix::empty(n);
        for &(i, j, e) in pairs {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i == j {
                return Err(Error::Config("diagonal entries are always divergent".into()));
            }
            q.set(i, j, e);
        }
        Ok(q)
    }

    /// Matrix from dense finite off-diagonal values (upper triangle read).
    pub fn from_dense(values: &[Vec<f64>]) -> Result<Self> {
        let n = values.len();
        let mut q = QMatrix::empty(n);
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for j in i + 1..n {
                q.set(i, j, QEntry::Finite(row[j]));
            }
        }
        Ok(q)
    }

    fn empty(n: usize) -> Self {
        let mut entries = vec![QEntry::Finite(0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = QEntry::Divergent(1);
        }
        QMatrix {
            n,
            entries,
            diagnostics: vec![EntryDiagnostics::default(); n * n],
        }
    }

    fn set(&mut self, i: usize, j: usize, e: QEntry) {
        self.entries[i * self.n + j] = e;
        self.entries[j * self.n + i] = e;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> QEntry {
        self.entries[i * self.n + j]
    }

    pub fn diagnostics(&self, i: usize, j: usize) -> &EntryDiagnostics {
        &self.diagnostics[i * self.n + j]
    }

    /// Off-diagonal unordered pairs `(i < j)` in row order.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize, QEntry)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn finite_count(&self) -> usize {
        self.upper_pairs().filter(|(_, _, e)| !e.is_divergent()).count()
    }

    pub fn divergent_count(&self) -> usize {
        self.upper_pairs().filter(|(_, _, e)| e.is_divergent()).count()
    }

    /// Surrogate magnitude for divergent entries:
    /// `10 * Σ_{i<j} |finite Q_ij| + 1`.
    pub fn big_m(&self) -> f64 {
        10.0 * self
            .upper_pairs()
            .filter_map(|(_, _, e)| e.finite())
            .map(f64::abs)
            .sum::<f64>()
            + 1.0
    }

    /// Dense coupling matrix with divergent entries replaced by `±M` and a
    /// zero diagonal.
    pub fn couplings(&self) -> Vec<f64> {
        let m = self.big_m();
        let mut out = vec![0.0; self.n * self.n];
        for (i, j, e) in self.upper_pairs() {
            let v = match e {
                QEntry::Finite(v) => v,
                QEntry::Divergent(s) => f64::from(s) * m,
            };
            out[i * self.n + j] = v;
            out[j * self.n + i] = v;
        }
        out
    }

    /// Rows of entries, for reports.
    pub fn rows(&self) -> Vec<Vec<QEntry>> {
        self.entries.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }
}

/// Assembles `Q` from all cross-patch facet pairs, with facets in their
/// per-patch reference orientation. Diagonal entries are divergent (+1)
/// without computation.
pub fn assemble_q(mesh: &SurfaceMesh, decomp: &PatchDecomposition, cfg: &QuadratureConfig) -> Result<QMatrix> {
    cfg.validate()?;
    let reference = decomp.reference_mesh(mesh);
    let n = decomp.num_patches();
    let mut tasks = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for &tau in &decomp.patches[i].facets {
                for &mu in &decomp.patches[j].facets {
                    tasks.push((i, j, tau, mu));
                }
            }
        }
    }
    let outcomes: Vec<Result<PairOutcome>> = tasks
        .par_iter()
        .map(|&(_, _, tau, mu)| pair_interaction_detailed(&reference, tau, mu, cfg))
        .collect();

    let mut q = QMatrix::empty(n);
    let mut sums = vec![0.0; n * n];
    let mut divergent: Vec<Option<i8>> = vec![None; n * n];
    for (&(i, j, _, _), outcome) in tasks.iter().zip(outcomes) {
        let outcome = outcome?;
        let k = i * n + j;
        let diag = &mut q.diagnostics[k];
        diag.facet_pairs += 1;
        diag.max_levels = diag.max_levels.max(outcome.ladder.len());
        match outcome.classification {
            Classification::Coincident => diag.coincident_pairs += 1,
            Classification::Extrapolated => diag.extrapolated_pairs += 1,
            _ => {}
        }
        match outcome.entry {
            QEntry::Finite(v) => {
                sums[k] += v;
                if outcome.last_change.is_finite() {
                    diag.max_rel_change = diag.max_rel_change.max(outcome.last_change);
                }
            }
            QEntry::Divergent(s) => {
                diag.divergent_pairs += 1;
                match divergent[k] {
                    Some(prev) if prev != s => return Err(Error::ConflictingDivergence { i, j }),
                    Some(_) => {}
                    None => divergent[k] = Some(s),
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let k = i * n + j;
            let e = match divergent[k] {
                Some(s) => QEntry::Divergent(s),
                None => QEntry::Finite(sums[k]),
            };
            q.set(i, j, e);
            q.diagnostics[j * n + i] = q.diagnostics[k].clone();
        }
    }
    Ok(q)
}

/// Diagonal-free energy `Σ_{i<j} s_i s_j Q_ij`, divergent entries counted
/// as `±M` (see [`QMatrix::big_m`]).
pub fn energy(q: &QMatrix, signs: &SignAssignment) -> Result<f64> {
    if signs.len() != q.n() {
        return Err(Error::SizeMismatch {
            expected: q.n(),
            actual: signs.len(),
        });
    }
    let m = q.big_m();
    Ok(q.upper_pairs()
        .map(|(i, j, e)| {
            let v = match e {
                QEntry::Finite(v) => v,
                QEntry::Divergent(s) => f64::from(s) * m,
            };
            signs.get(i) * signs.get(j) * v
        })
        .sum())
}

/// Grid placement shared by the oracle and field sampling: a square (cube)
/// of side `max_extent * margin` centred on the bounding box, split into
/// `resolution` cells per axis. Returns `(origin, spacing)`.
pub(crate) fn grid_frame(mesh: &SurfaceMesh, resolution: usize, margin: f64) -> Result<(Vec3, f64)> {
    let (lo, hi) = mesh.bounding_box()?;
    let d = mesh.dimension().as_usize();
    let extent = (0..d).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let side = if extent > 0.0 { extent * margin } else { margin };
    let center = (lo + hi) * 0.5;
    let mut origin = center - Vec3::repeat(side * 0.5);
    if d == 2 {
        origin.z = 0.0;
    }
    Ok((origin, side / resolution as f64))
}

/// Brute-force volumetric estimate of `Q_ij`: midpoint rule over a regular
/// grid, skipping cells whose centre lies within `exclusion_radius` of the
/// boundary of patch `i` or `j` (open endpoints in 2D, open edges in 3D),
/// where the patch gradients blow up. The gradients are continuous across
/// facet interiors, so no band around the facets themselves is removed.
pub fn volumetric_oracle(
    mesh: &SurfaceMesh,
    decomp: &PatchDecomposition,
    i: usize,
    j: usize,
    resolution: usize,
    margin: f64,
    exclusion_radius: f64,
) -> Result<f64> {
    let n = decomp.num_patches();
    for p in [i, j] {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, len: n });
        }
    }
    if i == j {
        return Err(Error::Config("oracle needs two distinct patches".into()));
    }
    if resolution == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    let reference = decomp.reference_mesh(mesh);
    for &tau in &decomp.patches[i].facets {
        for &mu in &decomp.patches[j].facets {
            if coincident_sign(&reference, tau, mu)?.is_some() {
                return Err(Error::CoincidentBoundaries { i, j });
            }
        }
    }
    let singular: Vec<BoundaryKey> = [i, j]
        .iter()
        .flat_map(|&p| decomp.patch_boundary(mesh, p))
        .collect();
    let distance_to_singular = |p: &Vec3| {
        singular
            .iter()
            .map(|key| match *key {
                BoundaryKey::Vertex(v) => (p - mesh.vertex(v)).norm(),
                BoundaryKey::Edge(a, b) => point_segment_distance(p, &mesh.vertex(a), &mesh.vertex(b)),
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (origin, h) = grid_frame(mesh, resolution, margin)?;
    let dim = mesh.dimension().as_usize();
    let slabs = if dim == 3 { resolution * resolution } else { resolution };
    let cell_volume = h.powi(dim as i32);

    let partial: Vec<f64> = (0..slabs)
        .into_par_iter()
        .map(|slab| {
            let (iy, iz) = (slab % resolution, slab / resolution);
            let mut acc = 0.0;
            for ix in 0..resolution {
                let mut p = origin + Vec3::new(ix as f64 + 0.5, iy as f64 + 0.5, 0.0) * h;
                if dim == 3 {
                    p.z = origin.z + (iz as f64 + 0.5) * h;
                }
                if distance_to_singular(&p) < exclusion_radius.max(mesh.eps_singular()) {
                    continue;
                }
                let gi = patch_angle_gradient(mesh, decomp, i, &p);
                let gj = patch_angle_gradient(mesh, decomp, j, &p);
                acc += gi.dot(&gj);
            }
            acc
        })
        .collect();
    let total = mesh.constants().total_angle;
    Ok(partial.iter().sum::<f64>() * cell_volume / (total * total))
}
