//! Shortest paths on a planar lattice: an independent upper estimate of the
//! weighted distance between two points.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::norm::NormSpec;
use crate::weight::{Domain, WeightField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Neighborhood {
    Eight,
    Sixteen,
}

impl TryFrom<u8> for Neighborhood {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            8 => Ok(Self::Eight),
            16 => Ok(Self::Sixteen),
            _ => Err(Error::InvalidInput(format!("neighborhood must be 8 or 16, got {v}"))),
        }
    }
}

impl From<Neighborhood> for u8 {
    fn from(n: Neighborhood) -> u8 {
        match n {
            Neighborhood::Eight => 8,
            Neighborhood::Sixteen => 16,
        }
    }
}

impl Neighborhood {
    fn offsets(self) -> Vec<(i64, i64)> {
        let mut out = vec![(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        if self == Self::Sixteen {
            out.extend([(2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1)]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOracleParams {
    /// Lattice nodes per axis.
    pub resolution: usize,
    pub neighborhood: Neighborhood,
}

impl Default for GridOracleParams {
    fn default() -> Self {
        Self {
            resolution: 512,
            neighborhood: Neighborhood::Eight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOracleResult {
    pub distance: f64,
    /// Worst ratio of lattice length to true length for a constant weight.
    pub metrication_factor: f64,
    /// `(metrication_factor - 1) * distance`
    pub metrication_bound: f64,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Worst ratio, over directions, of the cheapest lattice path length to the
/// true length, for steps `(i hx, j hy)` from the stencil.
pub fn metrication_factor(norm: &NormSpec, hx: f64, hy: f64, neighborhood: Neighborhood) -> f64 {
    let mut steps: Vec<(f64, [f64; 2])> = neighborhood
        .offsets()
        .into_iter()
        .map(|(i, j)| {
            let v = [i as f64 * hx, j as f64 * hy];
            (v[1].atan2(v[0]), v)
        })
        .collect();
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst: f64 = 1.0;
    let samples = 7200;
    for s in 0..samples {
        let theta = std::f64::consts::PI * 2.0 * (s as f64 + 0.5) / samples as f64 - std::f64::consts::PI;
        let u = [theta.cos(), theta.sin()];
        // cheapest conic combination of two angularly adjacent steps
        let mut best = f64::INFINITY;
        for k in 0..steps.len() {
            let a = steps[k].1;
            let b = steps[(k + 1) % steps.len()].1;
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-300 {
                continue;
            }
            let alpha = (u[0] * b[1] - u[1] * b[0]) / det;
            let beta = (a[0] * u[1] - a[1] * u[0]) / det;
            if alpha >= -1e-12 && beta >= -1e-12 {
                best = best.min(alpha.max(0.0) * norm.norm(&a) + beta.max(0.0) * norm.norm(&b));
            }
        }
        worst = worst.max(best / norm.norm(&u));
    }
    worst
}

/// Dijkstra on a lattice spanning the endpoints' bounding box enlarged by half
/// its extent and clipped to the domain. Edge costs use the trapezoid rule.
pub fn grid_oracle(
    x0: &[f64],
    x1: &[f64],
    weight: &WeightField,
    domain: &Domain,
    norm: &NormSpec,
    params: &GridOracleParams,
) -> Result<GridOracleResult> {
    if norm.dim() != 2 || domain.norm().dim() != 2 {
        return Err(Error::InvalidInput("grid oracle is planar".into()));
    }
    if params.resolution < 32 {
        return Err(Error::InvalidInput(format!(
            "resolution must be at least 32, got {}",
            params.resolution
        )));
    }
    let w = weight.clone().in_norm(norm);
    for x in [x0, x1] {
        if x.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: x.len(),
            });
        }
        if !domain.contains(x) {
            return Err(Error::OutsideDomain(domain.boundary_distance(x)));
        }
        w.eval(x)?;
    }
    let extent = (x1[0] - x0[0]).abs().max((x1[1] - x0[1]).abs());
    if extent == 0.0 {
        return Ok(GridOracleResult {
            distance: 0.0,
            metrication_factor: 1.0,
            metrication_bound: 0.0,
        });
    }
    let (dlo, dhi) = domain.bounding_box();
    let lo = [0, 1].map(|k| (x0[k].min(x1[k]) - 0.5 * extent).max(dlo[k]));
    let hi = [0, 1].map(|k| (x0[k].max(x1[k]) + 0.5 * extent).min(dhi[k]));
    let n = params.resolution as f64;
    // per-axis spacing with both endpoints on lattice nodes
    let nominal = (hi[0] - lo[0]).max(hi[1] - lo[1]) / (n - 1.0);
    let spacing = [0, 1].map(|k| {
        let gap = (x1[k] - x0[k]).abs();
        if gap == 0.0 {
            nominal
        } else {
            gap / (gap / nominal).round().max(1.0)
        }
    });
    // node (i, j) sits at x0 + (i - i0, j - j0) * spacing
    let below = [0, 1].map(|k| ((x0[k] - lo[k]) / spacing[k]).floor() as i64);
    let above = [0, 1].map(|k| ((hi[k] - x0[k]) / spacing[k]).floor() as i64);
    let dims = [0, 1].map(|k| (below[k] + above[k] + 1) as usize);
    let at = |i: usize, j: usize| {
        [
            x0[0] + (i as i64 - below[0]) as f64 * spacing[0],
            x0[1] + (j as i64 - below[1]) as f64 * spacing[1],
        ]
    };
    let node_of = |x: &[f64]| {
        let i = below[0] + ((x[0] - x0[0]) / spacing[0]).round() as i64;
        let j = below[1] + ((x[1] - x0[1]) / spacing[1]).round() as i64;
        (i as usize) * dims[1] + j as usize
    };
    let total = dims[0] * dims[1];
    let weights: Vec<f64> = (0..total)
        .map(|id| {
            let p = at(id / dims[1], id % dims[1]);
            if domain.contains(&p) {
                w.eval(&p).unwrap_or(f64::INFINITY)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let offsets: Vec<(i64, i64, f64)> = params
        .neighborhood
        .offsets()
        .into_iter()
        .map(|(di, dj)| (di, dj, norm.norm(&[di as f64 * spacing[0], dj as f64 * spacing[1]])))
        .collect();
    let (source, target) = (node_of(x0), node_of(x1));
    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, id)) = heap.pop() {
        if id == target {
            break;
        }
        if d > dist[id] {
            continue;
        }
        let (i, j) = ((id / dims[1]) as i64, (id % dims[1]) as i64);
        for &(di, dj, len) in &offsets {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= dims[0] as i64 || nj >= dims[1] as i64 {
                continue;
            }
            let nid = ni as usize * dims[1] + nj as usize;
            let cost = 0.5 * (weights[id] + weights[nid]) * len;
            if !cost.is_finite() {
                continue;
            }
            if d + cost < dist[nid] {
                dist[nid] = d + cost;
                heap.push(Entry(d + cost, nid));
            }
        }
    }
    let distance = dist[target];
    if !distance.is_finite() {
        return Err(Error::InvalidInput("endpoints are not connected on the lattice".into()));
    }
    let factor = metrication_factor(norm, spacing[0], spacing[1], params.neighborhood);
    Ok(GridOracleResult {
        distance,
        metrication_factor: factor,
        metrication_bound: (factor - 1.0) * distance,
    })
}
