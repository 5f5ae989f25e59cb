//! Minimizers of weighted length: two-terminal geodesics, small Steiner
//! networks, and a lattice shortest-path oracle for cross-checking.

mod descent;
mod grid;
mod steiner;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Polyline, SegmentSet};
use crate::norm::NormSpec;
use crate::weight::WeightField;

pub use grid::{grid_oracle, metrication_factor, GridOracleParams, GridOracleResult, Neighborhood};
pub use steiner::{steiner_solve, SteinerResult};

use descent::{descend, Graph, Problem, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    /// Segments per edge before refinement.
    pub initial_segments: usize,
    /// Number of midpoint refinements, each followed by a new descent.
    pub refine_rounds: usize,
    /// Probe size at which the final iterate must be stationary.
    pub step_tolerance: f64,
    /// Sweep budget per refinement level.
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            initial_segments: 8,
            refine_rounds: 2,
            step_tolerance: 1e-6,
            max_iters: 200_000,
            seed: 42,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        if self.initial_segments == 0 || !(self.step_tolerance > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidInput(
                "solve params need initial_segments >= 1, step_tolerance > 0 and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveFlags {
    /// The sweep budget ran out before the stationarity test passed.
    pub non_converged: bool,
    /// Stationarity probes were blocked by the domain boundary or the
    /// confinement ball.
    pub domain_exit: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicResult {
    pub polyline: Polyline,
    pub objective: f64,
    pub iterations: usize,
    pub flags: SolveFlags,
}

/// Weighted length `int_C w dH^1`, each edge by 8-point Gauss-Legendre.
pub fn weighted_length(set: &dyn SegmentSet, weight: &WeightField) -> Result<f64> {
    let w = weight.clone().in_norm(set.norm());
    let mut buf = vec![0.0; set.norm().dim()];
    let problem = Problem {
        norm: set.norm(),
        weight: &w,
        anchor: &[],
        radius: f64::INFINITY,
    };
    let mut total = 0.0;
    for (a, b) in set.segments() {
        let c = problem.edge_cost(a, b, &mut buf);
        if !c.is_finite() {
            return Err(Error::OutsideDomain(0.0));
        }
        total += c;
    }
    Ok(total)
}

pub(crate) fn check_point(norm: &NormSpec, weight: &WeightField, x: &[f64]) -> Result<()> {
    if x.len() != norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            got: x.len(),
        });
    }
    weight.eval(x).map(|_| ())
}

/// Weighted geodesic from `x0` to `x1` by multilevel polyline descent.
pub fn geodesic_solve(
    x0: &[f64],
    x1: &[f64],
    weight: &WeightField,
    norm: &NormSpec,
    params: &SolveParams,
) -> Result<GeodesicResult> {
    params.validate()?;
    let w = weight.clone().in_norm(norm);
    check_point(norm, &w, x0)?;
    check_point(norm, &w, x1)?;
    let span = norm.dist(x0, x1);
    if span == 0.0 {
        return Err(Error::InvalidInput("geodesic endpoints coincide".into()));
    }
    let k = params.initial_segments;
    let vertices: Vec<Vec<f64>> = (0..=k)
        .map(|i| crate::numeric::lerp(x0, x1, i as f64 / k as f64))
        .collect();
    let free = (0..=k).map(|i| i != 0 && i != k).collect();
    let edges = (1..=k).map(|i| [i - 1, i]).collect();
    let mut graph = Graph { vertices, edges, free };

    let unbounded = Problem {
        norm,
        weight: &w,
        anchor: x0,
        radius: f64::INFINITY,
    };
    let initial = graph.objective(&unbounded);
    // a competitor leaving B(x0, R) costs more than the initial guess
    let radius = (1.0 + initial) / w.bounds().lower();
    let problem = Problem { radius, ..unbounded };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (iterations, flags) = run_levels(&problem, &mut graph, params, span / k as f64, &mut rng);
    let polyline = Polyline::new(chain_order(&graph, k), norm.clone())?;
    let objective = weighted_length(&polyline, &w)?;
    Ok(GeodesicResult {
        polyline,
        objective,
        iterations,
        flags,
    })
}

/// Descends, refines and descends again `refine_rounds` times.
pub(crate) fn run_levels(
    problem: &Problem,
    graph: &mut Graph,
    params: &SolveParams,
    segment: f64,
    rng: &mut ChaCha8Rng,
) -> (usize, SolveFlags) {
    let mut flags = SolveFlags::default();
    let mut iterations = 0;
    let mut seg = segment;
    for round in 0..=params.refine_rounds {
        if round > 0 {
            graph.refine();
            seg *= 0.5;
        }
        let settings = Settings {
            initial_step: 0.25 * seg,
            tolerance: params.step_tolerance,
            max_sweeps: params.max_iters,
        };
        let out = descend(problem, graph, &settings, rng);
        iterations += out.sweeps;
        flags.non_converged = !out.converged;
        flags.domain_exit = out.blocked_by_domain;
    }
    (iterations, flags)
}

/// Vertices of a path graph from vertex 0 to vertex `last`, in order.
fn chain_order(graph: &Graph, last: usize) -> Vec<Vec<f64>> {
    let n = graph.vertices.len();
    let mut adj = vec![Vec::new(); n];
    for &[i, j] in &graph.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut order = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    while cur != last {
        let next = adj[cur].iter().copied().find(|&x| x != prev).unwrap_or(last);
        prev = cur;
        cur = next;
        order.push(cur);
    }
    order.into_iter().map(|i| graph.vertices[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::hausdorff_distance;
    use crate::weight::Domain;

    fn e2() -> NormSpec {
        NormSpec::euclidean(2).unwrap()
    }

    #[test]
    fn unit_weight_gives_the_segment() {
        let l3 = NormSpec::lp(3.0, 2).unwrap();
        let w = WeightField::constant(1.0).unwrap();
        let r = geodesic_solve(&[0.0, 0.0], &[1.0, 0.0], &w, &l3, &SolveParams::default()).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-6);
        let seg = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], l3).unwrap();
        assert!(hausdorff_distance(&r.polyline, &seg).unwrap() < 1e-4);
        assert!(!r.flags.non_converged);
    }

    #[test]
    fn vertical_hyperbolic_geodesic() {
        let win = Domain::half_plane_window(10.0, 100.0, e2()).unwrap();
        let w = WeightField::inverse_boundary_distance(win).unwrap();
        let e = std::f64::consts::E;
        let r = geodesic_solve(&[0.0, 1.0], &[0.0, e], &w, &e2(), &SolveParams::default()).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-3, "{}", r.objective);
        assert!(r.polyline.points().iter().all(|p| p[0].abs() < 1e-4));
    }

    #[test]
    fn horizontal_hyperbolic_geodesic() {
        let win = Domain::half_plane_window(10.0, 100.0, e2()).unwrap();
        let w = WeightField::inverse_boundary_distance(win).unwrap();
        let r = geodesic_solve(&[-1.0, 1.0], &[1.0, 1.0], &w, &e2(), &SolveParams::default()).unwrap();
        let exact = 3f64.acosh();
        assert!((r.objective - exact).abs() < 0.01 * exact, "{}", r.objective);
        // the geodesic is the circle of radius sqrt(2) about the origin
        let top = r.polyline.points().iter().map(|p| p[1]).fold(0.0, f64::max);
        assert!((top - 2f64.sqrt()).abs() < 1e-3, "{top}");
    }

    #[test]
    fn rejects_bad_input() {
        let w = WeightField::constant(1.0).unwrap();
        assert!(geodesic_solve(&[0.0, 0.0], &[0.0, 0.0], &w, &e2(), &SolveParams::default()).is_err());
        let win = Domain::half_plane_window(10.0, 100.0, e2()).unwrap();
        let q = WeightField::inverse_boundary_distance(win).unwrap();
        assert!(geodesic_solve(&[0.0, -1.0], &[0.0, 1.0], &q, &e2(), &SolveParams::default()).is_err());
    }
}
