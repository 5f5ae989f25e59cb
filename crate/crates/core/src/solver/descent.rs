//! Derivative-free descent of the weighted length of a straight-edge graph
//! over its free vertices.
//!
//! Each free vertex carries its own step size. A sweep probes every active
//! vertex along the coordinate axes and two random directions, moves it to the
//! best probe when that gives sufficient decrease, and grows or shrinks the
//! step accordingly. Once every step is below the tolerance, a final probe at
//! the tolerance itself certifies stationarity or reactivates vertices.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::norm::NormSpec;
use crate::numeric::GAUSS_LEGENDRE_8;
use crate::weight::WeightField;

pub(crate) struct Problem<'a> {
    pub norm: &'a NormSpec,
    pub weight: &'a WeightField,
    /// Descent is confined to the ball `B(anchor, radius)`.
    pub anchor: &'a [f64],
    pub radius: f64,
}

impl Problem<'_> {
    /// `||b - a|| int_0^1 w(a + t (b - a)) dt`, or `inf` if the edge leaves
    /// the weight's domain.
    pub fn edge_cost(&self, a: &[f64], b: &[f64], buf: &mut [f64]) -> f64 {
        let len = self.norm.dist(a, b);
        if let crate::weight::WeightKind::Constant { c } = self.weight.kind() {
            return c * len;
        }
        let mut acc = 0.0;
        for &(node, wt) in &GAUSS_LEGENDRE_8 {
            let t = 0.5 * (node + 1.0);
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = a[k] + t * (b[k] - a[k]);
            }
            match self.weight.eval(buf) {
                Ok(w) => acc += 0.5 * wt * w,
                Err(_) => return f64::INFINITY,
            }
        }
        len * acc
    }

    fn admissible(&self, x: &[f64]) -> bool {
        self.norm.dist(x, self.anchor) <= self.radius && self.weight.eval(x).is_ok()
    }
}

pub(crate) struct Graph {
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
    pub free: Vec<bool>,
}

impl Graph {
    pub fn objective(&self, problem: &Problem) -> f64 {
        let mut buf = vec![0.0; problem.norm.dim()];
        self.edges
            .iter()
            .map(|&[i, j]| problem.edge_cost(&self.vertices[i], &self.vertices[j], &mut buf))
            .sum()
    }

    /// Inserts the midpoint of every edge as a new free vertex.
    pub fn refine(&mut self) {
        let old = std::mem::take(&mut self.edges);
        for [i, j] in old {
            let m = crate::numeric::midpoint(&self.vertices[i], &self.vertices[j]);
            self.vertices.push(m);
            self.free.push(true);
            let k = self.vertices.len() - 1;
            self.edges.push([i, k]);
            self.edges.push([k, j]);
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Outcome {
    pub sweeps: usize,
    pub converged: bool,
    /// Probes at the final tolerance were rejected for leaving the domain.
    pub blocked_by_domain: bool,
}

pub(crate) struct Settings {
    pub initial_step: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

/// Runs the descent in place.
pub(crate) fn descend(problem: &Problem, graph: &mut Graph, settings: &Settings, rng: &mut ChaCha8Rng) -> Outcome {
    let n = graph.vertices.len();
    let dim = problem.norm.dim();
    let mut incident = vec![Vec::new(); n];
    for (e, &[i, j]) in graph.edges.iter().enumerate() {
        incident[i].push(e);
        incident[j].push(e);
    }
    let mut buf = vec![0.0; dim];
    let mut costs: Vec<f64> = graph
        .edges
        .iter()
        .map(|&[i, j]| problem.edge_cost(&graph.vertices[i], &graph.vertices[j], &mut buf))
        .collect();
    let tol = settings.tolerance;
    let mut steps: Vec<f64> = graph
        .free
        .iter()
        .map(|&f| if f { settings.initial_step.max(tol) } else { 0.0 })
        .collect();
    let max_step = 4.0 * settings.initial_step.max(tol);
    let mut outcome = Outcome::default();
    let mut candidate = vec![0.0; dim];
    let mut new_costs: Vec<f64> = Vec::new();

    // cost change of moving v to `to`, with the new incident edge costs
    let local_change = |graph: &Graph, costs: &[f64], v: usize, to: &[f64], buf: &mut [f64], out: &mut Vec<f64>| {
        out.clear();
        let mut delta = 0.0;
        let mut old = 0.0;
        for &e in &incident[v] {
            let [i, j] = graph.edges[e];
            let other = if i == v { j } else { i };
            let c = problem.edge_cost(to, &graph.vertices[other], buf);
            out.push(c);
            delta += c - costs[e];
            old += costs[e];
        }
        (delta, old)
    };

    while outcome.sweeps < settings.max_sweeps {
        outcome.sweeps += 1;
        let mut active = false;
        for v in 0..n {
            if !graph.free[v] || steps[v] < tol {
                continue;
            }
            active = true;
            let s = steps[v];
            let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
            let mut local_old = 0.0;
            for dir in probe_directions(dim, rng) {
                for k in 0..dim {
                    candidate[k] = graph.vertices[v][k] + s * dir[k];
                }
                if !problem.admissible(&candidate) {
                    continue;
                }
                let (delta, old) = local_change(graph, &costs, v, &candidate, &mut buf, &mut new_costs);
                local_old = old;
                if best.as_ref().is_none_or(|b| delta < b.0) {
                    best = Some((delta, candidate.clone(), new_costs.clone()));
                }
            }
            let threshold = 1e-14 * local_old.abs()
                + 1e-6 * s * s * local_old.abs()
                    / local_length(graph, &incident[v], problem.norm)
                        .powi(2)
                        .max(f64::MIN_POSITIVE);
            match best {
                Some((delta, to, new)) if delta < -threshold => {
                    graph.vertices[v] = to;
                    for (slot, &e) in new.iter().zip(&incident[v]) {
                        costs[e] = *slot;
                    }
                    steps[v] = (1.5 * s).min(max_step);
                    wake_neighbours(graph, &incident[v], v, &mut steps, s);
                }
                _ => steps[v] = 0.5 * s,
            }
        }
        if active {
            continue;
        }
        // every step is below tolerance: certify with probes of size tol
        let mut moved = false;
        outcome.blocked_by_domain = false;
        for v in 0..n {
            if !graph.free[v] {
                continue;
            }
            for dir in axis_directions(dim) {
                for k in 0..dim {
                    candidate[k] = graph.vertices[v][k] + tol * dir[k];
                }
                if !problem.admissible(&candidate) {
                    outcome.blocked_by_domain = true;
                    continue;
                }
                let (delta, old) = local_change(graph, &costs, v, &candidate, &mut buf, &mut new_costs);
                if delta < -1e-14 * old.abs() {
                    graph.vertices[v] = candidate.clone();
                    for (slot, &e) in new_costs.iter().zip(&incident[v]) {
                        costs[e] = *slot;
                    }
                    steps[v] = 2.0 * tol;
                    wake_neighbours(graph, &incident[v], v, &mut steps, 2.0 * tol);
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            outcome.converged = true;
            break;
        }
    }
    outcome
}

fn wake_neighbours(graph: &Graph, incident: &[usize], v: usize, steps: &mut [f64], floor: f64) {
    for &e in incident {
        let [i, j] = graph.edges[e];
        let other = if i == v { j } else { i };
        if graph.free[other] {
            steps[other] = steps[other].max(floor);
        }
    }
}

fn local_length(graph: &Graph, incident: &[usize], norm: &NormSpec) -> f64 {
    incident
        .iter()
        .map(|&e| {
            let [i, j] = graph.edges[e];
            norm.dist(&graph.vertices[i], &graph.vertices[j])
        })
        .sum()
}

fn axis_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[k] = sign;
            out.push(d);
        }
    }
    out
}

/// The `2 dim` axis directions and a random direction with its opposite.
fn probe_directions(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = axis_directions(dim);
    let r = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = crate::numeric::euclid(&v);
        if len > 1e-3 && len <= 1.0 {
            break v.into_iter().map(|x| x / len).collect::<Vec<f64>>();
        }
    };
    out.push(r.iter().map(|x| -x).collect());
    out.push(r);
    out
}
