//! Steiner networks on 3 or 4 terminals by topology enumeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::descent::{Graph, Problem};
use super::{check_point, run_levels, weighted_length, SolveFlags, SolveParams};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::norm::NormSpec;
use crate::weight::WeightField;

/// A Steiner point this close to a terminal is merged into it.
const MERGE_TOL: f64 = 1e-7;

/// Objectives this close are ties, broken by vertex order.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SteinerResult {
    pub network: Network,
    pub objective: f64,
    pub iterations: usize,
    pub flags: SolveFlags,
    /// Label of the winning topology, e.g. `spider` or `path 1-0-2`.
    pub topology: String,
}

/// Combinatorial skeleton: terminals are vertices `0..n`, Steiner points follow.
struct Topology {
    label: String,
    steiner: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

fn centroid(points: &[&Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64)
        .collect()
}

fn topologies(t: &[Vec<f64>]) -> Vec<Topology> {
    let n = t.len();
    let mut out = Vec::new();
    let all: Vec<&Vec<f64>> = t.iter().collect();
    out.push(Topology {
        label: "spider".into(),
        steiner: vec![centroid(&all)],
        edges: (0..n).map(|i| [n, i]).collect(),
    });
    if n == 4 {
        for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
            let m1 = centroid(&[&t[a], &t[b]]);
            let m2 = centroid(&[&t[c], &t[d]]);
            let s1 = crate::numeric::lerp(&m1, &m2, 0.25);
            let s2 = crate::numeric::lerp(&m1, &m2, 0.75);
            out.push(Topology {
                label: format!("double-y {a}{b}|{c}{d}"),
                steiner: vec![s1, s2],
                edges: vec![[4, a], [4, b], [5, c], [5, d], [4, 5]],
            });
        }
        // a hub over three terminals, the fourth hanging from its nearest one
        for leaf in 0..4 {
            let rest: Vec<usize> = (0..4).filter(|&i| i != leaf).collect();
            let nearest = *rest
                .iter()
                .min_by(|&&i, &&j| {
                    crate::numeric::euclid_dist(&t[leaf], &t[i])
                        .total_cmp(&crate::numeric::euclid_dist(&t[leaf], &t[j]))
                })
                .unwrap_or(&rest[0]);
            let pts: Vec<&Vec<f64>> = rest.iter().map(|&i| &t[i]).collect();
            let mut edges: Vec<[usize; 2]> = rest.iter().map(|&i| [4, i]).collect();
            edges.push([nearest, leaf]);
            out.push(Topology {
                label: format!("spider {}{}{} + {nearest}-{leaf}", rest[0], rest[1], rest[2]),
                steiner: vec![centroid(&pts)],
                edges,
            });
        }
    }
    for order in paths(n) {
        let edges = order.windows(2).map(|w| [w[0], w[1]]).collect();
        let label = order.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("-");
        out.push(Topology {
            label: format!("path {label}"),
            steiner: Vec::new(),
            edges,
        });
    }
    out
}

/// Hamiltonian paths on `0..n`, each listed once (first index < last index).
fn paths(n: usize) -> Vec<Vec<usize>> {
    fn permute(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            if prefix[0] < prefix[n - 1] {
                out.push(prefix.clone());
            }
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                permute(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    permute(&mut Vec::new(), n, &mut out);
    out
}

struct Candidate {
    network: Network,
    objective: f64,
    iterations: usize,
    flags: SolveFlags,
    label: String,
}

/// Best network over the enumerated topologies for 3 or 4 terminals.
pub fn steiner_solve(
    terminals: &[Vec<f64>],
    weight: &WeightField,
    norm: &NormSpec,
    params: &SolveParams,
) -> Result<SteinerResult> {
    params.validate()?;
    if !(3..=4).contains(&terminals.len()) {
        return Err(Error::InvalidInput(format!(
            "steiner_solve takes 3 or 4 terminals, got {}",
            terminals.len()
        )));
    }
    let w = weight.clone().in_norm(norm);
    for (i, t) in terminals.iter().enumerate() {
        check_point(norm, &w, t)?;
        if terminals[..i].iter().any(|s| norm.dist(s, t) == 0.0) {
            return Err(Error::InvalidInput("terminals must be distinct".into()));
        }
    }
    let tops = topologies(terminals);
    let candidates: Vec<Option<Candidate>> = tops
        .par_iter()
        .enumerate()
        .map(|(i, top)| solve_topology(terminals, top, &w, norm, params, params.seed.wrapping_add(i as u64)).ok())
        .collect();
    let mut best: Option<Candidate> = None;
    for c in candidates.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => {
                c.objective < b.objective - TIE_TOL
                    || ((c.objective - b.objective).abs() <= TIE_TOL
                        && lex_less(c.network.vertices(), b.network.vertices()))
            }
        };
        if better {
            best = Some(c);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidInput("no topology produced a valid network".into()))?;
    Ok(SteinerResult {
        network: best.network,
        objective: best.objective,
        iterations: best.iterations,
        flags: best.flags,
        topology: best.label,
    })
}

fn lex_less(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    let flat = |v: &[Vec<f64>]| v.iter().flatten().copied().collect::<Vec<f64>>();
    flat(a)
        .iter()
        .zip(flat(b).iter())
        .find(|(x, y)| x != y)
        .map_or(a.len() < b.len(), |(x, y)| x < y)
}

fn solve_topology(
    terminals: &[Vec<f64>],
    top: &Topology,
    w: &WeightField,
    norm: &NormSpec,
    params: &SolveParams,
    seed: u64,
) -> Result<Candidate> {
    let n = terminals.len();
    let mut vertices: Vec<Vec<f64>> = terminals.to_vec();
    vertices.extend(top.steiner.iter().cloned());
    let mut free: Vec<bool> = (0..vertices.len()).map(|i| i >= n).collect();
    let mut edges = Vec::new();
    let segments = if w.is_constant() { 1 } else { params.initial_segments };
    for &[a, b] in &top.edges {
        // subdivide each topological edge into a chain of free vertices
        let mut prev = a;
        for s in 1..segments {
            vertices.push(crate::numeric::lerp(
                &vertices[a],
                &vertices[b],
                s as f64 / segments as f64,
            ));
            free.push(true);
            let k = vertices.len() - 1;
            edges.push([prev, k]);
            prev = k;
        }
        edges.push([prev, b]);
    }
    let mut graph = Graph { vertices, edges, free };
    let unbounded = Problem {
        norm,
        weight: w,
        anchor: &terminals[0],
        radius: f64::INFINITY,
    };
    let initial = graph.objective(&unbounded);
    let problem = Problem {
        radius: (1.0 + initial) / w.bounds().lower(),
        ..unbounded
    };
    let scale = terminals
        .iter()
        .map(|t| norm.dist(t, &terminals[0]))
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rounds = if w.is_constant() {
        SolveParams {
            refine_rounds: 0,
            ..*params
        }
    } else {
        *params
    };
    let (iterations, flags) = run_levels(&problem, &mut graph, &rounds, scale / segments as f64, &mut rng);
    let network = collapse(graph, n, norm)?;
    let objective = weighted_length(&network, w)?;
    Ok(Candidate {
        network,
        objective,
        iterations,
        flags,
        label: top.label.clone(),
    })
}

/// Contracts edges shorter than the merge tolerance that have a free end,
/// then builds and validates the network.
fn collapse(graph: Graph, terminals: usize, norm: &NormSpec) -> Result<Network> {
    let Graph {
        mut vertices,
        edges,
        free,
    } = graph;
    let mut target: Vec<usize> = (0..vertices.len()).collect();
    fn root(target: &mut [usize], mut v: usize) -> usize {
        while target[v] != v {
            target[v] = target[target[v]];
            v = target[v];
        }
        v
    }
    for &[i, j] in &edges {
        let (ri, rj) = (root(&mut target, i), root(&mut target, j));
        if ri == rj || norm.dist(&vertices[ri], &vertices[rj]) >= MERGE_TOL {
            continue;
        }
        match (free[ri], free[rj]) {
            (true, _) => target[ri] = rj,
            (false, true) => target[rj] = ri,
            (false, false) => {}
        }
    }
    let mut index = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for v in 0..vertices.len() {
        if root(&mut target, v) == v {
            index[v] = kept.len();
            kept.push(std::mem::take(&mut vertices[v]));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut new_edges = Vec::new();
    for &[i, j] in &edges {
        let (a, b) = (index[root(&mut target, i)], index[root(&mut target, j)]);
        if a != b && seen.insert((a.min(b), a.max(b))) {
            new_edges.push([a, b]);
        }
    }
    let terms = (0..terminals).map(|t| index[root(&mut target, t)]).collect();
    Network::new(kept, new_edges, terms, norm.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{density_ratio, SegmentSet};

    fn e2() -> NormSpec {
        NormSpec::euclidean(2).unwrap()
    }

    #[test]
    fn topology_counts() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(topologies(&tri).len(), 4);
        let quad = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        assert_eq!(topologies(&quad).len(), 1 + 3 + 4 + 12);
    }

    #[test]
    fn fermat_network() {
        let h = 3f64.sqrt() / 2.0;
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        let w = WeightField::constant(1.0).unwrap();
        let r = steiner_solve(&tri, &w, &e2(), &SolveParams::default()).unwrap();
        assert!((r.objective - 3f64.sqrt()).abs() < 1e-4, "{}", r.objective);
        assert_eq!(r.topology, "spider");
        let hub = r
            .network
            .vertices()
            .iter()
            .position(|_| true)
            .map(|_| r.network.vertices()[3].clone())
            .unwrap();
        let theta = density_ratio(&r.network, &hub, 0.01, None).unwrap();
        assert!((theta - 1.5).abs() < 1e-6);
    }

    #[test]
    fn collinear_terminals_give_the_covering_segment() {
        let l3 = NormSpec::lp(3.0, 2).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![0.4, 0.0], vec![1.0, 0.0]];
        let w = WeightField::constant(1.0).unwrap();
        let r = steiner_solve(&pts, &w, &l3, &SolveParams::default()).unwrap();
        assert_eq!(r.objective, 1.0);
        assert_eq!(r.network.length(), 1.0);
    }

    #[test]
    fn unit_square() {
        let sq = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let w = WeightField::constant(1.0).unwrap();
        let r = steiner_solve(&sq, &w, &e2(), &SolveParams::default()).unwrap();
        assert!(
            (r.objective - (1.0 + 3f64.sqrt())).abs() < 1e-3,
            "{} {}",
            r.objective,
            r.topology
        );
        assert!(r.topology.starts_with("double-y"));
        assert_eq!(r.network.terminals().len(), 4);
    }
}
