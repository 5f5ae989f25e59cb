//! Polyhedral networks and polylines, and the geometric functionals used by
//! the regularity checks: length, ball traces, density ratios, Hausdorff
//! distance, spider competitors and tangent oscillation.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_domain, Error, Result};
use crate::gauge::Gauge;
use crate::norm::NormSpec;
use crate::numeric::{bisect, golden_min, lerp};

/// Two trace points closer than this are the same point.
pub const TRACE_DEDUP: f64 = 1e-9;

/// A point farther than this from a network is not on it.
pub const ON_NETWORK_TOL: f64 = 1e-9;

/// Anything made of straight segments in a common norm.
pub trait SegmentSet {
    fn norm(&self) -> &NormSpec;
    fn segments(&self) -> Vec<(&[f64], &[f64])>;

    /// Total length, double-counting nothing since overlaps are rejected.
    fn length(&self) -> f64 {
        let n = self.norm();
        self.segments().iter().map(|(a, b)| n.dist(a, b)).sum()
    }

    /// Distance from `x` to the set.
    fn distance_to(&self, x: &[f64]) -> f64 {
        let n = self.norm();
        self.segments()
            .iter()
            .map(|(a, b)| point_segment_distance(n, x, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A finite graph of straight edges with some vertices flagged as terminals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr")]
pub struct Network {
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    terminals: Vec<usize>,
    norm: NormSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRepr {
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    terminals: Vec<usize>,
    norm: NormSpec,
}

impl TryFrom<NetworkRepr> for Network {
    type Error = Error;
    fn try_from(r: NetworkRepr) -> Result<Self> {
        Network::new(r.vertices, r.edges, r.terminals, r.norm)
    }
}

impl Network {
    /// Validates connectivity, edge sanity and the absence of overlapping edges.
    pub fn new(vertices: Vec<Vec<f64>>, edges: Vec<[usize; 2]>, terminals: Vec<usize>, norm: NormSpec) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        if vertices.is_empty() {
            return bad("no vertices".into());
        }
        for v in &vertices {
            if v.len() != norm.dim() {
                return Err(Error::DimensionMismatch {
                    expected: norm.dim(),
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad("non-finite coordinate".into());
            }
        }
        let n = vertices.len();
        let mut seen = std::collections::BTreeSet::new();
        for &[i, j] in &edges {
            if i >= n || j >= n {
                return bad(format!("edge ({i}, {j}) references a missing vertex"));
            }
            if norm.dist(&vertices[i], &vertices[j]) == 0.0 {
                return bad(format!("edge ({i}, {j}) has zero length"));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return bad(format!("duplicate edge ({i}, {j})"));
            }
        }
        if let Some(&t) = terminals.iter().find(|&&t| t >= n) {
            return bad(format!("terminal {t} references a missing vertex"));
        }
        if !connected(n, &edges) {
            return bad("graph is not connected".into());
        }
        for (a, e) in edges.iter().enumerate() {
            for f in &edges[a + 1..] {
                if collinear_overlap(&vertices[e[0]], &vertices[e[1]], &vertices[f[0]], &vertices[f[1]]) {
                    return bad(format!("edges {e:?} and {f:?} overlap along a segment"));
                }
            }
        }
        let mut terminals = terminals;
        terminals.sort_unstable();
        terminals.dedup();
        Ok(Self {
            vertices,
            edges,
            terminals,
            norm,
        })
    }

    /// The path through `points` in order, with both ends as terminals.
    pub fn path(points: Vec<Vec<f64>>, norm: NormSpec) -> Result<Self> {
        let n = points.len();
        let edges = (1..n).map(|i| [i - 1, i]).collect();
        Self::new(points, edges, vec![0, n.saturating_sub(1)], norm)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e[0] == v || e[1] == v).count()
    }

    /// Index of a vertex within `tol` of `x`.
    pub fn find_vertex(&self, x: &[f64], tol: f64) -> Option<usize> {
        self.vertices.iter().position(|v| self.norm.dist(v, x) <= tol)
    }
}

impl SegmentSet for Network {
    fn norm(&self) -> &NormSpec {
        &self.norm
    }

    fn segments(&self) -> Vec<(&[f64], &[f64])> {
        self.edges
            .iter()
            .map(|&[i, j]| (self.vertices[i].as_slice(), self.vertices[j].as_slice()))
            .collect()
    }
}

fn connected(n: usize, edges: &[[usize; 2]]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &[i, j] in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Whether segments `[a, b]` and `[c, d]` share a piece of positive length.
fn collinear_overlap(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let dir = crate::numeric::sub(b, a);
    let len2 = crate::numeric::dot(&dir, &dir);
    let scale = len2.sqrt();
    // perpendicular distance of a point to the line through a, b
    let off_line = |p: &[f64]| {
        let w = crate::numeric::sub(p, a);
        let t = crate::numeric::dot(&w, &dir) / len2;
        let perp: Vec<f64> = w.iter().zip(&dir).map(|(wi, di)| wi - t * di).collect();
        (crate::numeric::euclid(&perp), t)
    };
    let (dc, tc) = off_line(c);
    let (dd, td) = off_line(d);
    let tol = 1e-12 * scale.max(1.0);
    if dc > tol || dd > tol {
        return false;
    }
    let (lo, hi) = (tc.min(td), tc.max(td));
    hi.min(1.0) - lo.max(0.0) > 1e-12
}

/// An ordered chain of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolylineRepr")]
pub struct Polyline {
    points: Vec<Vec<f64>>,
    norm: NormSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolylineRepr {
    points: Vec<Vec<f64>>,
    norm: NormSpec,
}

impl TryFrom<PolylineRepr> for Polyline {
    type Error = Error;
    fn try_from(r: PolylineRepr) -> Result<Self> {
        Polyline::new(r.points, r.norm)
    }
}

impl Polyline {
    pub fn new(points: Vec<Vec<f64>>, norm: NormSpec) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidNetwork("a polyline needs at least 2 points".into()));
        }
        for p in &points {
            if p.len() != norm.dim() {
                return Err(Error::DimensionMismatch {
                    expected: norm.dim(),
                    got: p.len(),
                });
            }
        }
        if points.windows(2).any(|w| norm.dist(&w[0], &w[1]) == 0.0) {
            return Err(Error::InvalidNetwork("consecutive polyline points coincide".into()));
        }
        Ok(Self { points, norm })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Cumulative arclength at each point.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.points.len());
        s.push(0.0);
        for w in self.points.windows(2) {
            let last = *s.last().unwrap_or(&0.0);
            s.push(last + self.norm.dist(&w[0], &w[1]));
        }
        s
    }

    /// Point at arclength `s`, clamped to the curve.
    pub fn point_at(&self, cumulative: &[f64], s: f64) -> Vec<f64> {
        let total = *cumulative.last().unwrap_or(&0.0);
        let s = s.clamp(0.0, total);
        let k = cumulative.partition_point(|&c| c <= s).clamp(1, self.points.len() - 1);
        let (s0, s1) = (cumulative[k - 1], cumulative[k]);
        lerp(&self.points[k - 1], &self.points[k], (s - s0) / (s1 - s0))
    }

    /// Splits every segment at its midpoint.
    pub fn refined(&self) -> Polyline {
        let mut pts = Vec::with_capacity(2 * self.points.len() - 1);
        for w in self.points.windows(2) {
            pts.push(w[0].clone());
            pts.push(crate::numeric::midpoint(&w[0], &w[1]));
        }
        pts.push(self.points[self.points.len() - 1].clone());
        Polyline {
            points: pts,
            norm: self.norm.clone(),
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        Network::path(self.points.clone(), self.norm.clone())
    }
}

impl SegmentSet for Polyline {
    fn norm(&self) -> &NormSpec {
        &self.norm
    }

    fn segments(&self) -> Vec<(&[f64], &[f64])> {
        self.points
            .windows(2)
            .map(|w| (w[0].as_slice(), w[1].as_slice()))
            .collect()
    }
}

/// Closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
    norm: NormSpec,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64, norm: NormSpec) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(out_of_domain("radius", radius, "(0, inf)"));
        }
        if center.len() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                got: center.len(),
            });
        }
        Ok(Self { center, radius, norm })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.norm.dist(x, &self.center) <= self.radius
    }

    /// Parameters `0 <= t_lo <= t_hi <= 1` with `a + t (b - a)` in the ball,
    /// or `None` when the segment misses it.
    fn sublevel(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
        let r = self.radius;
        let f = |t: f64| {
            self.norm
                .norm_with(a.len(), |i| a[i] + t * (b[i] - a[i]) - self.center[i])
        };
        let (t_min, f_min) = golden_min(f, 0.0, 1.0, 1e-13);
        if f_min > r + 1e-12 * r.max(1.0) {
            return None;
        }
        if f_min >= r - 1e-12 * r.max(1.0) {
            return Some((t_min, t_min));
        }
        let g = |t: f64| f(t) - r;
        let lo = if f(0.0) <= r { 0.0 } else { bisect(g, 0.0, t_min, 1e-15) };
        let hi = if f(1.0) <= r { 1.0 } else { bisect(g, t_min, 1.0, 1e-15) };
        Some((lo, hi))
    }
}

fn check_norms(set: &dyn SegmentSet, norm: &NormSpec) -> Result<()> {
    if set.norm() != norm {
        return Err(Error::NormMismatch);
    }
    Ok(())
}

/// Points of the set on the sphere `||z - center|| = radius`, deduplicated.
pub fn ball_trace(set: &dyn SegmentSet, ball: &Ball) -> Result<Vec<Vec<f64>>> {
    check_norms(set, &ball.norm)?;
    let n = set.norm();
    let r = ball.radius;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |p: Vec<f64>| {
        if !out.iter().any(|q| n.dist(q, &p) < TRACE_DEDUP) {
            out.push(p);
        }
    };
    for (a, b) in set.segments() {
        let Some((lo, hi)) = ball.sublevel(a, b) else {
            continue;
        };
        if lo == hi {
            push(lerp(a, b, lo));
            continue;
        }
        // an end of the interval is a trace point unless it is a segment end strictly inside
        for t in [lo, hi] {
            let p = lerp(a, b, t);
            if (t > 0.0 && t < 1.0) || n.dist(&p, &ball.center) >= r * (1.0 - 1e-12) {
                push(p);
            }
        }
    }
    Ok(out)
}

/// `H^1(C intersect B)`.
pub fn length_in_ball(set: &dyn SegmentSet, ball: &Ball) -> Result<f64> {
    check_norms(set, &ball.norm)?;
    let n = set.norm();
    Ok(set
        .segments()
        .iter()
        .filter_map(|(a, b)| ball.sublevel(a, b).map(|(lo, hi)| (hi - lo) * n.dist(a, b)))
        .sum())
}

/// `exp(zeta(r)) H^1(C intersect B(x, r)) / 2r`, where `zeta` is the mean
/// slope of `gauge`; the raw density ratio when no gauge is given.
pub fn density_ratio(set: &dyn SegmentSet, x: &[f64], r: f64, gauge: Option<&Gauge>) -> Result<f64> {
    if !(r > 0.0) {
        return Err(out_of_domain("r", r, "(0, inf)"));
    }
    let d = set.distance_to(x);
    if d > ON_NETWORK_TOL {
        return Err(Error::NotOnNetwork(d));
    }
    let ball = Ball::new(x.to_vec(), r, set.norm().clone())?;
    let ratio = length_in_ball(set, &ball)? / (2.0 * r);
    match gauge {
        None => Ok(ratio),
        Some(g) => Ok(g.mean_slope(r)?.exp() * ratio),
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(norm: &NormSpec, p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let f = |t: f64| norm.norm_with(p.len(), |i| a[i] + t * (b[i] - a[i]) - p[i]);
    golden_min(f, 0.0, 1.0, 1e-12).1
}

/// Distance from `p` to the line through `a` and `b`.
pub fn point_line_distance(norm: &NormSpec, p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let f = |t: f64| norm.norm_with(p.len(), |i| a[i] + t * (b[i] - a[i]) - p[i]);
    // the minimizer lies within |p - a| / |b - a| of the foot at t = 0
    let reach = norm.dist(p, a) / norm.dist(a, b) + 1.0;
    golden_min(f, -reach, reach, 1e-13).1
}

/// Points every `step` along each segment, including all endpoints.
fn samples(set: &dyn SegmentSet, step: f64) -> Vec<Vec<f64>> {
    let n = set.norm();
    let mut out = Vec::new();
    for (a, b) in set.segments() {
        let k = (n.dist(a, b) / step).ceil().max(1.0) as usize;
        out.extend((0..=k).map(|i| lerp(a, b, i as f64 / k as f64)));
    }
    out
}

fn directed_hausdorff(from: &dyn SegmentSet, to: &dyn SegmentSet, step: f64) -> f64 {
    let n = from.norm();
    let segs: Vec<(&[f64], &[f64], f64)> = to.segments().into_iter().map(|(a, b)| (a, b, n.dist(a, b))).collect();
    let mut worst: f64 = 0.0;
    for p in samples(from, step) {
        let mut best = f64::INFINITY;
        for &(a, b, len) in &segs {
            // cheap lower bound first
            if n.dist(&p, a) - len >= best {
                continue;
            }
            best = best.min(point_segment_distance(n, &p, a, b));
            if best <= worst {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Hausdorff distance by arclength sampling at step `1e-3` times the length.
pub fn hausdorff_distance(a: &dyn SegmentSet, b: &dyn SegmentSet) -> Result<f64> {
    if a.norm() != b.norm() {
        return Err(Error::NormMismatch);
    }
    let step_a = 1e-3 * a.length().max(f64::MIN_POSITIVE);
    let step_b = 1e-3 * b.length().max(f64::MIN_POSITIVE);
    Ok(directed_hausdorff(a, b, step_a).max(directed_hausdorff(b, a, step_b)))
}

/// Replaces `C` inside the ball by segments from `hub` to the trace points.
///
/// Terminals strictly inside the ball are dropped with the rest of the interior.
pub fn spider_competitor(net: &Network, ball: &Ball, hub: &[f64]) -> Result<Network> {
    check_norms(net, &ball.norm)?;
    let n = net.norm.clone();
    if n.dist(hub, &ball.center) > ball.radius * (1.0 + 1e-12) {
        return Err(Error::InvalidInput("hub lies outside the ball".into()));
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let intern = |p: Vec<f64>, vertices: &mut Vec<Vec<f64>>| -> usize {
        match vertices.iter().position(|q| n.dist(q, &p) < TRACE_DEDUP) {
            Some(i) => i,
            None => {
                vertices.push(p);
                vertices.len() - 1
            }
        }
    };
    let outside = |p: &[f64]| n.dist(p, &ball.center) > ball.radius;
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for &[i, j] in &net.edges {
        let (a, b) = (&net.vertices[i], &net.vertices[j]);
        let mut cuts = vec![0.0, 1.0];
        if let Some((lo, hi)) = ball.sublevel(a, b) {
            cuts.extend([lo, hi].into_iter().filter(|t| *t > 0.0 && *t < 1.0));
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            if w[1] - w[0] <= 0.0 || !outside(&lerp(a, b, 0.5 * (w[0] + w[1]))) {
                continue;
            }
            let p = intern(lerp(a, b, w[0]), &mut vertices);
            let q = intern(lerp(a, b, w[1]), &mut vertices);
            if p != q {
                edges.push([p, q]);
            }
        }
    }
    let trace = ball_trace(net, ball)?;
    if !trace.is_empty() || vertices.is_empty() {
        let h = intern(hub.to_vec(), &mut vertices);
        for z in trace {
            let t = intern(z, &mut vertices);
            if t != h {
                edges.push([h, t]);
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    edges.retain(|&[p, q]| seen.insert((p.min(q), p.max(q))));
    let terminals = net
        .terminals
        .iter()
        .filter(|&&t| n.dist(&net.vertices[t], &ball.center) >= ball.radius)
        .map(|&t| intern(net.vertices[t].clone(), &mut vertices))
        .collect();
    Network::new(vertices, edges, terminals, n)
}

/// Largest `||u(s1) - u(s2)||` over `|s1 - s2| <= eta`, where `u(s)` is the
/// unit secant direction over the window `[s - eta/2, s + eta/2]`.
pub fn tangent_oscillation(curve: &Polyline, eta: f64) -> Result<f64> {
    let cum = curve.arclengths();
    let total = *cum.last().unwrap_or(&0.0);
    if !(eta > 0.0 && eta <= total * (1.0 + 1e-12)) {
        return Err(out_of_domain("eta", eta, format!("(0, {total}]")));
    }
    let eta = eta.min(total);
    let (lo, hi) = (0.5 * eta, total - 0.5 * eta);
    let mut s: Vec<f64> = Vec::new();
    let k = ((hi - lo) / (eta / 16.0)).ceil() as usize;
    s.extend((0..=k).map(|i| {
        if k == 0 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / k as f64
        }
    }));
    // u changes slope only where a window end crosses a vertex
    for &sv in &cum {
        for c in [sv - 0.5 * eta, sv + 0.5 * eta] {
            s.extend([c - eta, c, c + eta]);
        }
    }
    s.retain(|&x| x >= lo && x <= hi);
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * total.max(1.0));
    let n = &curve.norm;
    let dirs: Vec<Vec<f64>> = s
        .iter()
        .map(|&si| {
            let d = crate::numeric::sub(
                &curve.point_at(&cum, si + 0.5 * eta),
                &curve.point_at(&cum, si - 0.5 * eta),
            );
            let len = n.norm(&d);
            d.into_iter().map(|x| x / len).collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[j] - s[i] > eta * (1.0 + 1e-12) {
                break;
            }
            worst = worst.max(n.dist(&dirs[i], &dirs[j]));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> NormSpec {
        NormSpec::euclidean(2).unwrap()
    }

    fn segment(a: [f64; 2], b: [f64; 2]) -> Network {
        Network::path(vec![a.to_vec(), b.to_vec()], e2()).unwrap()
    }

    fn tripod() -> Network {
        // unit equilateral triangle, Fermat point at the centroid
        let h = 3f64.sqrt() / 2.0;
        let c = vec![0.5, h / 3.0];
        Network::new(
            vec![c, vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
            vec![[0, 1], [0, 2], [0, 3]],
            vec![1, 2, 3],
            e2(),
        )
        .unwrap()
    }

    fn ball(c: [f64; 2], r: f64) -> Ball {
        Ball::new(c.to_vec(), r, e2()).unwrap()
    }

    #[test]
    fn length_examples() {
        assert_eq!(segment([0.0, 0.0], [1.0, 0.0]).length(), 1.0);
        assert!((tripod().length() - 3f64.sqrt()).abs() < 1e-15);
        let linf = NormSpec::linf(2).unwrap();
        let stair = Network::path(
            vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 0.2], vec![1.0 + 1e-9, 0.2]],
            linf,
        )
        .unwrap();
        assert!((stair.length() - (1.0 + 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_networks() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(
            Network::new(v.clone(), vec![[0, 1]], vec![], e2()).is_err(),
            "disconnected"
        );
        assert!(Network::new(v.clone(), vec![[0, 1], [1, 0], [1, 2]], vec![], e2()).is_err());
        assert!(
            Network::new(v.clone(), vec![[0, 2], [0, 1]], vec![], e2()).is_err(),
            "overlap"
        );
        assert!(Network::new(v.clone(), vec![[0, 1], [1, 2]], vec![5], e2()).is_err());
        assert!(Network::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![[0, 1]], vec![], e2()).is_err());
        assert!(Network::new(v, vec![[0, 1], [1, 2]], vec![0, 2], e2()).is_ok());
    }

    #[test]
    fn network_json() {
        let json =
            r#"{"vertices":[[0,0],[1,0]],"edges":[[0,1]],"terminals":[0,1],"norm":{"family":"euclidean","dim":2}}"#;
        let net: Network = serde_json::from_str(json).unwrap();
        assert_eq!(net.length(), 1.0);
        let bad =
            r#"{"vertices":[[0,0],[1,0],[3,3]],"edges":[[0,1]],"terminals":[],"norm":{"family":"euclidean","dim":2}}"#;
        assert!(serde_json::from_str::<Network>(bad).is_err());
    }

    #[test]
    fn trace_examples() {
        let s = segment([-1.0, 0.0], [1.0, 0.0]);
        let mut t = ball_trace(&s, &ball([0.0, 0.0], 0.5)).unwrap();
        t.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(t.len(), 2);
        assert!((t[0][0] + 0.5).abs() < 1e-12 && (t[1][0] - 0.5).abs() < 1e-12);
        let tri = tripod();
        let center = tri.vertices()[0].clone();
        let b = Ball::new(center, 0.1, e2()).unwrap();
        assert_eq!(ball_trace(&tri, &b).unwrap().len(), 3);
        let t = ball_trace(&s, &ball([0.0, 1.0], 1.0)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0][0].abs() < 1e-6 && t[0][1].abs() < 1e-12);
    }

    #[test]
    fn trace_at_shared_vertex_counts_once() {
        let net = Network::path(vec![vec![-1.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]], e2()).unwrap();
        assert_eq!(ball_trace(&net, &ball([0.0, 0.0], 0.5)).unwrap().len(), 2);
    }

    #[test]
    fn length_in_ball_examples() {
        let s = segment([-2.0, 0.0], [2.0, 0.0]);
        assert!((length_in_ball(&s, &ball([0.0, 0.0], 0.7)).unwrap() - 1.4).abs() < 1e-12);
        let tri = tripod();
        let b = Ball::new(tri.vertices()[0].clone(), 0.2, e2()).unwrap();
        assert!((length_in_ball(&tri, &b).unwrap() - 0.6).abs() < 1e-12);
        let chord = segment([-2.0, 0.6], [2.0, 0.6]);
        assert!((length_in_ball(&chord, &ball([0.0, 0.0], 1.0)).unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let s = segment([-1.0, 0.0], [1.0, 0.0]);
        assert!((density_ratio(&s, &[0.1, 0.0], 0.05, None).unwrap() - 1.0).abs() < 1e-12);
        assert!((density_ratio(&s, &[1.0, 0.0], 0.05, None).unwrap() - 0.5).abs() < 1e-12);
        let tri = tripod();
        let c = tri.vertices()[0].clone();
        assert!((density_ratio(&tri, &c, 0.01, None).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(
            density_ratio(&s, &[0.0, 0.1], 0.05, None),
            Err(Error::NotOnNetwork(_))
        ));
        let g = Gauge::geometric(1.0, 1.0, 1.0).unwrap();
        let weighted = density_ratio(&s, &[0.0, 0.0], 0.1, Some(&g)).unwrap();
        assert!((weighted - 0.1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        let a = segment([0.0, 0.0], [1.0, 0.0]);
        assert!(hausdorff_distance(&a, &a).unwrap() < 1e-12);
        let b = segment([0.0, 0.3], [1.0, 0.3]);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.3).abs() < 1e-9);
        let bulge = Network::path(vec![vec![0.0, 0.0], vec![0.5, 0.1], vec![1.0, 0.0]], e2()).unwrap();
        assert!((hausdorff_distance(&a, &bulge).unwrap() - 0.1).abs() < 1e-3);
        let other = Network::path(vec![vec![0.0, 0.0], vec![1.0, 0.0]], NormSpec::linf(2).unwrap()).unwrap();
        assert!(matches!(hausdorff_distance(&a, &other), Err(Error::NormMismatch)));
    }

    #[test]
    fn spider_examples() {
        let s = segment([-1.0, 0.0], [1.0, 0.0]);
        let b = ball([0.0, 0.0], 0.5);
        let sp = spider_competitor(&s, &b, &[0.0, 0.0]).unwrap();
        assert!((sp.length() - 2.0).abs() < 1e-12);
        assert!((length_in_ball(&sp, &b).unwrap() - 1.0).abs() < 1e-12);

        // V-shape dipping into the ball with both trace points above the center
        let v = Network::path(vec![vec![-1.0, 1.0], vec![0.0, 0.2], vec![1.0, 1.0]], e2()).unwrap();
        let b = ball([0.0, 0.0], 0.6);
        let sp = spider_competitor(&v, &b, &[0.0, 0.0]).unwrap();
        let chord = spider_competitor(&v, &b, &[0.0, 0.5]).unwrap();
        assert!(length_in_ball(&chord, &b).unwrap() < length_in_ball(&v, &b).unwrap());
        assert!(sp.length() > 0.0);

        let tri = tripod();
        let c = tri.vertices()[0].clone();
        let b = Ball::new(c.clone(), 0.1, e2()).unwrap();
        let sp = spider_competitor(&tri, &b, &c).unwrap();
        assert!((sp.length() - tri.length()).abs() < 1e-12);
        assert!(hausdorff_distance(&sp, &tri).unwrap() < 1e-9);
        assert!(spider_competitor(&tri, &b, &[5.0, 5.0]).is_err());
    }

    #[test]
    fn spider_edge_cases() {
        let s = segment([-1.0, 0.0], [1.0, 0.0]);
        let far = ball([5.0, 5.0], 1.0);
        assert_eq!(spider_competitor(&s, &far, &[5.0, 5.0]).unwrap().length(), 2.0);
        let all = ball([0.0, 0.0], 3.0);
        let sp = spider_competitor(&s, &all, &[0.0, 0.0]).unwrap();
        assert_eq!((sp.vertices().len(), sp.edges().len()), (1, 0));
    }

    #[test]
    fn oscillation_examples() {
        let line = Polyline::new(vec![vec![0.0, 0.0], vec![0.3, 0.1], vec![0.9, 0.3]], e2()).unwrap();
        assert!(tangent_oscillation(&line, 0.1).unwrap() < 1e-12);
        let corner = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]], e2()).unwrap();
        assert!((tangent_oscillation(&corner, 0.2).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(tangent_oscillation(&corner, 0.0).is_err());

        let radius = 2.0;
        let n = 4000;
        let arc: Vec<Vec<f64>> = (0..=n)
            .map(|i| {
                let a = i as f64 / n as f64;
                vec![radius * a.cos(), radius * a.sin()]
            })
            .collect();
        let arc = Polyline::new(arc, e2()).unwrap();
        let eta = 0.05;
        let got = tangent_oscillation(&arc, eta).unwrap();
        // chord of the unit circle subtending angle eta / radius
        let exact = 2.0 * (eta / (2.0 * radius)).sin();
        assert!((got - exact).abs() < 1e-3 * exact, "{got} vs {exact}");
    }
}
