use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ReportRow, VerificationReport};
use crate::error::{out_of_domain, Error, Result};
use crate::gauge::Gauge;
use crate::network::{
    ball_trace, density_ratio, length_in_ball, point_line_distance, spider_competitor, Ball, Network, Polyline,
    SegmentSet,
};
use crate::norm::{
    local_modulus, tangent_second_derivative, unit_direction, ModulusCurve, NormFamily, NormSpec, CURVATURE_THRESHOLD,
};
use crate::numeric::{add, loglog_slope, sub};
use crate::quasihyp::{fit_oscillation_constant, oscillation_exponent, oscillation_samples, MAX_CONSTANT};
use crate::weight::{Domain, WeightField};

/// A ball `B(center, radius)` in which a check is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Window {
    fn ball(&self, norm: &NormSpec) -> Result<Ball> {
        Ball::new(self.center.clone(), self.radius, norm.clone())
    }
}

/// Where spider competitors put their hub.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HubStrategy {
    Center,
    /// The centre, the trace centroid and 15 random points of the ball.
    BestOfK,
}

const RANDOM_HUBS: usize = 15;

/// Both sides of the excess-length inequality for the triangle `x0, x1, z`:
/// `|x0 - x1| (1 + delta(dist(z, line) / 2s))` and `s = |x0 - z| + |z - x1|`.
/// `None` for a degenerate triangle.
pub fn excess_length_sides(
    norm: &NormSpec,
    modulus: &ModulusCurve,
    x0: &[f64],
    x1: &[f64],
    z: &[f64],
) -> Option<(f64, f64)> {
    let base = norm.dist(x0, x1);
    let broken = norm.dist(x0, z) + norm.dist(z, x1);
    if base <= 1e-9 * broken {
        return None;
    }
    let height = point_line_distance(norm, z, x0, x1);
    if height <= 1e-9 * broken {
        return None;
    }
    Some((base * (1.0 + modulus.lower(height / (2.0 * broken))), broken))
}

/// Random nondegenerate triangles in the unit cube against the excess-length
/// inequality, with the modulus read from below off the tabulated curve.
pub fn check_excess_length(
    norm: &NormSpec,
    modulus: &ModulusCurve,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if !norm.is_rotund() {
        return Err(Error::NotRotund(norm.label()));
    }
    if modulus.norm() != norm {
        return Err(Error::NormMismatch);
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = norm.dim();
    let point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect() };
    let mut rows = Vec::with_capacity(trials);
    let mut degenerate = 0;
    let mut tightest: f64 = 0.0;
    while rows.len() < trials {
        let (x0, x1, z) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let Some((lhs, rhs)) = excess_length_sides(norm, modulus, &x0, &x1, &z) else {
            degenerate += 1;
            continue;
        };
        let height = point_line_distance(norm, &z, &x0, &x1);
        tightest = tightest.max(lhs / rhs);
        rows.push(ReportRow::new(
            format!("t{}", rows.len()),
            height / (2.0 * rhs),
            lhs,
            rhs,
            1e-9,
        ));
    }
    Ok(VerificationReport::new(
        format!("excess_length_{}", norm.label()),
        rows,
        vec![("tightest_ratio", tightest), ("degenerate_skipped", degenerate as f64)],
    ))
}

fn check_ascending(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "radii must be positive and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// The balls must avoid the terminals, which lie outside the region where
/// the network is almost minimizing.
fn check_clear_of_terminals(net: &Network, center: &[f64], radius: f64) -> Result<()> {
    let n = net.norm();
    let nearest = net
        .terminals()
        .iter()
        .map(|&t| n.dist(&net.vertices()[t], center))
        .fold(f64::INFINITY, f64::min);
    if radius >= nearest {
        return Err(out_of_domain(
            "radius",
            radius,
            format!("(0, {nearest}) to stay clear of the terminals"),
        ));
    }
    Ok(())
}

/// `exp(zeta(r)) H^1(C intersect B(x, r)) / 2r` must not decrease between
/// consecutive radii by more than `1e-3` relative.
pub fn check_monotonicity(net: &Network, gauge: &Gauge, x: &[f64], radii: &[f64]) -> Result<VerificationReport> {
    check_ascending(radii)?;
    let largest = radii[radii.len() - 1];
    if largest > gauge.domain_upper() {
        return Err(out_of_domain(
            "radius",
            largest,
            format!("(0, {}] of the gauge", gauge.domain_upper()),
        ));
    }
    check_clear_of_terminals(net, x, largest)?;
    let ratios = radii
        .iter()
        .map(|&r| density_ratio(net, x, r, Some(gauge)))
        .collect::<Result<Vec<f64>>>()?;
    let rows = radii
        .windows(2)
        .zip(ratios.windows(2))
        .map(|(r, q)| ReportRow::new(format!("r{}", r[0]), r[0], q[0], q[1], 1e-3 * q[1]))
        .collect();
    let spread =
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VerificationReport::new(
        "monotonicity",
        rows,
        vec![("ratio_spread", spread)],
    ))
}

/// Classification of a density estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityClass {
    Regular,
    Singular,
    /// Terminals, which lie outside the region of almost minimality.
    Outside,
    Forbidden,
}

/// `Theta` from ratios at `r, r/2, r/4` by Aitken extrapolation, falling back
/// to the smallest radius when the differences do not contract.
fn extrapolate(q: [f64; 3]) -> f64 {
    let (d1, d2) = (q[1] - q[0], q[2] - q[1]);
    if d1.abs() < 1e-12 || d2.abs() < 1e-12 {
        return q[2];
    }
    let rate = d2 / d1;
    if !(rate > 0.0 && rate < 0.9) {
        return q[2];
    }
    q[2] + d2 * rate / (1.0 - rate)
}

/// Densities at all vertices and at `samples` points spread by arclength:
/// each must be within 0.05 of 1 or at least 1.45.
pub fn check_density_dichotomy(net: &Network, samples: usize) -> Result<VerificationReport> {
    let n = net.norm();
    let mut points: Vec<(String, Vec<f64>, bool)> = net
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("v{i}"), v.clone(), net.terminals().contains(&i)))
        .collect();
    let segments = net.segments();
    let lengths: Vec<f64> = segments.iter().map(|(a, b)| n.dist(a, b)).collect();
    let total: f64 = lengths.iter().sum();
    for k in 0..samples {
        let mut s = total * (k as f64 + 0.5) / samples as f64;
        for ((a, b), len) in segments.iter().zip(&lengths) {
            if s <= *len {
                points.push((format!("s{k}"), crate::numeric::lerp(a, b, s / len), false));
                break;
            }
            s -= len;
        }
    }
    let mut rows = Vec::new();
    let mut counts = [0usize; 4];
    let mut max_theta: f64 = 0.0;
    for (label, p, terminal) in points {
        if terminal {
            counts[2] += 1;
            continue;
        }
        let gap = net
            .vertices()
            .iter()
            .map(|v| n.dist(v, &p))
            .filter(|&d| d > 1e-9)
            .fold(f64::INFINITY, f64::min);
        let r = 0.5 * gap.min(total);
        let q = [
            density_ratio(net, &p, r, None)?,
            density_ratio(net, &p, 0.5 * r, None)?,
            density_ratio(net, &p, 0.25 * r, None)?,
        ];
        let theta = extrapolate(q);
        max_theta = max_theta.max(theta);
        let regular = ReportRow::new(format!("{label}:regular"), r, (theta - 1.0).abs(), 0.05, 0.0);
        let singular = ReportRow::new(format!("{label}:singular"), r, 1.45, theta, 0.0);
        let (row, class) = if regular.margin >= singular.margin {
            (regular, DensityClass::Regular)
        } else {
            (singular, DensityClass::Singular)
        };
        counts[if row.pass {
            class as usize
        } else {
            DensityClass::Forbidden as usize
        }] += 1;
        rows.push(row);
    }
    Ok(VerificationReport::new(
        "density_dichotomy",
        rows,
        vec![
            ("regular", counts[0] as f64),
            ("singular", counts[1] as f64),
            ("outside", counts[2] as f64),
            ("forbidden", counts[3] as f64),
            ("max_theta", max_theta),
        ],
    ))
}

/// `delta^-1(t)` with `delta^-1(0) = 0`.
fn modulus_inverse(curve: &ModulusCurve, t: f64) -> Result<f64> {
    if t <= 0.0 {
        Ok(0.0)
    } else {
        curve.inverse(t)
    }
}

/// Per window: the chord bound `|x1 - x0| >= (1 - xi(r)) 2r` and the height
/// bound `dist(z, x + L) <= 16 r delta^-1(xi(r))` with `L` the chord direction.
pub fn check_height_bound(
    geodesic: &Polyline,
    gauge: &Gauge,
    modulus: &ModulusCurve,
    windows: &[Window],
) -> Result<VerificationReport> {
    let n = geodesic.norm();
    if modulus.norm() != n {
        return Err(Error::NormMismatch);
    }
    let mut rows = Vec::new();
    let mut heights = Vec::new();
    for w in windows {
        let ball = w.ball(n)?;
        let trace = ball_trace(geodesic, &ball)?;
        if trace.len() != 2 {
            return Err(Error::TraceCount(trace.len()));
        }
        let r = w.radius;
        let xi = gauge.eval(r)?;
        let chord = n.dist(&trace[0], &trace[1]);
        rows.push(ReportRow::new(
            format!("chord@{r}"),
            r,
            (1.0 - xi) * 2.0 * r,
            chord,
            1e-9 * r,
        ));
        let along = add(&w.center, &sub(&trace[1], &trace[0]));
        let height = geodesic
            .points()
            .iter()
            .filter(|p| ball.contains(p))
            .chain(&trace)
            .map(|z| point_line_distance(n, z, &w.center, &along))
            .fold(0.0, f64::max);
        rows.push(ReportRow::new(
            format!("height@{r}"),
            r,
            height,
            16.0 * r * modulus_inverse(modulus, xi)?,
            1e-9 * r,
        ));
        heights.push((r, height));
    }
    // smallest C with height <= 16 r delta^-1(C r) in every window
    let fits = |c: f64| -> Result<bool> {
        for &(r, h) in &heights {
            if h > 16.0 * r * modulus_inverse(modulus, c * r)? + 1e-9 * r {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut constants = Vec::new();
    if fits(1e-12)? {
        constants.push(("height_constant", 0.0));
    } else if fits(1e12)? {
        let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if fits(mid.exp())? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        constants.push(("height_constant", hi.exp()));
    }
    Ok(VerificationReport::new("height_bound", rows, constants))
}

/// Candidate hubs for a window, deterministic given `rng`.
fn hubs(ball: &Ball, trace: &[Vec<f64>], strategy: HubStrategy, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let center = ball.center().to_vec();
    let mut out = vec![center.clone()];
    if trace.len() == 2 {
        // a hub on the chord gives the segment competitor
        out.push(crate::numeric::midpoint(&trace[0], &trace[1]));
    }
    if strategy == HubStrategy::BestOfK {
        let dim = center.len();
        let mut centroid = vec![0.0; dim];
        for t in trace {
            centroid = add(&centroid, t);
        }
        let centroid = crate::numeric::scale(&centroid, 1.0 / trace.len() as f64);
        if ball.contains(&centroid) {
            out.push(centroid);
        }
        let r = ball.radius();
        while out.len() < 2 + RANDOM_HUBS + usize::from(trace.len() == 2) {
            let p: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-r..r)).collect();
            if ball.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Empirical gauge `max(0, H^1(C in B) / H^1(C' in B) - 1)` over spider and
/// chord competitors, against `1.1 xi(r) + 1e-6` with `xi` the gauge the
/// weight induces on `region`.
pub fn check_almost_minimality(
    net: &Network,
    weight: &WeightField,
    region: &Domain,
    windows: &[Window],
    strategy: HubStrategy,
    seed: u64,
) -> Result<VerificationReport> {
    let n = net.norm();
    let gauge = weight.clone().in_norm(n).minimality_gauge(region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let (mut envelope, mut worst): (f64, f64) = (0.0, 0.0);
    for w in windows {
        check_clear_of_terminals(net, &w.center, w.radius)?;
        let ball = w.ball(n)?;
        let trace = ball_trace(net, &ball)?;
        if trace.is_empty() {
            return Err(Error::TraceCount(0));
        }
        let inside = length_in_ball(net, &ball)?;
        let mut best = f64::INFINITY;
        for hub in hubs(&ball, &trace, strategy, &mut rng) {
            let competitor = spider_competitor(net, &ball, &hub)?;
            best = best.min(length_in_ball(&competitor, &ball)?);
        }
        let xi_hat = (inside / best - 1.0).max(0.0);
        let xi = gauge.eval(w.radius)?;
        worst = worst.max(xi_hat);
        if xi > 0.0 {
            envelope = envelope.max(xi_hat / xi);
        }
        rows.push(ReportRow::new(
            format!("r{}", w.radius),
            w.radius,
            xi_hat,
            1.1 * xi,
            1e-6,
        ));
    }
    Ok(VerificationReport::new(
        "almost_minimality",
        rows,
        vec![("max_xi_hat", worst), ("envelope", envelope)],
    ))
}

/// Fits the smallest `C <= 100` with `osc(eta) <= C omega(C eta)` over the
/// dyadic scales, and checks that oscillation shrinks with the scale.
pub fn check_c1_modulus(geodesic: &Polyline, omega: &Gauge) -> Result<VerificationReport> {
    if !omega.dini_test(2.0, 32)?.is_dini {
        return Err(Error::NotDini);
    }
    let samples = oscillation_samples(geodesic, omega)?;
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.eta, s.oscillation)).collect();
    let fitted = fit_oscillation_constant(&pairs, omega)?;
    let c = fitted.unwrap_or(MAX_CONSTANT);
    let mut rows = Vec::new();
    for s in &samples {
        let bound = c * omega.eval((c * s.eta).min(omega.domain_upper()))?;
        rows.push(ReportRow::new(
            format!("osc@{}", s.eta),
            s.eta,
            s.oscillation,
            bound,
            1e-12,
        ));
    }
    for w in samples.windows(2) {
        rows.push(ReportRow::new(
            format!("monotone@{}", w[1].eta),
            w[1].eta,
            w[1].oscillation,
            w[0].oscillation,
            1e-9,
        ));
    }
    let mut constants = vec![("C", c)];
    if let Some(s) = oscillation_exponent(&samples) {
        constants.push(("exponent", s));
    }
    Ok(VerificationReport::new("c1_modulus", rows, constants))
}

/// Directional moduli over `sweep` unit directions of a planar `l_p` norm,
/// `p >= 2`. Where the sphere curves (`v` in G) the local modulus must admit
/// `delta(v; eps) >= c eps^2` with `c > 0` and asymptotic exponent at most
/// 2.1; elsewhere `delta(v; eps) / eps^2` must fall by a factor 100 between
/// `eps = 1/2` and `eps = 2^-8`.
pub fn check_local_modulus_regularity(norm: &NormSpec, sweep: usize) -> Result<VerificationReport> {
    let supported = norm.dim() == 2
        && matches!(norm.family(), NormFamily::Lp | NormFamily::Euclidean)
        && norm.exponent().is_some_and(|p| p >= 2.0);
    if !supported {
        return Err(Error::InvalidNorm(format!(
            "local modulus check needs a planar l_p norm with p >= 2, got {}",
            norm.label()
        )));
    }
    if sweep == 0 {
        return Err(Error::InvalidInput("sweep must be at least 1".into()));
    }
    let eps: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let per_direction = (0..sweep)
        .into_par_iter()
        .map(|i| -> Result<(bool, Vec<ReportRow>, f64, f64)> {
            let theta = std::f64::consts::TAU * i as f64 / sweep as f64;
            let v = unit_direction(norm, theta);
            let curvature = tangent_second_derivative(norm, &v)?;
            let delta = eps
                .iter()
                .map(|&e| local_modulus(norm, &v, e))
                .collect::<Result<Vec<f64>>>()?;
            let ratio: Vec<f64> = delta.iter().zip(&eps).map(|(d, e)| d / (e * e)).collect();
            let label = format!("theta{i}");
            if curvature > CURVATURE_THRESHOLD {
                let c = ratio.iter().copied().fold(f64::INFINITY, f64::min);
                let tail = loglog_slope(&eps[5..], &delta[5..]).unwrap_or(f64::INFINITY);
                let rows = vec![
                    ReportRow::new(format!("{label}:exponent"), eps[7], tail, 2.1, 0.0),
                    ReportRow::new(format!("{label}:constant"), eps[7], f64::MIN_POSITIVE, c, 0.0),
                ];
                Ok((true, rows, c, tail))
            } else {
                let rows = vec![ReportRow::new(
                    format!("{label}:flat"),
                    eps[7],
                    ratio[7],
                    0.01 * ratio[0],
                    0.0,
                )];
                Ok((false, rows, f64::INFINITY, f64::NEG_INFINITY))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let (mut in_g, mut min_c, mut max_tail) = (0usize, f64::INFINITY, f64::NEG_INFINITY);
    for (g, r, c, tail) in per_direction {
        in_g += usize::from(g);
        min_c = min_c.min(c);
        max_tail = max_tail.max(tail);
        rows.extend(r);
    }
    let mut constants = vec![("in_g", in_g as f64), ("outside_g", (sweep - in_g) as f64)];
    if in_g > 0 {
        constants.push(("min_quadratic_constant", min_c));
        constants.push(("max_tail_exponent", max_tail));
    }
    Ok(VerificationReport::new(
        format!("local_modulus_{}", norm.label()),
        rows,
        constants,
    ))
}
