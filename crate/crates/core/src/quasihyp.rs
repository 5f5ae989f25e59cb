//! Quasihyperbolic distance `inf int_G 1/h` over bounded convex domains, and
//! the tangent regularity its geodesics inherit from the weight.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::network::{tangent_oscillation, Polyline, SegmentSet};
use crate::norm::{geometric_grid, ModulusCurve};
use crate::numeric::loglog_slope;
use crate::solver::{geodesic_solve, SolveFlags, SolveParams};
use crate::weight::{Domain, DomainKind, WeightField};

/// Scales `2^-k`, `k = 3..=8`, at which tangent oscillation is compared.
pub const OSCILLATION_SCALES: [f64; 6] = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625];

/// Largest constant tried when fitting `osc <= C omega(C eta)`.
pub const MAX_CONSTANT: f64 = 100.0;

#[derive(Debug, Clone, Serialize)]
pub struct QuasihypResult {
    pub distance: f64,
    pub geodesic: Polyline,
    /// `min h` along the geodesic, so the curve stays in `{h >= eta}`.
    pub eta: f64,
    /// A priori bound `h(x0) e^M` on the length of the geodesic, `M` being
    /// the achieved objective.
    pub length_bound: f64,
    pub iterations: usize,
    pub flags: SolveFlags,
    /// `false` for a half-plane window whose geodesic is too wide or off
    /// centre for the window to stand in for the half-plane.
    pub window_trusted: bool,
}

/// Quasihyperbolic geodesic between interior points of `domain`.
pub fn quasihyp_distance(domain: &Domain, x0: &[f64], y0: &[f64], params: &SolveParams) -> Result<QuasihypResult> {
    for x in [x0, y0] {
        if x.len() != domain.norm().dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.norm().dim(),
                got: x.len(),
            });
        }
        if !domain.contains(x) {
            return Err(Error::OutsideDomain(domain.boundary_distance(x)));
        }
    }
    let weight = WeightField::inverse_boundary_distance(domain.clone())?;
    let solved = geodesic_solve(x0, y0, &weight, domain.norm(), params)?;
    // h is concave on convex domains, so its minimum on an edge is at an end
    let eta = solved
        .polyline
        .points()
        .iter()
        .map(|p| domain.boundary_distance(p))
        .fold(f64::INFINITY, f64::min);
    if !(eta > 0.0) {
        return Err(Error::OutsideDomain(eta));
    }
    let window_trusted = match domain.kind() {
        DomainKind::HalfPlaneWindow { height, width } => {
            let pts = solved.polyline.points();
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in pts {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            let extent = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
            extent < 0.25 * height && hi[0] < 0.25 * width && lo[0] > -0.25 * width
        }
        _ => true,
    };
    Ok(QuasihypResult {
        distance: solved.objective,
        length_bound: domain.boundary_distance(x0) * solved.objective.exp(),
        geodesic: solved.polyline,
        eta,
        iterations: solved.iterations,
        flags: solved.flags,
        window_trusted,
    })
}

/// One scale of a regularity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationSample {
    pub eta: f64,
    pub oscillation: f64,
    /// `omega(eta)` at the unit constant.
    pub omega: f64,
    /// The scale exceeds twice the longest edge, so the secant oscillation
    /// reflects the curve rather than its vertices.
    pub resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub eta: f64,
    /// `K` in `xi(r) = min(K r, 1)`.
    pub xi_slope: f64,
    pub samples: Vec<OscillationSample>,
    /// Smallest `C` in `[1, 100]` with `osc(e) <= C omega(C e)` at every scale.
    pub fitted_constant: Option<f64>,
    /// Log-log slope of oscillation against scale over the resolved scales.
    pub fitted_exponent: Option<f64>,
    pub holds: bool,
}

/// Gauge `xi(r) = min(K r, 1)` on `(0, upper]`.
pub fn linear_gauge(slope: f64, upper: f64) -> Result<Gauge> {
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::InvalidGauge(format!("slope must be positive, got {slope}")));
    }
    let knee = 1.0 / slope;
    if knee < upper {
        Gauge::tabulated(vec![knee, upper], vec![1.0, 1.0], upper)
    } else {
        Gauge::tabulated(vec![upper], vec![slope * upper], upper)
    }
}

/// Mean slope of `delta^-1 o xi`, tabulated up to `xi`'s domain.
pub fn tangent_modulus(curve: &ModulusCurve, xi: &Gauge) -> Result<Gauge> {
    let upper = xi.domain_upper();
    let composed = Gauge::composed(curve.clone(), xi.clone())?;
    let lowest = OSCILLATION_SCALES[OSCILLATION_SCALES.len() - 1] / 4.0;
    composed.mean_slope_gauge(&geometric_grid(lowest.min(upper / 2.0), upper, 97))
}

/// Smallest `C` in `[1, MAX_CONSTANT]` with `osc <= C omega(C eta)` on every
/// pair, by bisection; the right side grows with `C`.
pub fn fit_oscillation_constant(pairs: &[(f64, f64)], omega: &Gauge) -> Result<Option<f64>> {
    let holds = |c: f64| -> Result<bool> {
        for &(eta, osc) in pairs {
            let arg = (c * eta).min(omega.domain_upper());
            if osc > c * omega.eval(arg)? + 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if holds(1.0)? {
        return Ok(Some(1.0));
    }
    if !holds(MAX_CONSTANT)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (1.0, MAX_CONSTANT);
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Oscillation samples at the dyadic scales that fit inside the curve.
pub fn oscillation_samples(curve: &Polyline, omega: &Gauge) -> Result<Vec<OscillationSample>> {
    let longest = curve
        .segments()
        .into_iter()
        .map(|(a, b)| curve.norm().dist(a, b))
        .fold(0.0, f64::max);
    let total = curve.length();
    OSCILLATION_SCALES
        .iter()
        .filter(|&&eta| eta <= total)
        .map(|&eta| {
            Ok(OscillationSample {
                eta,
                oscillation: tangent_oscillation(curve, eta)?,
                omega: omega.eval(eta.min(omega.domain_upper()))?,
                resolved: eta >= 2.0 * longest,
            })
        })
        .collect()
}

/// Exponent of `osc ~ eta^s` over resolved scales with positive oscillation.
pub fn oscillation_exponent(samples: &[OscillationSample]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.resolved)
        .map(|s| (s.eta, s.oscillation))
        .unzip();
    loglog_slope(&xs, &ys)
}

/// Margin `eta = min h` along a geodesic and the slope `K` of the gauge
/// `xi(r) = min(K r, 1)` that `w = 1/h` induces near it.
///
/// On the `eta/2`-neighbourhood of the curve, `w` lies between
/// `a = 1/(sup h + eta/2)` and `b = 2/eta` and is `(eta/2)^-2`-Lipschitz,
/// which gives `K = (eta/2)^-2 (a + b) / a^2`.
pub fn geodesic_gauge_slope(geodesic: &Polyline, domain: &Domain) -> Result<(f64, f64)> {
    if geodesic.norm() != domain.norm() {
        return Err(Error::NormMismatch);
    }
    let heights: Vec<f64> = geodesic.points().iter().map(|p| domain.boundary_distance(p)).collect();
    let eta = heights.iter().copied().fold(f64::INFINITY, f64::min);
    if !(eta > 0.0) {
        return Err(Error::OutsideDomain(eta));
    }
    let sup_h = heights.iter().copied().fold(0.0, f64::max);
    let a = 1.0 / (sup_h + 0.5 * eta);
    let b = 2.0 / eta;
    Ok((eta, (0.5 * eta).powi(-2) * (a + b) / (a * a)))
}

/// Compares the tangent oscillation of a quasihyperbolic geodesic with the
/// modulus `omega`, the mean slope of `delta^-1 o xi`, that its weight allows.
pub fn quasihyp_regularity_report(
    geodesic: &Polyline,
    domain: &Domain,
    modulus: &ModulusCurve,
) -> Result<RegularityReport> {
    if geodesic.points().len() < 4 {
        return Err(Error::DegenerateGeodesic(format!(
            "{} vertices, need at least 4",
            geodesic.points().len()
        )));
    }
    if modulus.norm() != domain.norm() {
        return Err(Error::NormMismatch);
    }
    let (eta, slope) = geodesic_gauge_slope(geodesic, domain)?;
    let xi = linear_gauge(slope, MAX_CONSTANT * OSCILLATION_SCALES[0])?;
    let omega = tangent_modulus(modulus, &xi)?;
    let samples = oscillation_samples(geodesic, &omega)?;
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.eta, s.oscillation)).collect();
    let fitted_constant = fit_oscillation_constant(&pairs, &omega)?;
    Ok(RegularityReport {
        eta,
        xi_slope: slope,
        fitted_exponent: oscillation_exponent(&samples),
        holds: fitted_constant.is_some(),
        fitted_constant,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{NormSpec, SearchParams};

    fn e2() -> NormSpec {
        NormSpec::euclidean(2).unwrap()
    }

    fn window() -> Domain {
        Domain::half_plane_window(10.0, 100.0, e2()).unwrap()
    }

    #[test]
    fn vertical_pair_has_unit_distance() {
        let r = quasihyp_distance(
            &window(),
            &[0.0, 1.0],
            &[0.0, std::f64::consts::E],
            &SolveParams::default(),
        )
        .unwrap();
        assert!((r.distance - 1.0).abs() < 1e-3, "{}", r.distance);
        assert!((r.eta - 1.0).abs() < 1e-6);
        assert!(r.window_trusted);
        assert!((r.length_bound - std::f64::consts::E).abs() < 1e-2);
    }

    #[test]
    fn radial_disk_pair() {
        let disk = Domain::ball(vec![0.0, 0.0], 1.0, e2()).unwrap();
        let r = quasihyp_distance(&disk, &[0.0, 0.0], &[0.5, 0.0], &SolveParams::default()).unwrap();
        assert!((r.distance - 2f64.ln()).abs() < 1e-3, "{}", r.distance);
    }

    #[test]
    fn rejects_boundary_points() {
        let err = quasihyp_distance(&window(), &[0.0, 0.0], &[0.0, 1.0], &SolveParams::default());
        assert!(matches!(err, Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn linear_gauge_saturates() {
        let g = linear_gauge(4.0, 10.0).unwrap();
        assert!((g.eval(0.1).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(g.eval(5.0).unwrap(), 1.0);
        let h = linear_gauge(0.01, 10.0).unwrap();
        assert!((h.eval(2.0).unwrap() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn constant_fit_is_minimal() {
        let omega = Gauge::tabulated(vec![1.0, 100.0], vec![1.0, 100.0], 100.0).unwrap();
        // osc = 4 eta needs C^2 eta >= 4 eta
        let c = fit_oscillation_constant(&[(0.1, 0.4), (0.01, 0.04)], &omega)
            .unwrap()
            .unwrap();
        assert!((c - 2.0).abs() < 1e-6, "{c}");
        assert_eq!(fit_oscillation_constant(&[(0.1, 0.0)], &omega).unwrap(), Some(1.0));
        assert_eq!(fit_oscillation_constant(&[(0.1, 1e6)], &omega).unwrap(), None);
    }

    #[test]
    fn straight_geodesic_has_no_oscillation() {
        let curve = ModulusCurve::tabulate(&e2(), &ModulusCurve::default_grid(), &SearchParams::default()).unwrap();
        let r = quasihyp_distance(
            &window(),
            &[0.0, 1.0],
            &[0.0, std::f64::consts::E],
            &SolveParams::default(),
        )
        .unwrap();
        let report = quasihyp_regularity_report(&r.geodesic, &window(), &curve).unwrap();
        assert!(report.samples.iter().all(|s| s.oscillation < 1e-6));
        assert_eq!(report.fitted_constant, Some(1.0));
    }

    #[test]
    fn short_geodesic_is_degenerate() {
        let curve = ModulusCurve::tabulate(&e2(), &[0.5, 1.0, 2.0], &SearchParams::default()).unwrap();
        let p = Polyline::new(vec![vec![0.0, 1.0], vec![0.0, 2.0]], e2()).unwrap();
        assert!(matches!(
            quasihyp_regularity_report(&p, &window(), &curve),
            Err(Error::DegenerateGeodesic(_))
        ));
    }
}
