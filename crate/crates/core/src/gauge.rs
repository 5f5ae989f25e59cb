//! Gauges: nondecreasing functions `xi` on `(0, b]` vanishing at `0+`,
//! their mean slopes `zeta(r) = int_0^r xi(rho) / rho d rho` and the Dini test.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_domain, Error, Result};
use crate::norm::ModulusCurve;
use crate::numeric::{adaptive_simpson, solve3};

/// Below this radius the integrand of the mean slope is extrapolated from a
/// fitted model instead of being integrated numerically.
const HEAD_RADIUS: f64 = 1e-8;

/// Raabe statistic above which the tail of the dyadic series is declared summable.
const RAABE_THRESHOLD: f64 = 1.05;

/// The numeric Dini verdict inspects terms out to at least this index.
const RAABE_MIN_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeKind {
    /// `xi = 0`: the gauge of an exact minimizer.
    Zero,
    /// `a r^alpha`
    Geometric { a: f64, alpha: f64 },
    /// `a |log r|^(-1-alpha)`
    LogGeometric { a: f64, alpha: f64 },
    /// `|log r|^-1`, the standard non-Dini gauge.
    LogInverse,
    /// Piecewise linear through `(0, 0)` and the samples, constant above the grid.
    Tabulated { r_grid: Vec<f64>, xi_values: Vec<f64> },
    /// `delta^-1 o inner`, with `delta` given by a tabulated modulus.
    Composed { curve: ModulusCurve, inner: Box<Gauge> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaugeRepr")]
pub struct Gauge {
    #[serde(flatten)]
    kind: GaugeKind,
    domain_upper: f64,
}

#[derive(Deserialize)]
struct GaugeRepr {
    #[serde(flatten)]
    kind: GaugeKind,
    #[serde(default)]
    domain_upper: Option<f64>,
}

impl TryFrom<GaugeRepr> for Gauge {
    type Error = Error;
    fn try_from(r: GaugeRepr) -> Result<Self> {
        let upper = match (&r.kind, r.domain_upper) {
            (_, Some(b)) => b,
            (GaugeKind::Composed { inner, .. }, None) => inner.domain_upper,
            (GaugeKind::LogGeometric { .. } | GaugeKind::LogInverse, None) => 0.5,
            (_, None) => 1.0,
        };
        Gauge::new(r.kind, upper)
    }
}

/// Outcome of the dyadic-series Dini test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiniVerdict {
    pub is_dini: bool,
    /// `sum_{j=0..J} xi(beta^-j)` over the terms inside the domain.
    pub partial_sum: f64,
    /// Upper bound for the remaining terms, `beta/(beta-1) zeta(beta^-J)`.
    pub tail_bound: Option<f64>,
}

impl Gauge {
    pub fn new(kind: GaugeKind, domain_upper: f64) -> Result<Self> {
        if !(domain_upper > 0.0 && domain_upper.is_finite()) {
            return Err(Error::InvalidGauge(format!(
                "domain_upper = {domain_upper} must be positive"
            )));
        }
        let bad = |msg: String| Err(Error::InvalidGauge(msg));
        match &kind {
            GaugeKind::Zero => {}
            GaugeKind::Geometric { a, alpha } => {
                if !(*a > 0.0) || !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!(
                        "geometric gauge needs a > 0 and alpha in (0, 1], got a = {a}, alpha = {alpha}"
                    ));
                }
            }
            GaugeKind::LogGeometric { a, alpha } => {
                if !(*a > 0.0) || !(*alpha > 0.0) {
                    return bad(format!(
                        "log-geometric gauge needs a, alpha > 0, got a = {a}, alpha = {alpha}"
                    ));
                }
            }
            GaugeKind::LogInverse => {}
            GaugeKind::Tabulated { r_grid, xi_values } => {
                if r_grid.is_empty() || r_grid.len() != xi_values.len() {
                    return bad("tabulated gauge needs equally many radii and values".into());
                }
                if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("r_grid must be positive and strictly ascending".into());
                }
                if xi_values[0] < 0.0 || xi_values.windows(2).any(|w| w[0] > w[1]) {
                    return bad("xi_values must be nonnegative and nondecreasing".into());
                }
            }
            GaugeKind::Composed { inner, .. } => {
                if domain_upper > inner.domain_upper {
                    return bad("composed gauge cannot extend past its inner gauge".into());
                }
            }
        }
        if matches!(kind, GaugeKind::LogGeometric { .. } | GaugeKind::LogInverse) && domain_upper >= 1.0 {
            return bad(format!("logarithmic gauges need domain_upper < 1, got {domain_upper}"));
        }
        Ok(Self { kind, domain_upper })
    }

    pub fn zero(domain_upper: f64) -> Result<Self> {
        Self::new(GaugeKind::Zero, domain_upper)
    }

    pub fn geometric(a: f64, alpha: f64, domain_upper: f64) -> Result<Self> {
        Self::new(GaugeKind::Geometric { a, alpha }, domain_upper)
    }

    pub fn log_geometric(a: f64, alpha: f64, domain_upper: f64) -> Result<Self> {
        Self::new(GaugeKind::LogGeometric { a, alpha }, domain_upper)
    }

    pub fn log_inverse(domain_upper: f64) -> Result<Self> {
        Self::new(GaugeKind::LogInverse, domain_upper)
    }

    pub fn tabulated(r_grid: Vec<f64>, xi_values: Vec<f64>, domain_upper: f64) -> Result<Self> {
        Self::new(GaugeKind::Tabulated { r_grid, xi_values }, domain_upper)
    }

    /// `delta^-1 o inner` on the domain of `inner`.
    pub fn composed(curve: ModulusCurve, inner: Gauge) -> Result<Self> {
        let b = inner.domain_upper;
        Self::new(
            GaugeKind::Composed {
                curve,
                inner: Box::new(inner),
            },
            b,
        )
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn domain_upper(&self) -> f64 {
        self.domain_upper
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0 && r <= self.domain_upper * (1.0 + 1e-12)) {
            return Err(out_of_domain("r", r, format!("(0, {}]", self.domain_upper)));
        }
        Ok(())
    }

    /// `xi(r)` for `0 < r <= domain_upper`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        self.eval_unchecked(r)
    }

    fn eval_unchecked(&self, r: f64) -> Result<f64> {
        Ok(match &self.kind {
            GaugeKind::Zero => 0.0,
            GaugeKind::Geometric { a, alpha } => a * r.powf(*alpha),
            GaugeKind::LogGeometric { a, alpha } => a * r.ln().abs().powf(-1.0 - alpha),
            GaugeKind::LogInverse => 1.0 / r.ln().abs(),
            GaugeKind::Tabulated { r_grid, xi_values } => tabulated_eval(r_grid, xi_values, r),
            GaugeKind::Composed { curve, inner } => {
                let t = inner.eval_unchecked(r)?;
                if t <= 0.0 {
                    0.0
                } else {
                    curve.inverse(t)?
                }
            }
        })
    }

    /// Mean slope `zeta(r)`: closed form where one exists, quadrature otherwise.
    pub fn mean_slope(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        match &self.kind {
            GaugeKind::Zero => Ok(0.0),
            GaugeKind::Geometric { a, alpha } => Ok(a * r.powf(*alpha) / alpha),
            GaugeKind::LogGeometric { a, alpha } => Ok(a * r.ln().abs().powf(-alpha) / alpha),
            GaugeKind::LogInverse => Err(Error::NotDini),
            GaugeKind::Tabulated { r_grid, xi_values } => Ok(tabulated_mean_slope(r_grid, xi_values, r)),
            GaugeKind::Composed { .. } => self.mean_slope_numeric(r),
        }
    }

    /// Mean slope by quadrature in `log rho`, with the part below
    /// `min(1e-8, r/10)` integrated from a fitted model
    /// `xi(rho) ~ c rho^s |log rho|^-q`.
    pub fn mean_slope_numeric(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let h = HEAD_RADIUS.min(r / 10.0);
        let (lh, lr) = (h.ln(), r.ln());
        let xi = |sigma: f64| self.eval_unchecked(sigma.exp());
        // propagate evaluation errors out of the integrand
        let mut failure = None;
        let mut integrand = |sigma: f64| match xi(sigma) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let scale = self.eval_unchecked(r)?.max(f64::MIN_POSITIVE);
        let body = adaptive_simpson(&mut integrand, lh, lr, 1e-11 * scale);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(body + self.head_integral(lh)?)
    }

    /// `int_{-inf}^{sigma0} xi(e^sigma) d sigma` from a three-point fit of
    /// `log xi = log c + s sigma - q log|sigma|` on the decade above `e^sigma0`.
    fn head_integral(&self, sigma0: f64) -> Result<f64> {
        let sig = [
            sigma0,
            sigma0 + 0.5 * std::f64::consts::LN_10,
            sigma0 + std::f64::consts::LN_10,
        ];
        let vals = sig
            .iter()
            .map(|s| self.eval_unchecked(s.exp()))
            .collect::<Result<Vec<f64>>>()?;
        if vals[0] == 0.0 {
            return Ok(0.0);
        }
        if vals.iter().any(|v| *v <= 0.0) {
            return Err(Error::NotDini);
        }
        let rows = sig.map(|s| [1.0, s, -s.abs().ln()]);
        let rhs = [vals[0].ln(), vals[1].ln(), vals[2].ln()];
        let [_, s, q] = solve3(rows, rhs).ok_or(Error::NotDini)?;
        let (xi0, abs0) = (vals[0], sigma0.abs());
        if q.abs() < 1e-6 {
            return if s > 1e-9 { Ok(xi0 / s) } else { Err(Error::NotDini) };
        }
        if s.abs() <= 1e-8 {
            return if q > 1.0 + 1e-9 {
                Ok(xi0 * abs0 / (q - 1.0))
            } else {
                Err(Error::NotDini)
            };
        }
        if s < 0.0 {
            return Err(Error::NotDini);
        }
        // xi(e^(sigma0 - u)) = xi0 e^(-s u) (|sigma0 + ... |/|sigma0|)^-q, u >= 0
        let model = |u: f64| xi0 * (-s * u).exp() * ((abs0 + u) / abs0).powf(-q);
        Ok(adaptive_simpson(model, 0.0, 40.0 / s, 1e-12 * xi0 / s))
    }

    /// Tabulated mean slope on `r_grid`, as a gauge in its own right.
    pub fn mean_slope_gauge(&self, r_grid: &[f64]) -> Result<Gauge> {
        let values = r_grid
            .iter()
            .map(|&r| self.mean_slope(r))
            .collect::<Result<Vec<f64>>>()?;
        let mut monotone = values;
        for i in 1..monotone.len() {
            monotone[i] = monotone[i].max(monotone[i - 1]);
        }
        let upper = *r_grid.last().ok_or_else(|| Error::InvalidGauge("empty grid".into()))?;
        Gauge::tabulated(r_grid.to_vec(), monotone, upper.min(self.domain_upper))
    }

    /// Known Dini verdict for the closed-form variants.
    pub fn analytic_dini(&self) -> Option<bool> {
        match &self.kind {
            GaugeKind::Zero | GaugeKind::Geometric { .. } | GaugeKind::LogGeometric { .. } => Some(true),
            GaugeKind::LogInverse => Some(false),
            // linear below the grid, hence geometric near zero
            GaugeKind::Tabulated { .. } => Some(true),
            GaugeKind::Composed { .. } => None,
        }
    }

    /// Dyadic-series test: `sum_j xi(beta^-j)` converges iff the gauge is Dini.
    ///
    /// Terms whose radius exceeds `domain_upper` are skipped. Closed-form
    /// variants return their analytic verdict; otherwise the Raabe statistic
    /// `j (t_j / t_{j+1} - 1)` must exceed 1.05 on the last 8 terms, looking
    /// out to index `max(J, 64)`.
    pub fn dini_test(&self, beta: f64, terms: usize) -> Result<DiniVerdict> {
        if !(beta > 1.0) {
            return Err(out_of_domain("beta", beta, "(1, inf)"));
        }
        if terms < 8 {
            return Err(Error::InvalidInput(format!("dini test needs J >= 8, got {terms}")));
        }
        let upper = terms.max(RAABE_MIN_TERMS);
        let mut series = Vec::with_capacity(upper + 1);
        for j in 0..=upper {
            let r = beta.powi(-(j as i32));
            if r <= self.domain_upper {
                series.push((j, self.eval_unchecked(r)?));
            }
        }
        let partial_sum = series.iter().filter(|(j, _)| *j <= terms).map(|(_, t)| t).sum();
        let is_dini = match self.analytic_dini() {
            Some(v) => v,
            None => raabe_summable(&series),
        };
        let tail_bound = if is_dini {
            self.mean_slope(beta.powi(-(terms as i32)).min(self.domain_upper))
                .ok()
                .map(|z| beta / (beta - 1.0) * z)
        } else {
            None
        };
        Ok(DiniVerdict {
            is_dini,
            partial_sum,
            tail_bound,
        })
    }
}

fn raabe_summable(series: &[(usize, f64)]) -> bool {
    if series.len() < 9 {
        return false;
    }
    series[series.len() - 9..].windows(2).all(|w| {
        let ((j, t0), (_, t1)) = (w[0], w[1]);
        t1 == 0.0 || (j as f64) * (t0 / t1 - 1.0) > RAABE_THRESHOLD
    })
}

fn tabulated_eval(r_grid: &[f64], xi: &[f64], r: f64) -> f64 {
    let k = r_grid.partition_point(|&g| g <= r);
    if k == 0 {
        return xi[0] * r / r_grid[0];
    }
    if k == r_grid.len() {
        return xi[k - 1];
    }
    let (r0, r1, x0, x1) = (r_grid[k - 1], r_grid[k], xi[k - 1], xi[k]);
    x0 + (x1 - x0) * (r - r0) / (r1 - r0)
}

/// Exact integral of `xi(rho)/rho` for the piecewise linear interpolant.
fn tabulated_mean_slope(r_grid: &[f64], xi: &[f64], r: f64) -> f64 {
    let mut total = xi[0] * r.min(r_grid[0]) / r_grid[0];
    for i in 0..r_grid.len() {
        let lo = r_grid[i];
        if lo >= r {
            break;
        }
        let (hi, slope) = if i + 1 < r_grid.len() {
            (r_grid[i + 1].min(r), (xi[i + 1] - xi[i]) / (r_grid[i + 1] - lo))
        } else {
            (r, 0.0)
        };
        // xi(rho) = c0 + slope rho on [lo, hi]
        let c0 = xi[i] - slope * lo;
        total += c0 * (hi / lo).ln() + slope * (hi - lo);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{NormSpec, SearchParams};
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eval_examples() {
        let g = Gauge::geometric(1.0, 0.5, 1.0).unwrap();
        assert_eq!(g.eval(0.25).unwrap(), 0.5);
        let lg = Gauge::log_geometric(1.0, 1.0, 0.5).unwrap();
        assert!((lg.eval(E.powi(-2)).unwrap() - 0.25).abs() < 1e-15);
        assert!(g.eval(0.0).is_err());
        assert!(g.eval(1.5).is_err());
    }

    #[test]
    fn mean_slope_examples() {
        let g = Gauge::geometric(1.0, 0.5, 1.0).unwrap();
        assert_eq!(g.mean_slope(0.25).unwrap(), 1.0);
        let lg = Gauge::log_geometric(1.0, 1.0, 0.5).unwrap();
        assert!((lg.mean_slope(E.powi(-2)).unwrap() - 0.5).abs() < 1e-15);
        let li = Gauge::log_inverse(0.5).unwrap();
        assert!(matches!(li.mean_slope(0.1), Err(Error::NotDini)));
        assert!(matches!(li.mean_slope_numeric(0.1), Err(Error::NotDini)));
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let gauges = [
            Gauge::geometric(1.0, 0.5, 1.0).unwrap(),
            Gauge::geometric(3.0, 1.0, 1.0).unwrap(),
            Gauge::geometric(0.2, 0.1, 1.0).unwrap(),
            Gauge::log_geometric(1.0, 1.0, 0.5).unwrap(),
            Gauge::log_geometric(2.0, 0.5, 0.5).unwrap(),
        ];
        for g in &gauges {
            for k in 2..=20 {
                let r = 2f64.powi(-k);
                let exact = g.mean_slope(r).unwrap();
                let numeric = g.mean_slope_numeric(r).unwrap();
                assert!(rel(numeric, exact) < 1e-6, "{g:?} r={r}: {numeric} vs {exact}");
            }
        }
    }

    #[test]
    fn tabulated_interpolation_and_slope() {
        let g = Gauge::tabulated(vec![0.1, 0.2, 0.4], vec![0.1, 0.3, 0.3], 1.0).unwrap();
        assert!((g.eval(0.05).unwrap() - 0.05).abs() < 1e-15);
        assert!((g.eval(0.15).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(g.eval(0.9).unwrap(), 0.3);
        for r in [0.05, 0.15, 0.3, 0.9] {
            let a = g.mean_slope(r).unwrap();
            let b = g.mean_slope_numeric(r).unwrap();
            assert!(rel(b, a) < 1e-6, "r={r}: {a} vs {b}");
        }
        assert!(Gauge::tabulated(vec![0.1, 0.2], vec![0.3, 0.1], 1.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(Gauge::geometric(1.0, 1.5, 1.0).is_err());
        assert!(Gauge::geometric(-1.0, 0.5, 1.0).is_err());
        assert!(Gauge::log_inverse(1.0).is_err());
        assert!(Gauge::zero(0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g: Gauge = serde_json::from_str(r#"{"kind":"geometric","a":1.0,"alpha":0.5}"#).unwrap();
        assert_eq!(g, Gauge::geometric(1.0, 0.5, 1.0).unwrap());
        let back: Gauge = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Gauge>(r#"{"kind":"geometric","a":1.0,"alpha":2.0}"#).is_err());
    }

    fn euclid_curve() -> ModulusCurve {
        let e = NormSpec::euclidean(2).unwrap();
        let params = SearchParams {
            grid: 512,
            ..SearchParams::default()
        };
        ModulusCurve::tabulate(&e, &ModulusCurve::default_grid(), &params).unwrap()
    }

    #[test]
    fn composed_example() {
        let g = Gauge::composed(euclid_curve(), Gauge::geometric(1.0, 1.0, 1.0).unwrap()).unwrap();
        let oracle = crate::numeric::bisect(|e| 1.0 - (1.0 - e * e / 4.0).sqrt() - 0.01, 0.0, 2.0, 1e-15);
        assert!((g.eval(0.01).unwrap() - oracle).abs() < 1e-4);
        // delta^-1(t) ~ sqrt(8 t): mean slope ~ 2 xi
        let z = g.mean_slope(1e-4).unwrap();
        assert!(rel(z, 2.0 * g.eval(1e-4).unwrap()) < 1e-2, "{z}");
    }

    #[test]
    fn dini_verdicts() {
        let g = Gauge::geometric(1.0, 0.5, 1.0).unwrap();
        let v = g.dini_test(2.0, 20).unwrap();
        assert!(v.is_dini);
        let expected: f64 = (0..=20).map(|j| 2f64.powf(-0.5 * j as f64)).sum();
        assert!((v.partial_sum - expected).abs() < 1e-12);
        let tail: f64 = (21..2000).map(|j| 2f64.powf(-0.5 * j as f64)).sum();
        assert!(v.tail_bound.unwrap() >= tail);

        let li = Gauge::log_inverse(0.5).unwrap();
        let v = li.dini_test(2.0, 20).unwrap();
        assert!(!v.is_dini && v.tail_bound.is_none());

        let l4 = NormSpec::lp(4.0, 2).unwrap();
        let params = SearchParams {
            grid: 512,
            ..SearchParams::default()
        };
        let curve = ModulusCurve::tabulate(&l4, &ModulusCurve::default_grid(), &params).unwrap();
        let c = Gauge::composed(curve, Gauge::geometric(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(c.dini_test(2.0, 16).unwrap().is_dini);
    }

    #[test]
    fn raabe_rejects_harmonic_series() {
        let harmonic: Vec<(usize, f64)> = (1..80).map(|j| (j, 1.0 / j as f64)).collect();
        assert!(!raabe_summable(&harmonic));
        let square: Vec<(usize, f64)> = (1..80).map(|j| (j, 1.0 / (j * j) as f64)).collect();
        assert!(raabe_summable(&square));
    }

    #[test]
    fn dyadic_sandwich() {
        let gauges = [
            Gauge::geometric(1.0, 0.5, 1.0).unwrap(),
            Gauge::log_geometric(1.0, 1.0, 0.5).unwrap(),
            Gauge::tabulated(vec![0.01, 0.1], vec![0.05, 0.2], 1.0).unwrap(),
        ];
        for g in &gauges {
            for k in 4..30 {
                let r = 2f64.powi(-k);
                if 4.0 * r <= g.domain_upper() {
                    assert!(g.eval(r).unwrap() <= 2.0 * g.mean_slope(4.0 * r).unwrap());
                }
            }
        }
    }
}
