//! Weight fields `w`, the domains of the quasihyperbolic weight `1/h`, and the
//! almost-minimality gauge `xi(r) = osc(w, r) (a + b) / a^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{out_of_domain, Error, Result};
use crate::gauge::Gauge;
use crate::norm::NormSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `(-W/2, W/2) x (0, H)`: a bounded stand-in for the upper half-plane.
    HalfPlaneWindow {
        height: f64,
        width: f64,
    },
}

/// A bounded open convex set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr")]
pub struct Domain {
    #[serde(flatten)]
    kind: DomainKind,
    norm: NormSpec,
}

#[derive(Deserialize)]
struct DomainRepr {
    #[serde(flatten)]
    kind: DomainKind,
    norm: NormSpec,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        Domain::new(r.kind, r.norm)
    }
}

impl Domain {
    pub fn new(kind: DomainKind, norm: NormSpec) -> Result<Self> {
        let dim = norm.dim();
        let bad = |m: String| Err(Error::InvalidDomain(m));
        match &kind {
            DomainKind::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return bad(format!("box corners must have dimension {dim}"));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return bad("box needs lo < hi in every coordinate".into());
                }
            }
            DomainKind::Ball { center, radius } => {
                if center.len() != dim {
                    return bad(format!("ball center must have dimension {dim}"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("ball radius {radius} must be positive"));
                }
            }
            DomainKind::HalfPlaneWindow { height, width } => {
                if dim != 2 {
                    return bad("half-plane window is planar".into());
                }
                if !(*height > 0.0 && *width > 0.0 && height.is_finite() && width.is_finite()) {
                    return bad("half-plane window needs positive height and width".into());
                }
            }
        }
        Ok(Self { kind, norm })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, norm: NormSpec) -> Result<Self> {
        Self::new(DomainKind::Box { lo, hi }, norm)
    }

    pub fn ball(center: Vec<f64>, radius: f64, norm: NormSpec) -> Result<Self> {
        Self::new(DomainKind::Ball { center, radius }, norm)
    }

    pub fn half_plane_window(height: f64, width: f64, norm: NormSpec) -> Result<Self> {
        Self::new(DomainKind::HalfPlaneWindow { height, width }, norm)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    /// Box corners for the polyhedral kinds.
    fn corners(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            DomainKind::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            DomainKind::HalfPlaneWindow { height, width } => {
                Some((vec![-0.5 * width, 0.0], vec![0.5 * width, *height]))
            }
            DomainKind::Ball { .. } => None,
        }
    }

    /// `h(x) = dist(x, X \ D)`, negative outside. For boxes the distance to
    /// the complement is the smallest wall distance in every `l_p` norm.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => radius - self.norm.dist(x, center),
            _ => {
                let (lo, hi) = self.corners().unwrap_or_default();
                lo.iter()
                    .zip(&hi)
                    .zip(x)
                    .map(|((l, h), xi)| (xi - l).min(h - xi))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boundary_distance(x) > 0.0
    }

    /// `sup h`, the inradius.
    pub fn inradius(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => *radius,
            _ => {
                let (lo, hi) = self.corners().unwrap_or_default();
                lo.iter()
                    .zip(&hi)
                    .map(|(l, h)| 0.5 * (h - l))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => 2.0 * radius,
            _ => {
                let (lo, hi) = self.corners().unwrap_or_default();
                self.norm.dist(&lo, &hi)
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                // unit balls of l_p norms fit in the unit cube
                (
                    center.iter().map(|c| c - radius).collect(),
                    center.iter().map(|c| c + radius).collect(),
                )
            }
            _ => self.corners().unwrap_or_default(),
        }
    }

    /// Points whose convex hull is the closure (corners), or a dense sample of
    /// the boundary sphere for balls.
    fn extreme_points(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                let d = center.len();
                let mut out = Vec::new();
                if d == 2 {
                    for i in 0..4096 {
                        let u = crate::norm::unit_direction(&self.norm, 2.0 * PI * i as f64 / 4096.0);
                        out.push(vec![center[0] + radius * u[0], center[1] + radius * u[1]]);
                    }
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(7);
                    for _ in 0..4096 * d {
                        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let n = self.norm.norm(&v);
                        if n > 1e-6 {
                            out.push(center.iter().zip(&v).map(|(c, x)| c + radius * x / n).collect());
                        }
                    }
                }
                out
            }
            _ => {
                let (lo, hi) = self.corners().unwrap_or_default();
                let d = lo.len();
                (0..1usize << d)
                    .map(|mask| (0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
                    .collect()
            }
        }
    }

    /// `min h` over the closure of `region`; `h` is concave so the minimum
    /// sits at an extreme point.
    pub fn min_boundary_distance_on(&self, region: &Domain) -> f64 {
        region
            .extreme_points()
            .iter()
            .map(|p| self.boundary_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// An upper bound for `max h` over `region`, exact for ball domains.
    pub fn max_boundary_distance_on(&self, region: &Domain) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => radius - region.distance_from(center),
            _ => {
                // h is the minimum of the wall distances, each affine
                let (lo, hi) = self.corners().unwrap_or_default();
                let pts = region.extreme_points();
                let mut bound = f64::INFINITY;
                for k in 0..lo.len() {
                    let below = pts.iter().map(|p| p[k] - lo[k]).fold(f64::NEG_INFINITY, f64::max);
                    let above = pts.iter().map(|p| hi[k] - p[k]).fold(f64::NEG_INFINITY, f64::max);
                    bound = bound.min(below).min(above);
                }
                bound.min(self.inradius())
            }
        }
    }

    /// `dist(x, closure of self)`.
    pub fn distance_from(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => (self.norm.dist(x, center) - radius).max(0.0),
            _ => {
                let (lo, hi) = self.corners().unwrap_or_default();
                // coordinate clamping is the nearest point in every l_p norm
                let nearest: Vec<f64> = x
                    .iter()
                    .zip(lo.iter().zip(&hi))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect();
                self.norm.dist(x, &nearest)
            }
        }
    }

    /// `max ||x - y||` over `y` in the closure.
    pub fn farthest_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => self.norm.dist(x, center) + radius,
            _ => self
                .extreme_points()
                .iter()
                .map(|p| self.norm.dist(x, p))
                .fold(0.0, f64::max),
        }
    }

    /// Uniform sample from the domain by rejection from the bounding box.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let (lo, hi) = self.bounding_box();
        loop {
            let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..*h)).collect();
            if self.contains(&x) {
                return x;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Constant {
        c: f64,
    },
    /// `max(clamp_min, g . x + offset)`
    Affine {
        gradient: Vec<f64>,
        offset: f64,
        clamp_min: f64,
    },
    /// `c + a ||x - anchor||^alpha`, Euclidean unless a norm is attached.
    Holder {
        c: f64,
        a: f64,
        alpha: f64,
        anchor: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
    /// `1 / h`, the quasihyperbolic weight of `domain`.
    InverseBoundaryDistance {
        domain: Domain,
    },
}

/// Lower and (possibly infinite) upper bound of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBounds(pub f64, pub Option<f64>);

impl WeightBounds {
    pub fn lower(&self) -> f64 {
        self.0
    }

    pub fn upper(&self) -> Option<f64> {
        self.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr")]
pub struct WeightField {
    #[serde(flatten)]
    kind: WeightKind,
    bounds: WeightBounds,
}

#[derive(Deserialize)]
struct WeightRepr {
    #[serde(flatten)]
    kind: WeightKind,
    #[serde(default)]
    bounds: Option<WeightBounds>,
}

impl TryFrom<WeightRepr> for WeightField {
    type Error = Error;
    fn try_from(r: WeightRepr) -> Result<Self> {
        WeightField::new(r.kind, r.bounds)
    }
}

/// Result of an oscillation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    pub value: f64,
    /// `true` when `value` is a sampled lower estimate rather than a closed form.
    pub sampled: bool,
}

/// Parameters of the sampled oscillation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            pairs: 20_000,
            seed: 42,
        }
    }
}

impl WeightField {
    /// Validates the parameters; natural bounds are used when `bounds` is `None`.
    pub fn new(kind: WeightKind, bounds: Option<WeightBounds>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidWeight(m));
        let natural = match &kind {
            WeightKind::Constant { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return bad(format!("constant weight {c} must be positive"));
                }
                WeightBounds(*c, Some(*c))
            }
            WeightKind::Affine {
                clamp_min,
                gradient,
                offset,
            } => {
                if !(*clamp_min > 0.0) || gradient.iter().chain([offset]).any(|v| !v.is_finite()) {
                    return bad("affine weight needs finite coefficients and clamp_min > 0".into());
                }
                let upper = gradient.iter().all(|g| *g == 0.0).then(|| clamp_min.max(*offset));
                WeightBounds(*clamp_min, upper)
            }
            WeightKind::Holder { c, a, alpha, .. } => {
                if !(*c > 0.0 && *a > 0.0 && *alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!(
                        "holder weight needs c, a > 0 and alpha in (0, 1], got c = {c}, a = {a}, alpha = {alpha}"
                    ));
                }
                WeightBounds(*c, None)
            }
            WeightKind::InverseBoundaryDistance { domain } => WeightBounds(1.0 / domain.inradius(), None),
        };
        let bounds = bounds.unwrap_or(natural);
        if !(bounds.0 > 0.0) || bounds.1.is_some_and(|b| !(b >= bounds.0)) {
            return bad(format!("bounds need 0 < a_lo <= b_hi, got {bounds:?}"));
        }
        Ok(Self { kind, bounds })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightKind::Constant { c }, None)
    }

    pub fn holder(c: f64, a: f64, alpha: f64, anchor: Vec<f64>) -> Result<Self> {
        Self::new(
            WeightKind::Holder {
                c,
                a,
                alpha,
                anchor,
                norm: None,
            },
            None,
        )
    }

    pub fn affine(gradient: Vec<f64>, offset: f64, clamp_min: f64) -> Result<Self> {
        Self::new(
            WeightKind::Affine {
                gradient,
                offset,
                clamp_min,
            },
            None,
        )
    }

    pub fn inverse_boundary_distance(domain: Domain) -> Result<Self> {
        Self::new(WeightKind::InverseBoundaryDistance { domain }, None)
    }

    pub fn with_bounds(self, lower: f64, upper: Option<f64>) -> Result<Self> {
        Self::new(self.kind, Some(WeightBounds(lower, upper)))
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn bounds(&self) -> WeightBounds {
        self.bounds
    }

    /// The open set where the weight is finite, when it is not all of space.
    pub fn domain(&self) -> Option<&Domain> {
        match &self.kind {
            WeightKind::InverseBoundaryDistance { domain } => Some(domain),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, WeightKind::Constant { .. })
    }

    /// `w(x)`; errors outside the domain of the quasihyperbolic weight.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match &self.kind {
            WeightKind::Constant { c } => Ok(*c),
            WeightKind::Affine {
                gradient,
                offset,
                clamp_min,
            } => {
                check_dim(gradient.len(), x)?;
                Ok(clamp_min.max(crate::numeric::dot(gradient, x) + offset))
            }
            WeightKind::Holder {
                c,
                a,
                alpha,
                anchor,
                norm,
            } => {
                check_dim(anchor.len(), x)?;
                let d = match norm {
                    Some(n) => n.dist(x, anchor),
                    None => crate::numeric::euclid_dist(x, anchor),
                };
                Ok(c + a * d.powf(*alpha))
            }
            WeightKind::InverseBoundaryDistance { domain } => {
                check_dim(domain.norm().dim(), x)?;
                let h = domain.boundary_distance(x);
                if h <= 0.0 {
                    return Err(Error::OutsideDomain(h));
                }
                Ok(1.0 / h)
            }
        }
    }

    /// Measures Holder anchor distances in `ambient` unless a norm is already set.
    pub fn in_norm(mut self, ambient: &NormSpec) -> Self {
        if let WeightKind::Holder { norm, .. } = &mut self.kind {
            norm.get_or_insert_with(|| ambient.clone());
        }
        self
    }

    /// Bounds of the weight over `region`, intersected with the declared bounds.
    pub fn bounds_on(&self, region: &Domain) -> Result<WeightBounds> {
        let norm = region.norm();
        let (lo, hi) = match &self.kind {
            WeightKind::Constant { c } => (*c, Some(*c)),
            WeightKind::Affine {
                gradient,
                offset,
                clamp_min,
            } => {
                check_dim(gradient.len(), &vec![0.0; norm.dim()])?;
                let (min, max) = match region.kind() {
                    DomainKind::Ball { center, radius } => {
                        let mid = crate::numeric::dot(gradient, center) + offset;
                        let spread = norm.dual_norm(gradient) * radius;
                        (mid - spread, mid + spread)
                    }
                    _ => region
                        .extreme_points()
                        .iter()
                        .map(|p| crate::numeric::dot(gradient, p) + offset)
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v))),
                };
                (clamp_min.max(min), Some(clamp_min.max(max)))
            }
            WeightKind::Holder {
                c, a, alpha, anchor, ..
            } => {
                let near = region.distance_from(anchor);
                let far = region.farthest_distance(anchor);
                (c + a * near.powf(*alpha), Some(c + a * far.powf(*alpha)))
            }
            WeightKind::InverseBoundaryDistance { domain } => {
                let eta = domain.min_boundary_distance_on(region);
                let top = domain.max_boundary_distance_on(region);
                (1.0 / top, (eta > 0.0).then(|| 1.0 / eta))
            }
        };
        let lower = lo.max(self.bounds.0);
        let upper = match (hi, self.bounds.1) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(WeightBounds(lower, upper))
    }

    /// `osc(w, r)` over pairs in `region` at distance at most `r`.
    pub fn oscillation(&self, r: f64, region: &Domain) -> Result<Oscillation> {
        self.oscillation_with(r, region, &SamplingParams::default())
    }

    pub fn oscillation_with(&self, r: f64, region: &Domain, params: &SamplingParams) -> Result<Oscillation> {
        if !(r > 0.0) {
            return Err(out_of_domain("r", r, "(0, inf)"));
        }
        let exact = |value: f64| Ok(Oscillation { value, sampled: false });
        match &self.kind {
            WeightKind::Constant { .. } => exact(0.0),
            WeightKind::Affine { gradient, .. } => {
                let b = self.bounds_on(region)?;
                let range = b.upper().map_or(f64::INFINITY, |u| u - b.lower());
                exact((region.norm().dual_norm(gradient) * r).min(range))
            }
            WeightKind::Holder { a, alpha, .. } => exact(a * r.min(region.diameter()).powf(*alpha)),
            WeightKind::InverseBoundaryDistance { domain } => {
                let norm = region.norm();
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                let mut worst: f64 = 0.0;
                let inside = |x: &[f64]| region.contains(x) && domain.contains(x);
                for _ in 0..params.pairs {
                    let x = region.sample(&mut rng);
                    if !domain.contains(&x) {
                        continue;
                    }
                    let dir: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let len = norm.norm(&dir);
                    if len < 1e-9 {
                        continue;
                    }
                    let s = r * rng.gen_range(0.0..=1.0) / len;
                    let y: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + s * di).collect();
                    if inside(&y) {
                        worst = worst.max((self.eval(&x)? - self.eval(&y)?).abs());
                    }
                }
                Ok(Oscillation {
                    value: worst,
                    sampled: true,
                })
            }
        }
    }

    /// The gauge `xi(r) = osc(w, r) (a + b) / a^2` with `[a, b]` the weight
    /// bounds over `region`.
    pub fn minimality_gauge(&self, region: &Domain) -> Result<Gauge> {
        let b = self.bounds_on(region)?;
        let upper = b.upper().ok_or(Error::UnboundedWeight)?;
        let lower = b.lower();
        let factor = (lower + upper) / (lower * lower);
        let span = region.diameter();
        let lipschitz = |l: f64| {
            if l == 0.0 {
                Gauge::zero(span)
            } else {
                Gauge::geometric(l * factor, 1.0, span)
            }
        };
        match &self.kind {
            WeightKind::Constant { .. } => Gauge::zero(span),
            WeightKind::Holder { a, alpha, .. } => Gauge::geometric(a * factor, *alpha, span),
            WeightKind::Affine { gradient, .. } => lipschitz(region.norm().dual_norm(gradient)),
            WeightKind::InverseBoundaryDistance { domain } => {
                // 1/h is eta^-2 Lipschitz on {h > eta}
                let eta = domain.min_boundary_distance_on(region);
                if eta <= 0.0 {
                    return Err(Error::UnboundedWeight);
                }
                lipschitz(eta.powi(-2))
            }
        }
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}
