//! Finite-dimensional norms of the `l_p` family and their moduli of rotundity.
//!
//! The global modulus `delta(eps)` is computed by brute force over pairs of
//! unit vectors in a plane: for each point `x` of a fine angular grid on the
//! unit circle we locate, by bisection, the first point `y` reached while
//! walking counter-clockwise with `||x - y|| = eps`, and record the midpoint
//! depth `1 - ||(x + y) / 2||`. The best grid cells are then refined with a
//! golden-section search. In dimension above two the search is repeated on
//! two-dimensional sections (all coordinate planes first, then random ones),
//! which gives an upper bound on the true modulus that is exact for `l_p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{out_of_domain, Error, Result};
use crate::numeric::golden_min;

/// Smallest and largest finite exponent accepted for the `lp` family.
pub const P_MIN: f64 = 1.1;
pub const P_MAX: f64 = 16.0;

/// Threshold on the tangential second derivative above which a direction is
/// declared a point of positive curvature of the unit circle.
pub const CURVATURE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    Lp,
    Linf,
    Euclidean,
}

/// A norm on `R^dim`: `l_p` for `1 < p < inf`, `l_inf`, or Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpecRepr")]
pub struct NormSpec {
    family: NormFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormSpecRepr {
    family: NormFamily,
    #[serde(default)]
    p: Option<f64>,
    dim: usize,
}

impl TryFrom<NormSpecRepr> for NormSpec {
    type Error = Error;

    fn try_from(r: NormSpecRepr) -> Result<Self> {
        match r.family {
            NormFamily::Lp => {
                let p =
                    r.p.ok_or_else(|| Error::InvalidNorm("family lp requires field p".into()))?;
                NormSpec::lp(p, r.dim)
            }
            NormFamily::Linf | NormFamily::Euclidean if r.p.is_some() => {
                Err(Error::InvalidNorm("field p is only allowed for family lp".into()))
            }
            NormFamily::Linf => NormSpec::linf(r.dim),
            NormFamily::Euclidean => NormSpec::euclidean(r.dim),
        }
    }
}

impl NormSpec {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        if !(P_MIN..=P_MAX).contains(&p) {
            return Err(Error::InvalidNorm(format!(
                "p = {p} outside the supported range [{P_MIN}, {P_MAX}]"
            )));
        }
        Self::checked(NormFamily::Lp, Some(p), dim)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::checked(NormFamily::Linf, None, dim)
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::checked(NormFamily::Euclidean, None, dim)
    }

    fn checked(family: NormFamily, p: Option<f64>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidNorm(format!("dim = {dim}, need at least 2")));
        }
        Ok(Self { family, p, dim })
    }

    pub fn family(&self) -> NormFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The exponent `p`, with `None` standing for `p = inf`.
    pub fn exponent(&self) -> Option<f64> {
        match self.family {
            NormFamily::Lp => self.p,
            NormFamily::Euclidean => Some(2.0),
            NormFamily::Linf => None,
        }
    }

    /// Uniformly rotund: every finite exponent in the supported range.
    pub fn is_rotund(&self) -> bool {
        self.exponent().is_some()
    }

    /// Twice differentiable away from the origin.
    pub fn is_smooth(&self) -> bool {
        matches!(self.exponent(), Some(p) if p >= 2.0)
    }

    /// Short human-readable label, e.g. `l3^2`.
    pub fn label(&self) -> String {
        match self.family {
            NormFamily::Lp => format!("l{}^{}", self.p.unwrap_or(f64::NAN), self.dim),
            NormFamily::Linf => format!("linf^{}", self.dim),
            NormFamily::Euclidean => format!("l2^{}", self.dim),
        }
    }

    /// `||x||`, checking the dimension.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.norm(x))
    }

    /// `||x||` without the dimension check.
    #[inline]
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.norm_with(x.len(), |i| x[i])
    }

    /// `||a - b||`
    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm_with(a.len(), |i| a[i] - b[i])
    }

    /// Norm of the vector whose `i`-th component is `comp(i)`, `i < n`.
    #[inline]
    pub fn norm_with<F: Fn(usize) -> f64>(&self, n: usize, comp: F) -> f64 {
        match self.exponent() {
            None => (0..n).map(|i| comp(i).abs()).fold(0.0, f64::max),
            Some(p) => lp_norm(n, comp, p),
        }
    }

    /// Dual norm `||g||_*` of a linear form given by its coefficients.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        match self.exponent() {
            None => g.iter().map(|x| x.abs()).sum(),
            Some(p) => lp_norm(g.len(), |i| g[i], p / (p - 1.0)),
        }
    }

    fn require_planar(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::InvalidNorm(format!(
                "operation needs a planar norm, got dim = {}",
                self.dim
            )));
        }
        Ok(())
    }

    fn require_unit(&self, v: &[f64]) -> Result<()> {
        let n = self.eval(v)?;
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("expected a unit vector, ||v|| = {n}")));
        }
        Ok(())
    }
}

#[inline]
fn lp_norm<F: Fn(usize) -> f64>(n: usize, comp: F, p: f64) -> f64 {
    let m = (0..n).map(|i| comp(i).abs()).fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if p == 2.0 {
        let s: f64 = (0..n).map(|i| (comp(i) / m).powi(2)).sum();
        return m * s.sqrt();
    }
    let s: f64 = (0..n).map(|i| (comp(i).abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Parameters of the brute-force modulus search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    /// Angular grid size on the unit circle.
    pub grid: usize,
    /// Golden-section tolerance on the refined angle.
    pub tol: f64,
    /// Number of two-dimensional sections examined when `dim > 2`.
    pub sections: usize,
    /// Number of grid minima refined.
    pub refine: usize,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            grid: 2048,
            tol: 1e-8,
            sections: 256,
            refine: 6,
            seed: 42,
        }
    }
}

/// Unit circle of a planar norm, parametrized by the Euclidean angle.
struct UnitCircle<N> {
    norm: N,
}

impl<N: Fn(f64, f64) -> f64 + Sync> UnitCircle<N> {
    #[inline]
    fn point(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let n = (self.norm)(c, s);
        (c / n, s / n)
    }

    #[inline]
    fn dist(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        (self.norm)(a.0 - b.0, a.1 - b.1)
    }

    /// Smallest counter-clockwise angular offset `phi` in `[0, pi]` at which
    /// the point `point(theta + phi)` is at distance `eps` from `point(theta)`.
    fn partner_offset(&self, theta: f64, eps: f64) -> f64 {
        let x = self.point(theta);
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.dist(x, self.point(theta + mid)) >= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn depth(&self, theta: f64, eps: f64) -> f64 {
        let x = self.point(theta);
        let y = self.point(theta + self.partner_offset(theta, eps));
        1.0 - (self.norm)(0.5 * (x.0 + y.0), 0.5 * (x.1 + y.1))
    }

    /// Global modulus of this planar norm.
    fn modulus(&self, eps: f64, params: &SearchParams) -> f64 {
        let n = params.grid.max(8);
        let step = 2.0 * PI / n as f64;
        let depths: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| self.depth(i as f64 * step, eps))
            .collect();
        let mut best = depths.iter().copied().fold(f64::INFINITY, f64::min);

        // refine around the lowest local minima of the grid
        let mut minima: Vec<usize> = (0..n)
            .filter(|&i| {
                let prev = depths[(i + n - 1) % n];
                let next = depths[(i + 1) % n];
                depths[i] <= prev && depths[i] <= next
            })
            .collect();
        minima.sort_by(|&a, &b| depths[a].total_cmp(&depths[b]).then(a.cmp(&b)));
        for &i in minima.iter().take(params.refine.max(1)) {
            let center = i as f64 * step;
            let (_, v) = golden_min(|t| self.depth(t, eps), center - step, center + step, params.tol);
            best = best.min(v);
        }
        best.clamp(0.0, 1.0)
    }
}

/// Modulus of uniform rotundity `delta(eps)` of `spec`, `0 < eps <= 2`.
pub fn modulus_of_convexity(spec: &NormSpec, eps: f64, params: &SearchParams) -> Result<f64> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(out_of_domain("eps", eps, "(0, 2]"));
    }
    if spec.dim == 2 {
        let circle = UnitCircle {
            norm: |a: f64, b: f64| spec.norm_with(2, |i| if i == 0 { a } else { b }),
        };
        return Ok(circle.modulus(eps, params));
    }
    Ok(sections(spec, params)
        .iter()
        .map(|(e1, e2)| {
            let circle = UnitCircle {
                norm: |a: f64, b: f64| spec.norm_with(spec.dim, |i| a * e1[i] + b * e2[i]),
            };
            circle.modulus(eps, params)
        })
        .fold(1.0, f64::min))
}

/// Orthonormal (Euclidean) pairs spanning the sections searched in `dim > 2`:
/// all coordinate planes, then random planes up to `params.sections`.
fn sections(spec: &NormSpec, params: &SearchParams) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = spec.dim;
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut e1 = vec![0.0; d];
            let mut e2 = vec![0.0; d];
            e1[i] = 1.0;
            e2[j] = 1.0;
            out.push((e1, e2));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    while out.len() < params.sections.max(out.len()) {
        let a = random_unit(&mut rng, d);
        let b = random_unit(&mut rng, d);
        let proj: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let mut b: Vec<f64> = b.iter().zip(&a).map(|(y, x)| y - proj * x).collect();
        let nb = crate::numeric::euclid(&b);
        if nb < 1e-6 {
            continue;
        }
        b.iter_mut().for_each(|x| *x /= nb);
        out.push((a, b));
    }
    out
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = crate::numeric::euclid(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Tabulated modulus of rotundity on an ascending grid of `eps` values.
///
/// Stored values form a nondecreasing lower envelope of the brute-force
/// samples, so the curve can be used as a lower bound for `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusCurveRepr")]
pub struct ModulusCurve {
    eps_grid: Vec<f64>,
    delta_values: Vec<f64>,
    norm: NormSpec,
}

#[derive(Deserialize)]
struct ModulusCurveRepr {
    eps_grid: Vec<f64>,
    delta_values: Vec<f64>,
    norm: NormSpec,
}

impl TryFrom<ModulusCurveRepr> for ModulusCurve {
    type Error = Error;
    fn try_from(r: ModulusCurveRepr) -> Result<Self> {
        ModulusCurve::from_parts(r.eps_grid, r.delta_values, r.norm)
    }
}

impl ModulusCurve {
    /// `2^(k/6)` for `k = -60..=6`: sixth-octave steps from `2^-10` to `2`,
    /// with `eps = 1` exactly on the grid.
    pub fn default_grid() -> Vec<f64> {
        (-60..=6).map(|k| 2f64.powf(f64::from(k) / 6.0)).collect()
    }

    /// Computes the modulus of `spec` on `eps_grid`.
    pub fn tabulate(spec: &NormSpec, eps_grid: &[f64], params: &SearchParams) -> Result<Self> {
        let mut values = eps_grid
            .iter()
            .map(|&e| modulus_of_convexity(spec, e, params))
            .collect::<Result<Vec<f64>>>()?;
        // lower envelope: a suffix minimum keeps the curve nondecreasing
        for i in (0..values.len().saturating_sub(1)).rev() {
            values[i] = values[i].min(values[i + 1]);
        }
        Self::from_parts(eps_grid.to_vec(), values, spec.clone())
    }

    pub fn from_parts(eps_grid: Vec<f64>, delta_values: Vec<f64>, norm: NormSpec) -> Result<Self> {
        if eps_grid.is_empty() || eps_grid.len() != delta_values.len() {
            return Err(Error::InvalidInput(
                "modulus curve needs equally many eps and delta values, at least one".into(),
            ));
        }
        if eps_grid.iter().any(|&e| !(e > 0.0 && e <= 2.0)) || eps_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "eps grid must be strictly ascending inside (0, 2]".into(),
            ));
        }
        if delta_values.iter().any(|&d| !(0.0..=1.0).contains(&d)) || delta_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(
                "delta values must be nondecreasing inside [0, 1]".into(),
            ));
        }
        Ok(Self {
            eps_grid,
            delta_values,
            norm,
        })
    }

    pub fn eps_grid(&self) -> &[f64] {
        &self.eps_grid
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta_values
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    /// Lower bound for `delta(eps)`: the tabulated value at the largest grid
    /// point not exceeding `eps`, and zero below the grid.
    pub fn lower(&self, eps: f64) -> f64 {
        let k = self.eps_grid.partition_point(|&e| e <= eps);
        if k == 0 {
            0.0
        } else {
            self.delta_values[k - 1]
        }
    }

    /// `sup { eps : delta(eps) <= t }` by monotone log-log interpolation;
    /// below the grid the first two positive samples are extended as a power law.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(out_of_domain("t", t, "(0, inf)"));
        }
        let (e, d) = (&self.eps_grid, &self.delta_values);
        let n = e.len();
        let k = d.partition_point(|&v| v <= t);
        if k == n {
            return Ok(e[n - 1]);
        }
        if k == 0 {
            if n >= 2 && d[0] > 0.0 && d[1] > d[0] {
                let s = (d[1] / d[0]).ln() / (e[1] / e[0]).ln();
                return Ok(e[0] * (t / d[0]).powf(1.0 / s));
            }
            return Ok(e[0] * t / d[0]);
        }
        let i = k - 1;
        let (e0, e1, d0, d1) = (e[i], e[i + 1], d[i], d[i + 1]);
        if d0 > 0.0 {
            let s = (d1 / d0).ln() / (e1 / e0).ln();
            Ok((e0 * (t / d0).powf(1.0 / s)).clamp(e0, e1))
        } else {
            Ok(e0 + (t - d0) / (d1 - d0) * (e1 - e0))
        }
    }

    /// CSV with header `eps,delta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,delta\n");
        for (e, d) in self.eps_grid.iter().zip(&self.delta_values) {
            out.push_str(&format!("{e},{d}\n"));
        }
        out
    }
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    g[n - 1] = hi;
    g
}

/// Directional modulus `delta(v; eps)` of a planar rotund norm:
/// the infimum of `1 - ||v + h/2||` over `||v + h|| <= 1`, `||h|| >= eps`.
///
/// The objective is concave in `h`, so the infimum lies on the boundary of the
/// admissible set: the arc of the unit circle at distance at least `eps` from
/// `v`, and the arc of the sphere `||h|| = eps` inside the unit ball. Both arcs
/// are scanned on a grid and refined.
pub fn local_modulus(spec: &NormSpec, v: &[f64], eps: f64) -> Result<f64> {
    local_modulus_with(spec, v, eps, &SearchParams::default())
}

pub fn local_modulus_with(spec: &NormSpec, v: &[f64], eps: f64, params: &SearchParams) -> Result<f64> {
    spec.require_planar()?;
    if !spec.is_rotund() {
        return Err(Error::NotRotund(spec.label()));
    }
    spec.require_unit(v)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(out_of_domain("eps", eps, "(0, 1]"));
    }
    let norm = |a: f64, b: f64| spec.norm_with(2, |i| if i == 0 { a } else { b });
    let circle = UnitCircle { norm };
    let (vx, vy) = (v[0], v[1]);
    let depth = |x: f64, y: f64| 1.0 - norm(0.5 * (vx + x), 0.5 * (vy + y));
    let n = params.grid.max(8);
    let step = 2.0 * PI / n as f64;

    // arc of the unit circle with ||y - v|| >= eps
    let on_circle = |theta: f64| {
        let y = circle.point(theta);
        if norm(y.0 - vx, y.1 - vy) >= eps {
            depth(y.0, y.1)
        } else {
            f64::INFINITY
        }
    };
    // sphere of radius eps around v, inside the unit ball
    let on_sphere = |phi: f64| {
        let h = circle.point(phi);
        let (x, y) = (vx + eps * h.0, vy + eps * h.1);
        if norm(x, y) <= 1.0 {
            depth(x, y)
        } else {
            f64::INFINITY
        }
    };

    // endpoints of the admissible circle arc, where ||y - v|| = eps exactly
    let theta_v = vy.atan2(vx);
    let fwd = theta_v + circle.partner_offset(theta_v, eps);
    let bwd = theta_v - reverse_partner_offset(&circle, theta_v, eps);
    let mut best = f64::INFINITY;
    for theta in [fwd, bwd] {
        let y = circle.point(theta);
        best = best.min(depth(y.0, y.1));
    }
    for objective in [&on_circle as &(dyn Fn(f64) -> f64 + Sync), &on_sphere] {
        let values: Vec<f64> = (0..n).map(|i| objective(i as f64 * step)).collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| values[i].is_finite()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        for &i in order.iter().take(params.refine.max(1)) {
            best = best.min(values[i]);
            let c = i as f64 * step;
            let (_, v) = golden_min(objective, c - step, c + step, params.tol);
            best = best.min(v);
        }
    }
    Ok(best.max(0.0))
}

/// Clockwise analogue of [`UnitCircle::partner_offset`].
fn reverse_partner_offset<N: Fn(f64, f64) -> f64 + Sync>(circle: &UnitCircle<N>, theta: f64, eps: f64) -> f64 {
    let x = circle.point(theta);
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if circle.dist(x, circle.point(theta - mid)) >= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Second derivative at `t = 0` of `t -> ||v + t e_v||`, where `e_v` is the
/// unit tangent of the unit circle at `v`. Central differences at three step
/// sizes combined by two Richardson extrapolations.
pub fn tangent_second_derivative(spec: &NormSpec, v: &[f64]) -> Result<f64> {
    spec.require_planar()?;
    if !spec.is_smooth() {
        return Err(Error::NotSmooth(format!(
            "{} is not twice differentiable on the unit circle",
            spec.label()
        )));
    }
    spec.require_unit(v)?;
    let e = unit_tangent(spec, v);
    let f = |t: f64| spec.norm_with(2, |i| v[i] + t * e[i]);
    let f0 = f(0.0);
    let d = |h: f64| (f(h) - 2.0 * f0 + f(-h)) / (h * h);
    let h = 0.05;
    let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    let r = (16.0 * r2 - r1) / 15.0;
    Ok(r.max(0.0))
}

/// Unit tangent to the unit circle at `v` (counter-clockwise), obtained by
/// rotating the gradient of the norm.
pub fn unit_tangent(spec: &NormSpec, v: &[f64]) -> [f64; 2] {
    let p = spec.exponent().unwrap_or(2.0);
    let g: Vec<f64> = v.iter().map(|x| x.signum() * x.abs().powf(p - 1.0)).collect();
    let t = [-g[1], g[0]];
    let n = spec.norm(&t);
    [t[0] / n, t[1] / n]
}

/// Unit vector of `spec` in the Euclidean direction `theta`.
pub fn unit_direction(spec: &NormSpec, theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    let n = spec.norm(&[c, s]);
    [c / n, s / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> SearchParams {
        SearchParams {
            grid: 512,
            ..SearchParams::default()
        }
    }

    #[test]
    fn norm_eval_examples() {
        let l3 = NormSpec::lp(3.0, 2).unwrap();
        assert_eq!(l3.eval(&[1.0, 0.0]).unwrap(), 1.0);
        assert!((l3.eval(&[1.0, 1.0]).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let linf = NormSpec::linf(2).unwrap();
        assert_eq!(linf.eval(&[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(l3.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn euclidean_matches_l2_exactly() {
        let e = NormSpec::euclidean(3).unwrap();
        let l2 = NormSpec::lp(2.0, 3).unwrap();
        for x in [[0.3, -4.0, 1e-3], [1e200, 1e200, 0.0], [0.0, 0.0, 0.0]] {
            assert_eq!(e.norm(&x), l2.norm(&x));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::lp(1.0, 2).is_err());
        assert!(NormSpec::lp(20.0, 2).is_err());
        assert!(NormSpec::euclidean(1).is_err());
        let s: NormSpec = serde_json::from_str(r#"{"family":"lp","p":3.0,"dim":2}"#).unwrap();
        assert_eq!(s, NormSpec::lp(3.0, 2).unwrap());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"family":"lp","p":3.0,"dim":2}"#);
        assert!(serde_json::from_str::<NormSpec>(r#"{"family":"lp","dim":2}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"family":"linf","p":3,"dim":2}"#).is_err());
    }

    #[test]
    fn dual_norms() {
        let l3 = NormSpec::lp(3.0, 2).unwrap();
        let g = [1.0, 1.0];
        assert!((l3.dual_norm(&g) - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert_eq!(NormSpec::linf(2).unwrap().dual_norm(&[1.0, -2.0]), 3.0);
    }

    #[test]
    fn modulus_endpoints() {
        let e = NormSpec::euclidean(2).unwrap();
        assert!((modulus_of_convexity(&e, 2.0, &fast()).unwrap() - 1.0).abs() < 1e-7);
        let linf = NormSpec::linf(2).unwrap();
        assert_eq!(modulus_of_convexity(&linf, 2.0, &fast()).unwrap(), 0.0);
        assert!(modulus_of_convexity(&e, 0.0, &fast()).is_err());
        assert!(modulus_of_convexity(&e, 2.5, &fast()).is_err());
    }

    #[test]
    fn curve_inverse_round_trip() {
        let e = NormSpec::euclidean(2).unwrap();
        let grid = geometric_grid(0.01, 2.0, 24);
        let c = ModulusCurve::tabulate(&e, &grid, &fast()).unwrap();
        for (i, &d) in c.delta_values().iter().enumerate() {
            assert!(c.inverse(d).unwrap() >= c.eps_grid()[i]);
        }
        assert_eq!(c.inverse(1.0).unwrap(), 2.0);
        assert!(c.inverse(0.0).is_err());
        assert_eq!(c.lower(0.001), 0.0);
    }

    #[test]
    fn curve_rejects_decreasing_values() {
        let e = NormSpec::euclidean(2).unwrap();
        assert!(ModulusCurve::from_parts(vec![0.5, 1.0], vec![0.2, 0.1], e.clone()).is_err());
        assert!(ModulusCurve::from_parts(vec![1.0, 0.5], vec![0.1, 0.2], e).is_err());
    }

    #[test]
    fn local_modulus_errors() {
        let linf = NormSpec::linf(2).unwrap();
        assert!(matches!(
            local_modulus(&linf, &[1.0, 0.0], 0.5),
            Err(Error::NotRotund(_))
        ));
        let e = NormSpec::euclidean(2).unwrap();
        assert!(local_modulus(&e, &[2.0, 0.0], 0.5).is_err());
        assert!(local_modulus(&e, &[1.0, 0.0], 1.5).is_err());
        let l3 = NormSpec::euclidean(3).unwrap();
        assert!(local_modulus(&l3, &[1.0, 0.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn second_derivative_errors() {
        let l15 = NormSpec::lp(1.5, 2).unwrap();
        assert!(matches!(
            tangent_second_derivative(&l15, &[1.0, 0.0]),
            Err(Error::NotSmooth(_))
        ));
        let linf = NormSpec::linf(2).unwrap();
        assert!(tangent_second_derivative(&linf, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn unit_tangent_is_tangent() {
        let l4 = NormSpec::lp(4.0, 2).unwrap();
        let v = unit_direction(&l4, 0.7);
        let t = unit_tangent(&l4, &v);
        assert!((l4.norm(&t) - 1.0).abs() < 1e-14);
        // first-order: ||v + s t|| = 1 + O(s^2)
        let s = 1e-4;
        let moved = [v[0] + s * t[0], v[1] + s * t[1]];
        assert!((l4.norm(&moved) - 1.0).abs() < 1e-7);
    }

    /// Independent oracle for `p >= 2`: the extremal pair is symmetric about
    /// a coordinate axis, giving `1 - (1 - (eps/2)^p)^(1/p)`.
    fn lp_oracle(p: f64, eps: f64) -> f64 {
        1.0 - (1.0 - (eps / 2.0).powf(p)).powf(1.0 / p)
    }

    /// Euclidean inverse by plain bisection on the parallelogram-law value.
    fn euclid_inverse_oracle(t: f64) -> f64 {
        crate::numeric::bisect(|e| 1.0 - (1.0 - e * e / 4.0).sqrt() - t, 0.0, 2.0, 1e-15)
    }

    #[test]
    fn euclidean_modulus_at_one() {
        let e = NormSpec::euclidean(2).unwrap();
        let d = modulus_of_convexity(&e, 1.0, &SearchParams::default()).unwrap();
        assert!((d - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-6, "{d}");
    }

    #[test]
    fn lp_modulus_matches_symmetric_oracle() {
        for p in [2.0, 3.0, 4.0] {
            let spec = NormSpec::lp(p, 2).unwrap();
            for eps in [0.1, 0.5, 1.0, 1.7] {
                let d = modulus_of_convexity(&spec, eps, &SearchParams::default()).unwrap();
                let o = lp_oracle(p, eps);
                assert!((d - o).abs() < 1e-7 * o.max(1e-3), "p={p} eps={eps}: {d} vs {o}");
            }
        }
    }

    #[test]
    fn three_dimensional_sections() {
        let spec = NormSpec::lp(3.0, 3).unwrap();
        let params = SearchParams {
            grid: 256,
            sections: 8,
            ..SearchParams::default()
        };
        let d = modulus_of_convexity(&spec, 1.0, &params).unwrap();
        assert!((d - lp_oracle(3.0, 1.0)).abs() < 1e-6);
    }

    #[test]
    fn linf_modulus_vanishes() {
        let linf = NormSpec::linf(2).unwrap();
        for eps in [0.01, 0.5, 1.0, 1.9] {
            assert_eq!(modulus_of_convexity(&linf, eps, &fast()).unwrap(), 0.0);
        }
    }

    #[test]
    fn inverse_examples() {
        let e = NormSpec::euclidean(2).unwrap();
        let c = ModulusCurve::tabulate(&e, &ModulusCurve::default_grid(), &fast()).unwrap();
        let k = c.eps_grid().partition_point(|&x| x < 1.0);
        let d1 = modulus_of_convexity(&e, 1.0, &SearchParams::default()).unwrap();
        let near = c.eps_grid()[k];
        assert!((c.inverse(d1).unwrap() - 1.0).abs() <= near - c.eps_grid()[k - 1]);
        assert_eq!(c.inverse(1.0).unwrap(), 2.0);
        assert_eq!(c.inverse(5.0).unwrap(), 2.0);
        let got = c.inverse(0.01).unwrap();
        assert!((got - euclid_inverse_oracle(0.01)).abs() < 1e-4, "{got}");
    }

    #[test]
    fn csv_export() {
        let e = NormSpec::euclidean(2).unwrap();
        let c = ModulusCurve::tabulate(&e, &[0.5, 1.0], &fast()).unwrap();
        let csv = c.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("eps,delta"));
        let row: Vec<f64> = lines.nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0);
        assert!((row[1] - 0.1339746).abs() < 1e-6);
    }

    #[test]
    fn local_modulus_examples() {
        let e = NormSpec::euclidean(2).unwrap();
        for theta in [0.0, 0.4, 2.0] {
            let v = unit_direction(&e, theta);
            let d = local_modulus(&e, &v, 1.0).unwrap();
            assert!((d - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-6, "{d}");
        }
        let l4 = NormSpec::lp(4.0, 2).unwrap();
        let global = modulus_of_convexity(&l4, 0.5, &SearchParams::default()).unwrap();
        let at_axis = local_modulus(&l4, &[1.0, 0.0], 0.5).unwrap();
        assert!(at_axis >= global - 1e-12 && at_axis > 0.0);
        let diag = unit_direction(&l4, PI / 4.0);
        let ratios: Vec<f64> = (4..9)
            .map(|k| {
                let eps = 2f64.powi(-k);
                local_modulus(&l4, &diag, eps).unwrap() / (eps * eps)
            })
            .collect();
        assert!(ratios.iter().all(|&r| r > 0.01), "{ratios:?}");
    }

    #[test]
    fn second_derivative_examples() {
        let e = NormSpec::euclidean(2).unwrap();
        for theta in [0.0, 1.0, 2.5] {
            let d = tangent_second_derivative(&e, &unit_direction(&e, theta)).unwrap();
            assert!((d - 1.0).abs() < 1e-8, "{d}");
        }
        let l4 = NormSpec::lp(4.0, 2).unwrap();
        assert!(tangent_second_derivative(&l4, &[1.0, 0.0]).unwrap() < CURVATURE_THRESHOLD);
        let diag = unit_direction(&l4, PI / 4.0);
        assert!(tangent_second_derivative(&l4, &diag).unwrap() > 0.1);
    }

    #[test]
    fn second_derivative_is_continuous_on_sweep() {
        let l4 = NormSpec::lp(4.0, 2).unwrap();
        let n = 720;
        let step = 2.0 * PI / n as f64;
        let values: Vec<f64> = (0..=n)
            .map(|i| tangent_second_derivative(&l4, &unit_direction(&l4, i as f64 * step)).unwrap())
            .collect();
        let jump = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(jump <= 50.0 * step, "{jump}");
    }
}
