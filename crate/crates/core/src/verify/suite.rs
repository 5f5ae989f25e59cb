//! A verification suite: named checks over a corpus of instances, run in
//! parallel and written out as one CSV per check plus `summary.json`.

use std::collections::HashSet;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_almost_minimality, check_c1_modulus, check_density_dichotomy, check_excess_length, check_height_bound,
    check_local_modulus_regularity, check_monotonicity, HubStrategy, Window,
};
use super::VerificationReport;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::network::{Network, Polyline, SegmentSet};
use crate::norm::{ModulusCurve, NormSpec, SearchParams};
use crate::quasihyp::{
    geodesic_gauge_slope, linear_gauge, quasihyp_distance, tangent_modulus, MAX_CONSTANT, OSCILLATION_SCALES,
};
use crate::solver::{geodesic_solve, steiner_solve, SolveParams};
use crate::weight::{Domain, WeightField};

/// A weighted two-terminal problem; `region` bounds the weight for its gauge.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicInstance {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub weight: WeightField,
    pub norm: NormSpec,
    pub region: Domain,
    #[serde(default)]
    pub params: SolveParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasihypInstance {
    pub domain: Domain,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    #[serde(default)]
    pub params: SolveParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkInstance {
    Explicit {
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
        terminals: Vec<usize>,
        norm: NormSpec,
    },
    Steiner {
        terminals: Vec<Vec<f64>>,
        weight: WeightField,
        norm: NormSpec,
        #[serde(default)]
        params: SolveParams,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuiteCheck {
    ExcessLength {
        name: String,
        norm: NormSpec,
        trials: usize,
    },
    /// Density ratios at the arclength midpoint of each solved geodesic.
    Monotonicity {
        name: String,
        instances: Vec<GeodesicInstance>,
        radii: Vec<f64>,
    },
    DensityDichotomy {
        name: String,
        networks: Vec<NetworkInstance>,
        samples: usize,
    },
    /// Windows at the midpoint of quasihyperbolic geodesics.
    HeightBound {
        name: String,
        instances: Vec<QuasihypInstance>,
        radii: Vec<f64>,
    },
    /// Bumps of height `r/2` against a tiny gauge; must be flagged.
    HeightBoundPlanted {
        name: String,
        norm: NormSpec,
        radii: Vec<f64>,
    },
    AlmostMinimality {
        name: String,
        instances: Vec<GeodesicInstance>,
        radii: Vec<f64>,
        hubs: HubStrategy,
    },
    /// A zig-zag with unit weight, windows at a corner; must be flagged.
    AlmostMinimalityPlanted {
        name: String,
        norm: NormSpec,
        radii: Vec<f64>,
        hubs: HubStrategy,
    },
    C1Modulus {
        name: String,
        instances: Vec<QuasihypInstance>,
    },
    LocalModulus {
        name: String,
        norm: NormSpec,
        sweep: usize,
    },
}

impl SuiteCheck {
    pub fn name(&self) -> &str {
        match self {
            Self::ExcessLength { name, .. }
            | Self::Monotonicity { name, .. }
            | Self::DensityDichotomy { name, .. }
            | Self::HeightBound { name, .. }
            | Self::HeightBoundPlanted { name, .. }
            | Self::AlmostMinimality { name, .. }
            | Self::AlmostMinimalityPlanted { name, .. }
            | Self::C1Modulus { name, .. }
            | Self::LocalModulus { name, .. } => name,
        }
    }

    fn is_planted(&self) -> bool {
        matches!(
            self,
            Self::HeightBoundPlanted { .. } | Self::AlmostMinimalityPlanted { .. }
        )
    }

    /// Runs the check with randomness drawn from `rng`.
    pub fn run(&self, rng: &mut ChaCha8Rng) -> Result<VerificationReport> {
        let report = match self {
            Self::ExcessLength { norm, trials, .. } => {
                check_excess_length(norm, &tabulate(norm)?, *trials, rng.next_u64())?
            }
            Self::Monotonicity { instances, radii, .. } => {
                let seeds = draw_seeds(rng, instances.len());
                let parts = instances
                    .par_iter()
                    .zip(seeds)
                    .map(|(inst, seed)| {
                        let curve = solve_geodesic(inst, seed)?;
                        let gauge = inst.weight.clone().in_norm(&inst.norm).minimality_gauge(&inst.region)?;
                        check_monotonicity(&curve.to_network()?, &gauge, &midpoint(&curve), radii)
                    })
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("g", parts))
            }
            Self::DensityDichotomy { networks, samples, .. } => {
                let seeds = draw_seeds(rng, networks.len());
                let parts = networks
                    .par_iter()
                    .zip(seeds)
                    .map(|(inst, seed)| check_density_dichotomy(&build_network(inst, seed)?, *samples))
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("n", parts))
            }
            Self::HeightBound { instances, radii, .. } => {
                let seeds = draw_seeds(rng, instances.len());
                let parts = instances
                    .par_iter()
                    .zip(seeds)
                    .map(|(inst, seed)| {
                        let curve = solve_quasihyp(inst, seed)?;
                        let (_, slope) = geodesic_gauge_slope(&curve, &inst.domain)?;
                        let gauge = linear_gauge(slope, gauge_reach())?;
                        check_height_bound(
                            &curve,
                            &gauge,
                            &tabulate(curve.norm())?,
                            &windows(&midpoint(&curve), radii),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("q", parts))
            }
            Self::HeightBoundPlanted { norm, radii, .. } => {
                let curve = tabulate(norm)?;
                let tiny = Gauge::geometric(1e-6, 1.0, 1.0)?;
                let parts = radii
                    .iter()
                    .map(|&r| {
                        let bulge = Polyline::new(
                            vec![
                                vec![-1.0, 0.0],
                                vec![-0.5 * r, 0.0],
                                vec![0.0, 0.5 * r],
                                vec![0.5 * r, 0.0],
                                vec![1.0, 0.0],
                            ],
                            norm.clone(),
                        )?;
                        check_height_bound(&bulge, &tiny, &curve, &windows(&[0.0, 0.5 * r], &[r]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("bump", parts))
            }
            Self::AlmostMinimality {
                instances, radii, hubs, ..
            } => {
                let seeds = draw_seeds(rng, 2 * instances.len());
                let parts = instances
                    .par_iter()
                    .zip(seeds.chunks(2).collect::<Vec<_>>())
                    .map(|(inst, pair)| {
                        let curve = solve_geodesic(inst, pair[0])?;
                        let w = windows(&midpoint(&curve), radii);
                        check_almost_minimality(&curve.to_network()?, &inst.weight, &inst.region, &w, *hubs, pair[1])
                    })
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("g", parts))
            }
            Self::AlmostMinimalityPlanted { norm, radii, hubs, .. } => {
                let points: Vec<Vec<f64>> = (0..=8)
                    .map(|k| vec![-1.0 + 0.25 * k as f64, if k % 2 == 0 { 0.0 } else { 0.05 }])
                    .collect();
                let zig = Network::path(points, norm.clone())?;
                let region = Domain::boxed(vec![-2.0, -2.0], vec![2.0, 2.0], norm.clone())?;
                let unit = WeightField::constant(1.0)?;
                check_almost_minimality(
                    &zig,
                    &unit,
                    &region,
                    &windows(&[0.25, 0.05], radii),
                    *hubs,
                    rng.next_u64(),
                )?
            }
            Self::C1Modulus { instances, .. } => {
                let seeds = draw_seeds(rng, instances.len());
                let parts = instances
                    .par_iter()
                    .zip(seeds)
                    .map(|(inst, seed)| {
                        let curve = solve_quasihyp(inst, seed)?;
                        let (_, slope) = geodesic_gauge_slope(&curve, &inst.domain)?;
                        let omega = tangent_modulus(&tabulate(curve.norm())?, &linear_gauge(slope, gauge_reach())?)?;
                        check_c1_modulus(&curve, &omega)
                    })
                    .collect::<Result<Vec<_>>>()?;
                VerificationReport::combine("", labelled("q", parts))
            }
            Self::LocalModulus { norm, sweep, .. } => check_local_modulus_regularity(norm, *sweep)?,
        };
        let mut report = rename(report, self.name());
        if self.is_planted() {
            report = report.planted();
        }
        Ok(report)
    }
}

/// The corpus of checks.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub checks: Vec<SuiteCheck>,
}

impl Suite {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for c in &self.checks {
            let name = c.name();
            let safe = !name.is_empty()
                && name
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-');
            if !safe {
                return Err(Error::InvalidInput(format!(
                    "check name {name:?} must be nonempty [A-Za-z0-9_-]"
                )));
            }
            if !seen.insert(name) {
                return Err(Error::InvalidInput(format!("duplicate check name {name:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub seed: u64,
    /// Every ordinary check has no violation and every planted check has one.
    pub passed: bool,
    pub reports: Vec<VerificationReport>,
}

/// Generator for the check `name`: the suite seed with a stream chosen by
/// the FNV-1a hash of the name.
pub fn sub_stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hash);
    rng
}

/// Runs every check on a pool of `jobs` threads (all cores for 0) and, when
/// `out` is given, writes `<check>.csv` files and `summary.json` there.
pub fn run_suite(suite: &Suite, seed: u64, jobs: usize, out: Option<&Path>) -> Result<SuiteOutcome> {
    suite.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let reports = pool.install(|| {
        suite
            .checks
            .par_iter()
            .map(|c| c.run(&mut sub_stream(seed, c.name())))
            .collect::<Result<Vec<_>>>()
    })?;
    let outcome = SuiteOutcome {
        seed,
        passed: reports.iter().all(VerificationReport::passed),
        reports,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for r in &outcome.reports {
            std::fs::write(dir.join(&r.details_path), r.to_csv())?;
        }
        let mut summary = serde_json::to_string_pretty(&outcome)?;
        summary.push('\n');
        std::fs::write(dir.join("summary.json"), summary)?;
    }
    Ok(outcome)
}

fn tabulate(norm: &NormSpec) -> Result<ModulusCurve> {
    ModulusCurve::tabulate(norm, &ModulusCurve::default_grid(), &SearchParams::default())
}

/// Upper end of the weight gauges: the largest argument `C eta` a fit can ask for.
fn gauge_reach() -> f64 {
    MAX_CONSTANT * OSCILLATION_SCALES[0]
}

fn draw_seeds(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.next_u64()).collect()
}

fn labelled(prefix: &str, parts: Vec<VerificationReport>) -> Vec<(String, VerificationReport)> {
    parts
        .into_iter()
        .enumerate()
        .map(|(i, r)| (format!("{prefix}{i}"), r))
        .collect()
}

fn rename(report: VerificationReport, name: &str) -> VerificationReport {
    let constants = report.fitted_constants.clone();
    let mut out = VerificationReport::new(name, report.rows, Vec::new());
    out.fitted_constants = constants;
    out
}

fn windows(center: &[f64], radii: &[f64]) -> Vec<Window> {
    radii
        .iter()
        .map(|&radius| Window {
            center: center.to_vec(),
            radius,
        })
        .collect()
}

fn midpoint(curve: &Polyline) -> Vec<f64> {
    let cum = curve.arclengths();
    curve.point_at(&cum, 0.5 * cum[cum.len() - 1])
}

fn solve_geodesic(inst: &GeodesicInstance, seed: u64) -> Result<Polyline> {
    let params = SolveParams { seed, ..inst.params };
    Ok(geodesic_solve(&inst.from, &inst.to, &inst.weight, &inst.norm, &params)?.polyline)
}

fn solve_quasihyp(inst: &QuasihypInstance, seed: u64) -> Result<Polyline> {
    let params = SolveParams { seed, ..inst.params };
    Ok(quasihyp_distance(&inst.domain, &inst.from, &inst.to, &params)?.geodesic)
}

fn build_network(inst: &NetworkInstance, seed: u64) -> Result<Network> {
    match inst {
        NetworkInstance::Explicit {
            vertices,
            edges,
            terminals,
            norm,
        } => Network::new(vertices.clone(), edges.clone(), terminals.clone(), norm.clone()),
        NetworkInstance::Steiner {
            terminals,
            weight,
            norm,
            params,
        } => Ok(steiner_solve(terminals, weight, norm, &SolveParams { seed, ..*params })?.network),
    }
}
