//! Desk-scale runs on cubes, tori, product graphs and the Gaussian limit.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::budget::Budgets;
use crate::coupling::prohorov;
use crate::error::{invalid, Error, Result};
use crate::isoorder::{check_iso_dominant, min_s_at_t, DominanceReport, SearchMode};
use crate::isoperim::{check_ic_plus, check_icl, IcPlusReport, IclReport};
use crate::lipschitz::{distance_family, mcshane_family, obs_diameter_lower, pushforward_field, ScalarField};
use crate::measure::AtomicMeasure;
use crate::mmspace::{make_cube, make_product_graph, make_torus, FiniteMMSpace, Graph};

/// Slack used when comparing experiment quantities.
const SLACK: f64 = 1e-9;
/// Cap on the support size of `ν_{k,n}`.
pub const MAX_CONVOLUTION_ATOMS: usize = 1_000_000;

/// `ε_{k,n} = sqrt(12 / ((k² − 1)·n))`.
pub fn eps_kn(k: usize, n: usize) -> f64 {
    (12.0 / (((k * k - 1) * n) as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianGrid {
    pub lo: f64,
    pub hi: f64,
    pub atoms: usize,
}

impl Default for GaussianGrid {
    fn default() -> Self {
        Self {
            lo: -6.0,
            hi: 6.0,
            atoms: 2401,
        }
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

impl GaussianGrid {
    /// Standard normal discretized on a uniform grid: each atom takes the
    /// mass of its midpoint cell, the tails go to the end atoms.
    pub fn measure(&self) -> Result<AtomicMeasure> {
        if self.atoms < 2 || !(self.hi > self.lo) {
            return Err(invalid("grid", "need at least 2 atoms and hi > lo"));
        }
        let h = (self.hi - self.lo) / (self.atoms - 1) as f64;
        let atoms: Vec<f64> = (0..self.atoms).map(|i| self.lo + i as f64 * h).collect();
        let mut cuts: Vec<f64> = vec![0.0];
        cuts.extend(atoms[..atoms.len() - 1].iter().map(|&x| phi(x + h / 2.0)));
        cuts.push(1.0);
        let weights: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        AtomicMeasure::from_pairs(atoms.into_iter().zip(weights))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalLawParams {
    pub k: usize,
    pub n_list: Vec<usize>,
    pub grid: GaussianGrid,
    pub kappas: Vec<f64>,
    /// Largest Prohorov distance allowed at `n ≥ threshold_n`.
    pub threshold: f64,
    pub threshold_n: usize,
}

impl Default for NormalLawParams {
    fn default() -> Self {
        Self {
            k: 2,
            n_list: vec![4, 16, 64, 256],
            grid: GaussianGrid::default(),
            kappas: vec![0.1, 0.25, 0.5],
            threshold: 0.15,
            threshold_n: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    pub mcshane_fields: usize,
    pub anchors: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            mcshane_fields: 20,
            anchors: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubeStabilityParams {
    pub n: usize,
    pub k_list: Vec<usize>,
    pub family: FamilyParams,
}

impl Default for CubeStabilityParams {
    fn default() -> Self {
        Self {
            n: 1,
            k_list: vec![2, 4, 8, 16],
            family: FamilyParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusParams {
    pub k: usize,
    pub n: usize,
    pub family: FamilyParams,
}

impl Default for TorusParams {
    fn default() -> Self {
        Self {
            k: 4,
            n: 1,
            family: FamilyParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorSpec {
    Complete { order: usize },
    Path { order: usize },
    Cycle { order: usize },
    Edges { order: usize, edges: Vec<[usize; 2]> },
}

impl FactorSpec {
    pub fn graph(&self) -> Graph {
        match self {
            FactorSpec::Complete { order } => Graph::complete(*order),
            FactorSpec::Path { order } => Graph::path(*order),
            FactorSpec::Cycle { order } => Graph::cycle(*order),
            FactorSpec::Edges { order, edges } => Graph {
                order: *order,
                edges: edges.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObsDiamChainParams {
    pub k: usize,
    pub n: usize,
    /// One factor per coordinate; empty means `n` copies of `K_k`.
    pub factors: Vec<FactorSpec>,
    pub kappas: Vec<f64>,
    pub family: FamilyParams,
}

impl Default for ObsDiamChainParams {
    fn default() -> Self {
        Self {
            k: 2,
            n: 3,
            factors: Vec::new(),
            kappas: vec![0.1, 0.25, 0.5],
            family: FamilyParams::default(),
        }
    }
}

/// Everything a run needs; every section has defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub budgets: Budgets,
    pub normal_law: NormalLawParams,
    pub cube_stability: CubeStabilityParams,
    pub torus: TorusParams,
    pub obsdiam_chain: ObsDiamChainParams,
}

fn family_for(x: &FiniteMMSpace, p: &FamilyParams, seed: u64) -> Result<Vec<ScalarField>> {
    let mut fam = distance_family(x);
    fam.extend(mcshane_family(x, p.mcshane_fields, p.anchors, seed)?);
    Ok(fam)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub atoms: usize,
    /// Mean removed before comparison.
    pub shift: f64,
    pub prohorov: f64,
    /// `(2p, p)`: the error pair for which `γ ≻′_{(2p,p)} ν` follows from the
    /// Prohorov distance `p`.
    pub bridge_s: f64,
    pub bridge_t: f64,
    pub diam_nu: Vec<f64>,
    pub diam_gauss: Vec<f64>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalLawReport {
    /// Always true: the scaled measures are translated to mean zero.
    pub recentred: bool,
    pub kappas: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub monotone: bool,
    pub below_threshold: bool,
    pub passed: bool,
}

/// `ν_{k,n} = (ε_{k,n}·d_0)_* m_{[k]^n}`, built by convolution.
pub fn nu_kn(k: usize, n: usize) -> Result<AtomicMeasure> {
    AtomicMeasure::uniform_range(k)?
        .convolve_power(n)?
        .scale_shift(eps_kn(k, n), 0.0)
}

pub fn run_normal_law(p: &NormalLawParams) -> Result<NormalLawReport> {
    if p.k < 2 {
        return Err(invalid("k", "need k ≥ 2"));
    }
    if p.n_list.contains(&0) {
        return Err(invalid("n_list", "n must be positive"));
    }
    for &n in &p.n_list {
        let size = (p.k - 1).saturating_mul(n).saturating_add(1);
        if size > MAX_CONVOLUTION_ATOMS {
            return Err(Error::BudgetExceeded {
                what: "convolution atoms",
                size,
                budget: MAX_CONVOLUTION_ATOMS,
            });
        }
    }
    let gauss = p.grid.measure()?;
    let diam_gauss: Vec<f64> = p
        .kappas
        .iter()
        .map(|&kappa| gauss.partial_diameter(1.0 - kappa))
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow> = p
        .n_list
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let raw = nu_kn(p.k, n)?;
            let shift = -raw.mean();
            let nu = raw.scale_shift(1.0, shift)?;
            let d = prohorov(&nu, &gauss)?;
            let diam_nu = p
                .kappas
                .iter()
                .map(|&kappa| nu.partial_diameter(1.0 - kappa))
                .collect::<Result<_>>()?;
            Ok(ConvergenceRow {
                n,
                k: p.k,
                eps: eps_kn(p.k, n),
                atoms: nu.len(),
                shift,
                prohorov: d,
                bridge_s: 2.0 * d,
                bridge_t: d,
                diam_nu,
                diam_gauss: diam_gauss.clone(),
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].prohorov <= w[0].prohorov + SLACK);
    let below_threshold = rows
        .iter()
        .filter(|r| r.n >= p.threshold_n)
        .all(|r| r.prohorov < p.threshold);
    Ok(NormalLawReport {
        recentred: true,
        kappas: p.kappas.clone(),
        monotone,
        below_threshold,
        passed: monotone && below_threshold,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRow {
    pub k: usize,
    pub n: usize,
    pub points: usize,
    /// Dominance radius `1/k`.
    pub eps: f64,
    pub dominance: DominanceReport,
    /// Largest `min_s_at_t(ν_k, f_* m, 0)` over the distance functions.
    pub max_min_s: f64,
    pub min_s_within_bound: bool,
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub k: usize,
    pub k_next: usize,
    pub prohorov: f64,
    /// `n/k + n/k_next`, via the continuous cube.
    pub chain_bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeStabilityReport {
    pub rows: Vec<CubeRow>,
    pub gaps: Vec<GapRow>,
    pub min_s_non_increasing: bool,
    pub passed: bool,
}

/// Largest exact `min_s` at `t = 0` over the fields.
fn max_min_s(nu: &AtomicMeasure, x: &FiniteMMSpace, fields: &[ScalarField], max_cells: usize) -> Result<f64> {
    let vals: Vec<f64> = fields
        .par_iter()
        .map(|f| Ok(min_s_at_t(nu, &pushforward_field(x, f)?, 0.0, max_cells)?.0))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

pub fn run_cube_stability(p: &CubeStabilityParams, seed: u64, budgets: &Budgets) -> Result<CubeStabilityReport> {
    let mut rows = Vec::new();
    let mut nus = Vec::new();
    for &k in &p.k_list {
        let start = Instant::now();
        let eps = 1.0 / k as f64;
        let x = make_cube(k, p.n, eps, budgets.max_points)?;
        let nu = x.distance_pushforward(0)?;
        let fam = family_for(&x, &p.family, seed)?;
        let dominance = check_iso_dominant(&nu, &x, eps, &fam, SearchMode::Exact, budgets.max_cells)?;
        let s = max_min_s(&nu, &x, &distance_family(&x), budgets.max_cells)?;
        rows.push(CubeRow {
            k,
            n: p.n,
            points: x.len(),
            eps,
            dominance,
            max_min_s: s,
            min_s_within_bound: s <= eps + SLACK,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        nus.push(nu);
    }
    let mut gaps = Vec::new();
    for w in 0..nus.len().saturating_sub(1) {
        let (k, k_next) = (p.k_list[w], p.k_list[w + 1]);
        let d = prohorov(&nus[w], &nus[w + 1])?;
        let bound = p.n as f64 / k as f64 + p.n as f64 / k_next as f64;
        gaps.push(GapRow {
            k,
            k_next,
            prohorov: d,
            chain_bound: bound,
            within_bound: d <= bound + SLACK,
        });
    }
    let min_s_non_increasing = rows.windows(2).all(|w| w[1].max_min_s <= w[0].max_min_s + SLACK);
    let passed = rows.iter().all(|r| r.dominance.passed() && r.min_s_within_bound)
        && gaps.iter().all(|g| g.within_bound)
        && min_s_non_increasing;
    Ok(CubeStabilityReport {
        rows,
        gaps,
        min_s_non_increasing,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub k: usize,
    pub n: usize,
    pub points: usize,
    /// `Δ(supp ν)`, the dominance radius used.
    pub delta: f64,
    /// Present when the space is small enough for exhaustive subset checks.
    pub icl: Option<IclReport>,
    pub ic_plus: Option<IcPlusReport>,
    pub dominance: DominanceReport,
    pub max_min_s: f64,
    pub passed: bool,
}

pub fn run_torus(p: &TorusParams, seed: u64, budgets: &Budgets) -> Result<TorusReport> {
    let x = make_torus(p.k, p.n, budgets.max_points)?;
    let nu = x.distance_pushforward(0)?;
    let delta = nu.support_gaps().max_gap;
    let (icl, ic_plus) = if x.len() <= budgets.max_subset_points {
        (
            Some(check_icl(&x, &nu, 0.0, budgets.max_subset_points)?),
            Some(check_ic_plus(&x, &nu, 0.0, budgets.max_subset_points)?),
        )
    } else {
        (None, None)
    };
    let fam = family_for(&x, &p.family, seed)?;
    let dominance = check_iso_dominant(&nu, &x, delta, &fam, SearchMode::Exact, budgets.max_cells)?;
    let s = max_min_s(&nu, &x, &distance_family(&x), budgets.max_cells)?;
    let passed = dominance.passed()
        && icl.as_ref().map_or(true, |r| r.passed)
        && ic_plus.as_ref().map_or(true, |r| r.passed)
        && s <= delta + SLACK;
    Ok(TorusReport {
        k: p.k,
        n: p.n,
        points: x.len(),
        delta,
        icl,
        ic_plus,
        dominance,
        max_min_s: s,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub kappa: f64,
    /// `diam(ν_{k,n}; 1 − κ)`.
    pub diam_nu: f64,
    /// Sampled lower bound for `ObsDiam(ε·∏G_i; −κ)`.
    pub obs_graph_lower: f64,
    /// Sampled lower bound for `ObsDiam(ε·[k]^n; −κ)`.
    pub obs_cube_lower: f64,
    pub ineq1: bool,
    pub ineq2: bool,
    pub ineq3: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsDiamChainReport {
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub rows: Vec<ChainRow>,
    pub passed: bool,
}

/// Checks, with sampled lower bounds `L` in place of observable diameters,
/// `L_graph ≤ D + ε`, `D ≤ L_cube` and `L_cube ≤ D + ε` where
/// `D = diam(ν_{k,n}; 1 − κ)`.
pub fn run_obsdiam_chain(p: &ObsDiamChainParams, seed: u64, budgets: &Budgets) -> Result<ObsDiamChainReport> {
    let factors: Vec<Graph> = if p.factors.is_empty() {
        vec![Graph::complete(p.k); p.n]
    } else {
        p.factors.iter().map(FactorSpec::graph).collect()
    };
    if factors.len() != p.n {
        return Err(invalid("factors", format!("{} factors for n = {}", factors.len(), p.n)));
    }
    if let Some(g) = factors.iter().find(|g| g.order != p.k) {
        return Err(invalid("factors", format!("factor of order {} but k = {}", g.order, p.k)));
    }
    let eps = eps_kn(p.k, p.n);
    let graph = make_product_graph(&factors, budgets.max_points)?.scaled(eps)?;
    let cube = make_cube(p.k, p.n, eps, budgets.max_points)?;
    let nu = cube.distance_pushforward(0)?;
    let graph_family = family_for(&graph, &p.family, seed)?;
    let cube_family = family_for(&cube, &p.family, seed)?;
    let rows: Vec<ChainRow> = p
        .kappas
        .iter()
        .map(|&kappa| {
            let diam_nu = nu.partial_diameter(1.0 - kappa)?;
            let lg = obs_diameter_lower(&graph, kappa, &graph_family)?;
            let lc = obs_diameter_lower(&cube, kappa, &cube_family)?;
            Ok(ChainRow {
                kappa,
                diam_nu,
                obs_graph_lower: lg,
                obs_cube_lower: lc,
                ineq1: lg <= diam_nu + eps + SLACK,
                ineq2: diam_nu <= lc + SLACK,
                ineq3: lc <= diam_nu + eps + SLACK,
            })
        })
        .collect::<Result<_>>()?;
    let passed = rows.iter().all(|r| r.ineq1 && r.ineq2 && r.ineq3);
    Ok(ObsDiamChainReport {
        k: p.k,
        n: p.n,
        eps,
        rows,
        passed,
    })
}
