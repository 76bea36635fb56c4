//! Deciding `μ ≻′_{(s,t)} ν` between atomic measures and checking
//! iso-dominance against function families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{compose_subtransport, dev_term, max_flow, quantile_coupling, PairSet, Plan, PlanCell};
use crate::error::{invalid, Error, Result};
use crate::lipschitz::{pushforward_field, require_one_lipschitz, ScalarField};
use crate::measure::AtomicMeasure;
use crate::mmspace::FiniteMMSpace;
use crate::tol;

/// Slack on the deviation bound when testing cell compatibility.
pub const DEV_SLACK: f64 = tol::FEASIBILITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exact,
    Certificate,
}

/// A witnessing pair `(π, S)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderCertificate {
    pub plan: Plan,
    pub cells: Vec<(usize, usize)>,
    pub s_achieved: f64,
    pub t_achieved: f64,
}

impl OrderCertificate {
    fn build(plan: Plan, mut cells: Vec<(usize, usize)>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        let (s, t) = measure_cells(&plan, &cells);
        Self {
            plan,
            cells,
            s_achieved: s,
            t_achieved: t,
        }
    }

    /// Recomputes `(dev_≻ S, 1 − π(S))` from the plan and cells.
    pub fn recompute(&self) -> (f64, f64) {
        measure_cells(&self.plan, &self.cells)
    }

    /// Checks the plan is a transport plan of `(μ, ν)` and that the stored
    /// `(s, t)` match a recomputation within [`tol::MASS`].
    pub fn verify(&self, mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<()> {
        if !self.plan.is_transport_plan(mu, nu) {
            return Err(Error::Incompatible("certificate plan is not a coupling of μ and ν".into()));
        }
        let (rows, cols) = (self.plan.rows().len(), self.plan.cols().len());
        if self.cells.iter().any(|&(i, j)| i >= rows || j >= cols) {
            return Err(Error::Incompatible("certificate cell outside the grid".into()));
        }
        let (s, t) = self.recompute();
        if (s - self.s_achieved).abs() > tol::MASS || (t - self.t_achieved).abs() > tol::MASS {
            return Err(Error::Incompatible(format!(
                "stored (s, t) = ({}, {}) but recomputed ({s}, {t})",
                self.s_achieved, self.t_achieved
            )));
        }
        Ok(())
    }
}

/// Glues certificates for `μ₁ ≻′_{(s₁,t₁)} μ₂` and `μ₂ ≻′_{(s₂,t₂)} μ₃`
/// into one for `μ₁ ≻′_{(s₁+s₂, t₁+t₂)} μ₃`: the restricted plans are
/// composed and the composition's support becomes the cell set.
pub fn compose_certificates(
    first: &OrderCertificate,
    second: &OrderCertificate,
    mu1: &AtomicMeasure,
    mu3: &AtomicMeasure,
) -> Result<OrderCertificate> {
    let glued = compose_subtransport(&first.plan.restrict(&first.cells), &second.plan.restrict(&second.cells))?;
    let cells = glued.support_cells();
    let plan = glued.complete(mu1, mu3)?;
    Ok(OrderCertificate::build(plan, cells))
}

fn measure_cells(plan: &Plan, cells: &[(usize, usize)]) -> (f64, f64) {
    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|&(i, j)| (plan.rows()[i], plan.cols()[j]))
        .collect();
    let s = PairSet::new(points).dev_succ().unwrap_or(0.0);
    let t = (1.0 - plan.mass_on(cells)).max(0.0);
    (s, t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Refutation {
    /// The exact search visited every candidate cell set; the best mass it
    /// found on an admissible set stayed below `1 − t`.
    Exhausted { nodes: u64, max_mass_found: f64 },
    /// Certificate mode found nothing. This is not a proof that the order fails.
    NotFound { trimmed_mass: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderDecision {
    pub holds: bool,
    pub mode: SearchMode,
    pub certificate: Option<OrderCertificate>,
    pub refutation: Option<Refutation>,
}

impl OrderDecision {
    fn found(mode: SearchMode, cert: OrderCertificate) -> Self {
        Self {
            holds: true,
            mode,
            certificate: Some(cert),
            refutation: None,
        }
    }

    fn failed(mode: SearchMode, r: Refutation) -> Self {
        Self {
            holds: false,
            mode,
            certificate: None,
            refutation: Some(r),
        }
    }
}

fn check_params(s: f64, t: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid("s", format!("must be finite and non-negative, got {s}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    Ok(())
}

struct Grid<'a> {
    mu: &'a AtomicMeasure,
    nu: &'a AtomicMeasure,
}

impl Grid<'_> {
    fn point(&self, c: (usize, usize)) -> (f64, f64) {
        (self.mu.atoms()[c.0], self.nu.atoms()[c.1])
    }

    fn compatible(&self, a: (usize, usize), b: (usize, usize), s: f64) -> bool {
        let (p, q) = (self.point(a), self.point(b));
        dev_term(p, q) <= s + DEV_SLACK && dev_term(q, p) <= s + DEV_SLACK
    }

    fn flow(&self, cells: &[(usize, usize)]) -> (f64, Vec<f64>) {
        let r = max_flow(self.mu.weights(), self.nu.weights(), cells);
        (r.value, r.cell_flow)
    }

    /// Certificate from a cell set: the max-flow sub-plan on the cells,
    /// completed to a coupling.
    fn certificate(&self, cells: &[(usize, usize)]) -> Result<OrderCertificate> {
        let (_, flow) = self.flow(cells);
        let mut used = Vec::new();
        let mut plan_cells = Vec::new();
        for (&(row, col), &mass) in cells.iter().zip(&flow) {
            if mass > 0.0 {
                used.push((row, col));
                plan_cells.push(PlanCell { row, col, mass });
            }
        }
        let sub = Plan::new(self.mu.atoms().to_vec(), self.nu.atoms().to_vec(), plan_cells)?;
        let plan = sub.complete(self.mu, self.nu)?;
        if used.is_empty() {
            used.push(plan.support_cells()[0]);
        }
        Ok(OrderCertificate::build(plan, used))
    }
}

/// Support cells of the quantile coupling after greedily dropping the
/// lowest-mass cell among those in a pair with deviation above `s`.
fn trimmed_quantile_cells(grid: &Grid, q: &Plan, s: f64) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize, f64)> = q.cells().iter().map(|c| (c.row, c.col, c.mass)).collect();
    loop {
        let mut bad = vec![false; cells.len()];
        for a in 0..cells.len() {
            for b in a + 1..cells.len() {
                if !grid.compatible((cells[a].0, cells[a].1), (cells[b].0, cells[b].1), s) {
                    bad[a] = true;
                    bad[b] = true;
                }
            }
        }
        let victim = (0..cells.len())
            .filter(|&k| bad[k])
            .min_by(|&a, &b| cells[a].2.total_cmp(&cells[b].2).then(b.cmp(&a)));
        match victim {
            Some(k) => {
                cells.remove(k);
            }
            None => break,
        }
    }
    cells.into_iter().map(|(i, j, _)| (i, j)).collect()
}

/// Decides `μ ≻′_{(s,t)} ν`.
///
/// Exact mode searches all cell sets of the support grid whose pairs are
/// `s`-compatible, scoring each by the max-flow mass it can carry.
/// Certificate mode only tries the trimmed quantile coupling.
pub fn decide_iso_order(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    s: f64,
    t: f64,
    mode: SearchMode,
    max_cells: usize,
) -> Result<OrderDecision> {
    check_params(s, t)?;
    mu.require_probability()?;
    nu.require_probability()?;
    let size = mu.len() * nu.len();
    if mode == SearchMode::Exact && size > max_cells {
        return Err(Error::BudgetExceeded {
            what: "cells",
            size,
            budget: max_cells,
        });
    }
    let grid = Grid { mu, nu };
    let target = 1.0 - t - tol::FEASIBILITY;
    let q = quantile_coupling(mu, nu)?;
    let trimmed = trimmed_quantile_cells(&grid, &q, s);
    let (trimmed_mass, _) = grid.flow(&trimmed);
    if trimmed_mass >= target {
        return Ok(OrderDecision::found(mode, grid.certificate(&trimmed)?));
    }
    if mode == SearchMode::Certificate {
        return Ok(OrderDecision::failed(mode, Refutation::NotFound { trimmed_mass }));
    }

    // Order cells by decreasing quantile mass; bit k is the k-th cell.
    let mut cells: Vec<(usize, usize)> = (0..mu.len())
        .flat_map(|i| (0..nu.len()).map(move |j| (i, j)))
        .collect();
    cells.sort_by(|a, b| q.mass_at(b.0, b.1).total_cmp(&q.mass_at(a.0, a.1)).then(a.cmp(b)));
    let words = cells.len().div_ceil(64);
    let mut adj = vec![Bits::empty(words); cells.len()];
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            if grid.compatible(cells[a], cells[b], s) {
                adj[a].set(b);
                adj[b].set(a);
            }
        }
    }
    let mut search = CliqueSearch {
        grid: &grid,
        cells: &cells,
        adj: &adj,
        target,
        nodes: 0,
        best: trimmed_mass,
    };
    let found = search.expand(&mut Vec::new(), Bits::full(words, cells.len()), Bits::empty(words));
    match found {
        Some(clique) => {
            let chosen: Vec<(usize, usize)> = clique.iter().map(|&k| cells[k]).collect();
            Ok(OrderDecision::found(mode, grid.certificate(&chosen)?))
        }
        None => Ok(OrderDecision::failed(
            mode,
            Refutation::Exhausted {
                nodes: search.nodes,
                max_mass_found: search.best,
            },
        )),
    }
}

#[derive(Clone, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Self {
        Bits(vec![0; words])
    }

    fn full(words: usize, len: usize) -> Self {
        let mut b = Self::empty(words);
        for k in 0..len {
            b.set(k);
        }
        b
    }

    fn set(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }

    fn clear(&mut self, k: usize) {
        self.0[k / 64] &= !(1 << (k % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn count_and(&self, other: &Bits) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }
}

struct CliqueSearch<'a> {
    grid: &'a Grid<'a>,
    cells: &'a [(usize, usize)],
    adj: &'a [Bits],
    target: f64,
    nodes: u64,
    best: f64,
}

impl CliqueSearch<'_> {
    fn mass(&self, members: impl Iterator<Item = usize>) -> f64 {
        let cells: Vec<(usize, usize)> = members.map(|k| self.cells[k]).collect();
        self.grid.flow(&cells).0
    }

    /// Bron–Kerbosch with pivoting; stops at the first clique reaching the
    /// target and prunes when the flow bound on `R ∪ P` falls short.
    fn expand(&mut self, r: &mut Vec<usize>, mut p: Bits, mut x: Bits) -> Option<Vec<usize>> {
        self.nodes += 1;
        if !r.is_empty() {
            let m = self.mass(r.iter().copied());
            self.best = self.best.max(m);
            if m >= self.target {
                return Some(r.clone());
            }
        }
        if p.is_empty() {
            return None;
        }
        let bound = self.mass(r.iter().copied().chain(p.iter()));
        if bound < self.target {
            return None;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| (p.count_and(&self.adj[u]), std::cmp::Reverse(u)))
            .expect("P is non-empty");
        let branch: Vec<usize> = p.and_not(&self.adj[pivot]).iter().collect();
        for v in branch {
            r.push(v);
            let hit = self.expand(r, p.and(&self.adj[v]), x.and(&self.adj[v]));
            r.pop();
            if hit.is_some() {
                return hit;
            }
            p.clear(v);
            x.set(v);
        }
        None
    }
}

/// Every value `dev_≻ S` can take on a cell set of the support grid.
fn candidate_devs(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Vec<f64> {
    let mut out = vec![0.0];
    for &x in mu.atoms() {
        for &y in nu.atoms() {
            for &x2 in mu.atoms() {
                for &y2 in nu.atoms() {
                    let d = dev_term((x, y), (x2, y2));
                    if d > 0.0 {
                        out.push(d);
                    }
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Smallest candidate `s` with `μ ≻′_{(s,t)} ν`, with its certificate.
pub fn min_s_at_t(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    t: f64,
    max_cells: usize,
) -> Result<(f64, OrderCertificate)> {
    check_params(0.0, t)?;
    let size = mu.len() * nu.len();
    if size > max_cells {
        return Err(Error::BudgetExceeded {
            what: "cells",
            size,
            budget: max_cells,
        });
    }
    let cands = candidate_devs(mu, nu);
    let decide = |s: f64| decide_iso_order(mu, nu, s, t, SearchMode::Exact, max_cells);
    let (mut lo, mut hi) = (0, cands.len() - 1);
    let mut best = decide(cands[hi])?
        .certificate
        .expect("the full grid satisfies the largest candidate");
    while lo < hi {
        let mid = (lo + hi) / 2;
        let d = decide(cands[mid])?;
        if let Some(c) = d.certificate {
            best = c;
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok((cands[lo], best))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicOrder {
    pub holds: bool,
    /// `(x, f(x))` for each atom of `μ` when a map exists.
    pub map: Option<Vec<(f64, f64)>>,
}

/// Looks for a monotone non-decreasing 1-Lipschitz `f` with `f_*μ = ν`.
///
/// Such an `f` makes `(id, f)_*μ` comonotone, so it can only be the quantile
/// coupling read as a graph.
pub fn classic_iso_order(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<ClassicOrder> {
    let q = quantile_coupling(mu, nu)?;
    let mut image: Vec<Option<usize>> = vec![None; mu.len()];
    for c in q.cells() {
        if image[c.row].replace(c.col).is_some() {
            return Ok(ClassicOrder { holds: false, map: None });
        }
    }
    let map: Vec<(f64, f64)> = image
        .iter()
        .enumerate()
        .map(|(i, j)| (mu.atoms()[i], nu.atoms()[j.expect("every atom carries mass")]))
        .collect();
    for w in map.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.1 < a.1 || b.1 - a.1 > b.0 - a.0 + DEV_SLACK {
            return Ok(ClassicOrder { holds: false, map: None });
        }
    }
    Ok(ClassicOrder {
        holds: true,
        map: Some(map),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceVerdict {
    /// Every supplied function passed. Only the family was checked, not all
    /// of the 1-measurement.
    CertifiedOverFamily,
    Failed,
    VacuousEmptyFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceEntry {
    pub index: usize,
    pub label: String,
    pub holds: bool,
    pub s_achieved: Option<f64>,
    pub t_achieved: Option<f64>,
    pub refutation: Option<Refutation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub eps: f64,
    pub verdict: DominanceVerdict,
    pub checked: usize,
    pub failures: Vec<DominanceEntry>,
    /// Largest certified `s` over the family.
    pub max_s_achieved: f64,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.verdict != DominanceVerdict::Failed
    }
}

/// Decides `ν ≻′_{(ε,0)} f_* m_X` for each `f` in the family.
pub fn check_iso_dominant(
    nu: &AtomicMeasure,
    x: &FiniteMMSpace,
    eps: f64,
    family: &[ScalarField],
    mode: SearchMode,
    max_cells: usize,
) -> Result<DominanceReport> {
    check_params(eps, 0.0)?;
    for f in family {
        require_one_lipschitz(x, f)?;
    }
    let entries: Vec<DominanceEntry> = family
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let target = pushforward_field(x, f)?;
            let d = decide_iso_order(nu, &target, eps, 0.0, mode, max_cells)?;
            Ok(DominanceEntry {
                index,
                label: f.label(),
                holds: d.holds,
                s_achieved: d.certificate.as_ref().map(|c| c.s_achieved),
                t_achieved: d.certificate.as_ref().map(|c| c.t_achieved),
                refutation: d.refutation,
            })
        })
        .collect::<Result<_>>()?;
    let max_s_achieved = entries
        .iter()
        .filter_map(|e| e.s_achieved)
        .fold(0.0, f64::max);
    let failures: Vec<DominanceEntry> = entries.into_iter().filter(|e| !e.holds).collect();
    let verdict = if family.is_empty() {
        DominanceVerdict::VacuousEmptyFamily
    } else if failures.is_empty() {
        DominanceVerdict::CertifiedOverFamily
    } else {
        DominanceVerdict::Failed
    };
    Ok(DominanceReport {
        eps,
        verdict,
        checked: family.len(),
        failures,
        max_s_achieved,
    })
}
