//! Discrete isoperimetric profiles and the ICL / IC⁺ comparison conditions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::isoorder::{check_iso_dominant, DominanceReport, SearchMode};
use crate::lipschitz::ScalarField;
use crate::measure::AtomicMeasure;
use crate::mmspace::FiniteMMSpace;
use crate::tol;

/// Hard ceiling on subset enumeration regardless of the configured budget.
const MAX_ENUMERABLE: usize = 30;
/// Gray-code range is split into this many chunks, independent of workers.
const CHUNKS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub volume: f64,
    /// `I_X^ε(volume)`.
    pub value: f64,
    /// A minimizing subset, as sorted point indices.
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub eps: f64,
    /// Sorted by volume; one entry per achievable `m_X(A)`.
    pub entries: Vec<ProfileEntry>,
}

impl ProfileTable {
    /// Entry whose volume matches `v` within [`tol::MASS`].
    pub fn lookup(&self, v: f64) -> Option<&ProfileEntry> {
        let k = self.entries.partition_point(|e| e.volume < v - tol::MASS);
        self.entries.get(k).filter(|e| (e.volume - v).abs() <= tol::MASS)
    }

    /// Entry with the smallest value among volumes `≥ v − tol`, volume > 0.
    fn tail_min(&self, v: f64) -> Option<&ProfileEntry> {
        let k = self.entries.partition_point(|e| e.volume < v - tol::MASS);
        self.entries[k..]
            .iter()
            .filter(|e| e.volume > tol::MASS)
            .fold(None, |best: Option<&ProfileEntry>, e| match best {
                Some(b) if b.value <= e.value => Some(b),
                _ => Some(e),
            })
    }
}

fn mask_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

struct Enumerator<'a> {
    n: usize,
    weights: &'a [f64],
    uniform: bool,
    /// `balls[r][x]` = bitmask of `B_r({x})` for each requested radius.
    balls: Vec<Vec<u64>>,
}

impl Enumerator<'_> {
    fn mass(&self, mask: u64) -> f64 {
        if self.uniform {
            mask.count_ones() as f64 / self.n as f64
        } else {
            (0..self.n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| self.weights[i])
                .sum()
        }
    }

    /// Scans Gray codes `g(lo) .. g(hi)`, keeping per radius the smallest
    /// neighbourhood mass for each volume key (first in scan order on ties).
    fn scan(&self, lo: u64, hi: u64) -> Vec<BTreeMap<i64, (f64, f64, u64)>> {
        let radii = self.balls.len();
        let mut best: Vec<BTreeMap<i64, (f64, f64, u64)>> = vec![BTreeMap::new(); radii];
        let mut counts = vec![vec![0u32; self.n]; radii];
        let mut covered = vec![0u64; radii];
        let mut set = lo ^ (lo >> 1);
        for x in 0..self.n {
            if set >> x & 1 == 1 {
                for r in 0..radii {
                    self.add(&mut counts[r], &mut covered[r], self.balls[r][x]);
                }
            }
        }
        let mut k = lo;
        loop {
            let vol = self.mass(set);
            let key = (vol / tol::MASS).round() as i64;
            for r in 0..radii {
                let value = self.mass(covered[r]);
                let slot = best[r].entry(key).or_insert((vol, value, set));
                if value < slot.1 {
                    *slot = (vol, value, set);
                }
            }
            k += 1;
            if k >= hi {
                break;
            }
            let x = k.trailing_zeros() as usize;
            let adding = set >> x & 1 == 0;
            set ^= 1 << x;
            for r in 0..radii {
                if adding {
                    self.add(&mut counts[r], &mut covered[r], self.balls[r][x]);
                } else {
                    self.remove(&mut counts[r], &mut covered[r], self.balls[r][x]);
                }
            }
        }
        best
    }

    fn add(&self, counts: &mut [u32], covered: &mut u64, ball: u64) {
        for y in 0..self.n {
            if ball >> y & 1 == 1 {
                counts[y] += 1;
                *covered |= 1 << y;
            }
        }
    }

    fn remove(&self, counts: &mut [u32], covered: &mut u64, ball: u64) {
        for y in 0..self.n {
            if ball >> y & 1 == 1 {
                counts[y] -= 1;
                if counts[y] == 0 {
                    *covered &= !(1 << y);
                }
            }
        }
    }
}

/// Profiles at several radii from one exhaustive subset scan.
pub fn isoperimetric_profiles(
    x: &FiniteMMSpace,
    radii: &[f64],
    max_subset_points: usize,
) -> Result<Vec<ProfileTable>> {
    let n = x.len();
    if n > max_subset_points.min(MAX_ENUMERABLE) {
        return Err(Error::BudgetExceeded {
            what: "subset-enumeration points (exhaustive only; no sampling fallback)",
            size: n,
            budget: max_subset_points.min(MAX_ENUMERABLE),
        });
    }
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0)) {
        return Err(invalid("eps", format!("radius must be non-negative, got {r}")));
    }
    let balls: Vec<Vec<u64>> = radii
        .iter()
        .map(|&r| {
            (0..n)
                .map(|c| {
                    (0..n)
                        .filter(|&y| x.d(c, y) <= r + tol::DISTANCE)
                        .fold(0u64, |m, y| m | 1 << y)
                })
                .collect()
        })
        .collect();
    let e = Enumerator {
        n,
        weights: x.weights(),
        uniform: x.is_uniform(),
        balls,
    };
    let total = 1u64 << n;
    let chunks = CHUNKS.min(total);
    let step = total.div_ceil(chunks);
    let parts: Vec<Vec<BTreeMap<i64, (f64, f64, u64)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| e.scan(c * step, ((c + 1) * step).min(total)))
        .collect();

    let mut merged: Vec<BTreeMap<i64, (f64, f64, u64)>> = vec![BTreeMap::new(); radii.len()];
    for part in parts {
        for (r, map) in part.into_iter().enumerate() {
            for (key, cand) in map {
                // volumes within one key step describe the same achievable value
                let existing = (key - 1..=key + 1).find(|k| merged[r].contains_key(k));
                match existing {
                    Some(k) => {
                        let slot = merged[r].get_mut(&k).unwrap();
                        if cand.1 < slot.1 {
                            *slot = cand;
                        }
                    }
                    None => {
                        merged[r].insert(key, cand);
                    }
                }
            }
        }
    }
    Ok(merged
        .into_iter()
        .zip(radii)
        .map(|(map, &eps)| ProfileTable {
            eps,
            entries: map
                .into_values()
                .map(|(volume, value, mask)| ProfileEntry {
                    volume,
                    value,
                    witness: mask_to_indices(mask, n),
                })
                .collect(),
        })
        .collect())
}

/// `I_X^ε` over every achievable volume, by exhaustive enumeration.
pub fn isoperimetric_profile(x: &FiniteMMSpace, eps: f64, max_subset_points: usize) -> Result<ProfileTable> {
    Ok(isoperimetric_profiles(x, &[eps], max_subset_points)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IclViolation {
    pub a: f64,
    pub b: f64,
    pub subset: Vec<usize>,
    pub subset_mass: f64,
    pub neighborhood_mass: f64,
    /// `F_ν(b)`.
    pub required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IclReport {
    pub eps: f64,
    pub passed: bool,
    pub pairs_checked: usize,
    pub violation: Option<IclViolation>,
}

/// Checks `F_ν(b) ≤ m_X(B_{b−a+ε}(A))` for all `a ≤ b` in `supp ν` and all
/// `A` with `m_X(A) > 0`, `m_X(A) ≥ F_ν(a)`.
pub fn check_icl(x: &FiniteMMSpace, nu: &AtomicMeasure, eps: f64, max_subset_points: usize) -> Result<IclReport> {
    nu.require_probability()?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be finite and non-negative, got {eps}")));
    }
    let atoms = nu.atoms();
    let cum = nu.cumulative();
    let mut pairs = Vec::new();
    for a in 0..atoms.len() {
        for b in a..atoms.len() {
            pairs.push((a, b, atoms[b] - atoms[a] + eps));
        }
    }
    let mut radii: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let tables = isoperimetric_profiles(x, &radii, max_subset_points)?;
    for &(a, b, r) in &pairs {
        let table = &tables[radii.partition_point(|&q| q < r)];
        let Some(entry) = table.tail_min(cum[a]) else {
            continue;
        };
        if entry.value < cum[b] - tol::MASS {
            return Ok(IclReport {
                eps,
                passed: false,
                pairs_checked: pairs.len(),
                violation: Some(IclViolation {
                    a: atoms[a],
                    b: atoms[b],
                    subset: entry.witness.clone(),
                    subset_mass: entry.volume,
                    neighborhood_mass: entry.value,
                    required: cum[b],
                }),
            });
        }
    }
    Ok(IclReport {
        eps,
        passed: true,
        pairs_checked: pairs.len(),
        violation: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcPlusStatus {
    Pass,
    Fail,
    /// `V(t)` is not an achievable volume, so the condition says nothing at `t`.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcPlusCheck {
    pub t: f64,
    pub delta_plus: f64,
    pub volume: f64,
    pub required: f64,
    pub profile_value: Option<f64>,
    pub witness: Option<Vec<usize>>,
    pub status: IcPlusStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcPlusReport {
    pub eps: f64,
    pub passed: bool,
    pub checks: Vec<IcPlusCheck>,
}

/// Checks `I_X^{δ⁺(t)+ε}(V(t)) ≥ V(t + δ⁺(t))` at every non-maximal atom `t`.
pub fn check_ic_plus(
    x: &FiniteMMSpace,
    nu: &AtomicMeasure,
    eps: f64,
    max_subset_points: usize,
) -> Result<IcPlusReport> {
    nu.require_probability()?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be finite and non-negative, got {eps}")));
    }
    let atoms = nu.atoms();
    let cum = nu.cumulative();
    let m = atoms.len();
    let mut radii: Vec<f64> = (0..m.saturating_sub(1)).map(|i| atoms[i + 1] - atoms[i] + eps).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let tables = if radii.is_empty() {
        Vec::new()
    } else {
        isoperimetric_profiles(x, &radii, max_subset_points)?
    };
    let mut checks = Vec::new();
    for i in 0..m.saturating_sub(1) {
        let delta_plus = atoms[i + 1] - atoms[i];
        let r = delta_plus + eps;
        let table = &tables[radii.partition_point(|&q| q < r)];
        let (volume, required) = (cum[i], cum[i + 1]);
        let check = match table.lookup(volume) {
            None => IcPlusCheck {
                t: atoms[i],
                delta_plus,
                volume,
                required,
                profile_value: None,
                witness: None,
                status: IcPlusStatus::Vacuous,
            },
            Some(e) => IcPlusCheck {
                t: atoms[i],
                delta_plus,
                volume,
                required,
                profile_value: Some(e.value),
                witness: Some(e.witness.clone()),
                status: if e.value >= required - tol::MASS {
                    IcPlusStatus::Pass
                } else {
                    IcPlusStatus::Fail
                },
            },
        };
        checks.push(check);
    }
    Ok(IcPlusReport {
        eps,
        passed: checks.iter().all(|c| c.status != IcPlusStatus::Fail),
        checks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcPlusToIclReport {
    pub atoms: usize,
    /// `max(N − 2, 0)·ε`.
    pub icl_eps: f64,
    pub ic_plus: IcPlusReport,
    pub icl: IclReport,
    /// False only when IC⁺ passed and ICL at the derived radius failed.
    pub implication_holds: bool,
}

/// Cross-checks that IC⁺_ε(ν) implies ICL_{(N−2)ε}(ν) on a uniform space
/// whose measure values are multiples of `1/|X|`.
pub fn icl_from_ic_plus_bound(
    x: &FiniteMMSpace,
    nu: &AtomicMeasure,
    eps: f64,
    max_subset_points: usize,
) -> Result<IcPlusToIclReport> {
    if !x.is_uniform() {
        return Err(Error::Hypothesis("the space must carry the uniform measure".into()));
    }
    let n = x.len() as f64;
    if let Some(w) = nu.weights().iter().find(|&&w| (w - (w * n).round() / n).abs() > tol::MASS) {
        return Err(Error::Hypothesis(format!(
            "atom weight {w} is not a multiple of 1/{}",
            x.len()
        )));
    }
    let atoms = nu.len();
    let icl_eps = atoms.saturating_sub(2) as f64 * eps;
    let ic_plus = check_ic_plus(x, nu, eps, max_subset_points)?;
    let icl = check_icl(x, nu, icl_eps, max_subset_points)?;
    Ok(IcPlusToIclReport {
        atoms,
        icl_eps,
        implication_holds: !ic_plus.passed || icl.passed,
        ic_plus,
        icl,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IclToDominantReport {
    /// `ν({min supp ν}) ≤ m_X({x})` for every point.
    pub side_condition_ok: bool,
    /// `Δ(supp ν)`: the largest gap between consecutive atoms.
    pub delta: f64,
    /// Set when `supp ν` is a single point and `delta` is 0 by convention.
    pub singleton_support: bool,
    pub icl: Option<IclReport>,
    pub dominance: Option<DominanceReport>,
    /// False only when ICL passed and dominance at `ε + Δ` failed.
    pub consistent: bool,
}

/// If ICL_ε(ν) holds on `X`, checks that `ν` is an `(ε + Δ)`-iso-dominant
/// of `X` over the family.
pub fn icl_to_dominant(
    x: &FiniteMMSpace,
    nu: &AtomicMeasure,
    eps: f64,
    family: &[ScalarField],
    max_subset_points: usize,
    max_cells: usize,
) -> Result<IclToDominantReport> {
    nu.require_probability()?;
    let gaps = nu.support_gaps();
    let floor = nu.weights()[0];
    let side_condition_ok = x.weights().iter().all(|&w| floor <= w + tol::MASS);
    let mut report = IclToDominantReport {
        side_condition_ok,
        delta: gaps.max_gap,
        singleton_support: gaps.singleton,
        icl: None,
        dominance: None,
        consistent: true,
    };
    if !side_condition_ok {
        return Ok(report);
    }
    let icl = check_icl(x, nu, eps, max_subset_points)?;
    if icl.passed {
        let dom = check_iso_dominant(nu, x, eps + gaps.max_gap, family, SearchMode::Exact, max_cells)?;
        report.consistent = dom.passed();
        report.dominance = Some(dom);
    }
    report.icl = Some(icl);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisBranch {
    SingletonSupport,
    PositiveAtoms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominantToIclOutcome {
    /// Family-level dominance held and ICL_{2ε} passed.
    Confirmed,
    /// Family-level dominance held but ICL_{2ε} failed: the family does not
    /// sample the 1-measurement well enough to act as the premise.
    InconclusivePremise,
    /// Dominance already failed on the family.
    PremiseFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantToIclReport {
    pub branch: HypothesisBranch,
    pub dominance: DominanceReport,
    pub icl: Option<IclReport>,
    pub outcome: DominantToIclOutcome,
}

/// If `ν` is an ε-iso-dominant over the family, checks ICL_{2ε}(ν).
pub fn dominant_to_icl(
    x: &FiniteMMSpace,
    nu: &AtomicMeasure,
    eps: f64,
    family: &[ScalarField],
    max_subset_points: usize,
    max_cells: usize,
) -> Result<DominantToIclReport> {
    let branch = if nu.len() == 1 {
        HypothesisBranch::SingletonSupport
    } else {
        HypothesisBranch::PositiveAtoms
    };
    let dominance = check_iso_dominant(nu, x, eps, family, SearchMode::Exact, max_cells)?;
    if !dominance.passed() {
        return Ok(DominantToIclReport {
            branch,
            dominance,
            icl: None,
            outcome: DominantToIclOutcome::PremiseFailed,
        });
    }
    let icl = check_icl(x, nu, 2.0 * eps, max_subset_points)?;
    let outcome = if icl.passed {
        DominantToIclOutcome::Confirmed
    } else {
        DominantToIclOutcome::InconclusivePremise
    };
    Ok(DominantToIclReport {
        branch,
        dominance,
        icl: Some(icl),
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoorder::DominanceVerdict;
    use crate::lipschitz::{distance_family, mcshane_family};
    use crate::mmspace::{make_cube, make_torus};

    const SUB: usize = 22;
    const CELLS: usize = 400;

    fn cube(k: usize, n: usize) -> FiniteMMSpace {
        make_cube(k, n, 1.0, 4096).unwrap()
    }

    fn two_point() -> FiniteMMSpace {
        cube(2, 1)
    }

    /// Direct enumeration of every subset with `closed_neighborhood`.
    fn oracle_profile(x: &FiniteMMSpace, eps: f64) -> Vec<(f64, f64)> {
        let n = x.len();
        let mut best: Vec<(f64, f64)> = Vec::new();
        for mask in 1u64..1 << n {
            let set = mask_to_indices(mask, n);
            let v = x.mass_of(&set);
            let b = x.mass_of(&x.closed_neighborhood(&set, eps).unwrap());
            match best.iter_mut().find(|e| (e.0 - v).abs() <= 1e-12) {
                Some(e) => e.1 = e.1.min(b),
                None => best.push((v, b)),
            }
        }
        best.push((0.0, 0.0));
        best.sort_by(|a, b| a.0.total_cmp(&b.0));
        best
    }

    #[test]
    fn profile_examples() {
        let x = two_point();
        assert_eq!(isoperimetric_profile(&x, 1.0, SUB).unwrap().lookup(0.5).unwrap().value, 1.0);
        assert_eq!(isoperimetric_profile(&x, 0.0, SUB).unwrap().lookup(0.5).unwrap().value, 0.5);
        let sq = cube(2, 2);
        let p = isoperimetric_profile(&sq, 1.0, SUB).unwrap();
        let e = p.lookup(0.25).unwrap();
        assert_eq!(e.value, 0.75);
        assert_eq!(e.witness.len(), 1);
    }

    #[test]
    fn profile_matches_direct_enumeration() {
        let spaces = [cube(3, 2), make_torus(4, 1, 4096).unwrap(), cube(2, 3)];
        for x in &spaces {
            for eps in [0.0, 0.5, 1.0, 2.0] {
                let table = isoperimetric_profile(x, eps, SUB).unwrap();
                let oracle = oracle_profile(x, eps);
                assert_eq!(table.entries.len(), oracle.len());
                for (e, o) in table.entries.iter().zip(&oracle) {
                    assert!((e.volume - o.0).abs() <= 1e-12);
                    assert!((e.value - o.1).abs() <= 1e-12);
                    assert!(e.value >= e.volume - 1e-12);
                    let w = x.mass_of(&e.witness);
                    assert!((w - e.volume).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn profile_budget() {
        let x = cube(2, 3);
        assert!(matches!(
            isoperimetric_profile(&x, 1.0, 5),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn icl_examples() {
        let x = two_point();
        let nu = x.distance_pushforward(0).unwrap();
        assert!(check_icl(&x, &nu, 0.0, SUB).unwrap().passed);
        let sq = cube(2, 2);
        assert!(check_icl(&sq, &sq.distance_pushforward(0).unwrap(), 0.0, SUB).unwrap().passed);
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        assert!(check_icl(&x, &d0, 0.0, SUB).unwrap().passed);
        let bad = AtomicMeasure::uniform(&[0.0, 0.5]).unwrap();
        let r = check_icl(&x, &bad, 0.0, SUB).unwrap();
        assert!(!r.passed);
        let v = r.violation.unwrap();
        assert_eq!((v.a, v.b), (0.0, 0.5));
        assert!(check_icl(&x, &bad, 0.5, SUB).unwrap().passed);
    }

    #[test]
    fn ic_plus_examples() {
        let x = two_point();
        let u = AtomicMeasure::uniform_range(2).unwrap();
        let r = check_ic_plus(&x, &u, 0.0, SUB).unwrap();
        assert!(r.passed);
        assert_eq!(r.checks[0].profile_value, Some(1.0));
        let sq = cube(2, 2);
        assert!(check_ic_plus(&sq, &sq.distance_pushforward(0).unwrap(), 0.0, SUB).unwrap().passed);
        assert!(check_ic_plus(&x, &AtomicMeasure::uniform(&[0.0, 3.0]).unwrap(), 0.0, SUB).unwrap().passed);
        let r = check_ic_plus(&x, &AtomicMeasure::uniform(&[0.0, 0.5]).unwrap(), 0.0, SUB).unwrap();
        assert!(!r.passed);
        assert_eq!(r.checks[0].profile_value, Some(0.5));

        let third = AtomicMeasure::new(vec![0.0, 1.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let r = check_ic_plus(&x, &third, 0.0, SUB).unwrap();
        assert_eq!(r.checks[0].status, IcPlusStatus::Vacuous);
        assert!(r.passed);
    }

    #[test]
    fn ic_plus_to_icl_examples() {
        for x in [cube(2, 2), cube(3, 1)] {
            let nu = x.distance_pushforward(0).unwrap();
            let r = icl_from_ic_plus_bound(&x, &nu, 0.0, SUB).unwrap();
            assert!(r.ic_plus.passed && r.icl.passed && r.implication_holds);
        }
        let skew = FiniteMMSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.25, 0.75]).unwrap();
        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert!(matches!(
            icl_from_ic_plus_bound(&skew, &u, 0.0, SUB),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn icl_to_dominant_examples() {
        let sq = cube(2, 2);
        let nu = sq.distance_pushforward(0).unwrap();
        let mut fam = distance_family(&sq);
        fam.extend(mcshane_family(&sq, 50, 3, 7).unwrap());
        let r = icl_to_dominant(&sq, &nu, 0.0, &fam, SUB, CELLS).unwrap();
        assert!(r.side_condition_ok && r.consistent);
        assert_eq!(r.delta, 1.0);
        assert_eq!(r.dominance.unwrap().verdict, DominanceVerdict::CertifiedOverFamily);

        let x = two_point();
        let u = AtomicMeasure::uniform_range(2).unwrap();
        let r = icl_to_dominant(&x, &u, 0.0, &distance_family(&x), SUB, CELLS).unwrap();
        assert!(r.icl.unwrap().passed && r.dominance.unwrap().passed());

        let heavy = AtomicMeasure::new(vec![0.0, 1.0], vec![0.75, 0.25]).unwrap();
        let r = icl_to_dominant(&x, &heavy, 0.0, &distance_family(&x), SUB, CELLS).unwrap();
        assert!(!r.side_condition_ok);
        assert!(r.icl.is_none());
    }

    #[test]
    fn dominant_to_icl_examples() {
        let sq = cube(2, 2);
        let nu = sq.distance_pushforward(0).unwrap();
        let mut fam = distance_family(&sq);
        fam.extend(mcshane_family(&sq, 50, 3, 7).unwrap());
        let r = dominant_to_icl(&sq, &nu, 1.0, &fam, SUB, CELLS).unwrap();
        assert_eq!(r.outcome, DominantToIclOutcome::Confirmed);

        let x = two_point();
        let u = AtomicMeasure::uniform_range(2).unwrap();
        let r = dominant_to_icl(&x, &u, 0.0, &distance_family(&x), SUB, CELLS).unwrap();
        assert_eq!(r.outcome, DominantToIclOutcome::Confirmed);
        assert_eq!(r.branch, HypothesisBranch::PositiveAtoms);

        let half = AtomicMeasure::uniform(&[0.0, 0.5]).unwrap();
        let r = dominant_to_icl(&x, &half, 0.0, &[ScalarField::constant(2, 0.0)], SUB, CELLS).unwrap();
        assert_eq!(r.outcome, DominantToIclOutcome::InconclusivePremise);
    }
}
