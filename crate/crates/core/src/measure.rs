//! Finitely-supported measures on the real line.
//!
//! An [`AtomicMeasure`] is `Σ wᵢ·δ_{xᵢ}` with strictly increasing atoms and
//! positive weights of total mass in `(0, 1]`. Probability measures (total
//! mass 1 within [`tol::MASS`]) are the common case; sub-probability measures
//! appear as marginals of subtransport plans.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct AtomicMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Wire format: `{"atoms":[...], "weights":[...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TryFrom<MeasureJson> for AtomicMeasure {
    type Error = Error;

    fn try_from(value: MeasureJson) -> Result<Self> {
        AtomicMeasure::new(value.atoms, value.weights)
    }
}

impl From<AtomicMeasure> for MeasureJson {
    fn from(value: AtomicMeasure) -> Self {
        MeasureJson {
            atoms: value.atoms,
            weights: value.weights,
        }
    }
}

/// Gaps between consecutive support points.
///
/// `None` stands for the infinite gap below the minimum atom (in
/// `delta_minus`) or above the maximum atom (in `delta_plus`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportGaps {
    pub delta_minus: Vec<Option<f64>>,
    pub delta_plus: Vec<Option<f64>>,
    /// Largest finite `delta_minus`; 0 for a singleton support.
    pub max_gap: f64,
    /// Set when the support has a single atom and `max_gap` is a convention.
    pub singleton: bool,
}

impl AtomicMeasure {
    /// Builds a measure from strictly increasing atoms and positive weights.
    ///
    /// Atoms closer than [`tol::MASS`] are merged.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for (i, (&x, &w)) in atoms.iter().zip(&weights).enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {i} is not finite: {x}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "weight {i} must be positive and finite, got {w}"
                )));
            }
        }
        for (i, pair) in atoms.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::NotSorted {
                    index: i + 1,
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        Self::from_sorted_merging(atoms.into_iter().zip(weights))
    }

    /// Builds a measure from arbitrary `(atom, weight)` pairs: sorts, drops
    /// zero weights and merges near-duplicate atoms.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        for &(x, w) in &pairs {
            if !x.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMeasure(format!("bad pair ({x}, {w})")));
            }
        }
        pairs.retain(|&(_, w)| w > 0.0);
        if pairs.is_empty() {
            return Err(Error::InvalidMeasure("no positive weights".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::from_sorted_merging(pairs)
    }

    fn from_sorted_merging(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut group_start = f64::NEG_INFINITY;
        for (x, w) in pairs {
            if !atoms.is_empty() && x - group_start <= tol::MASS {
                *weights.last_mut().unwrap() += w;
            } else {
                atoms.push(x);
                weights.push(w);
                group_start = x;
            }
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        if acc > 1.0 + tol::MASS {
            return Err(Error::InvalidMeasure(format!("total mass {acc} exceeds 1")));
        }
        Ok(Self {
            atoms,
            weights,
            cumulative,
        })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// Uniform probability measure on the given points (duplicates add up).
    pub fn uniform(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point list"));
        }
        let w = 1.0 / points.len() as f64;
        Self::from_pairs(points.iter().map(|&x| (x, w)))
    }

    /// Uniform measure on `{0, 1, …, k−1}`.
    pub fn uniform_range(k: usize) -> Result<Self> {
        let points: Vec<f64> = (0..k).map(|i| i as f64).collect();
        Self::uniform(&points)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative weights: `cumulative()[i] = F(atoms()[i])`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= tol::MASS
    }

    pub fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability {
                mass: self.total_mass(),
            })
        }
    }

    /// Index of the atom equal to `x` within [`tol::MASS`].
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = self.atoms.partition_point(|&a| a < x - tol::MASS);
        (i < self.atoms.len() && (self.atoms[i] - x).abs() <= tol::MASS).then_some(i)
    }

    pub fn mean(&self) -> f64 {
        let m: f64 = self.atoms.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        m / self.total_mass()
    }

    /// `F(t) = μ((−∞, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a <= t);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// `F̃(s) = inf{t : s ≤ F(t)}` for `s ∈ (0, 1]`, and `c` for `s = 0`.
    pub fn generalized_inverse(&self, s: f64, c: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid("s", format!("{s} is outside [0, 1]")));
        }
        if s == 0.0 {
            return Ok(c);
        }
        let i = self.cumulative.partition_point(|&cum| cum < s - tol::MASS);
        Ok(self.atoms[i.min(self.atoms.len() - 1)])
    }

    /// `diam(μ; α)`: the shortest atom window carrying mass at least `α`.
    pub fn partial_diameter(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid("alpha", format!("{alpha} is outside [0, 1]")));
        }
        let need = alpha - tol::MASS;
        if need <= 0.0 {
            return Ok(0.0);
        }
        if self.total_mass() < need {
            return Err(invalid(
                "alpha",
                format!("{alpha} exceeds total mass {}", self.total_mass()),
            ));
        }
        let mut best = f64::INFINITY;
        let mut right = 0;
        for left in 0..self.atoms.len() {
            let before = if left == 0 { 0.0 } else { self.cumulative[left - 1] };
            if right < left {
                right = left;
            }
            while right < self.atoms.len() && self.cumulative[right] - before < need {
                right += 1;
            }
            if right == self.atoms.len() {
                break;
            }
            best = best.min(self.atoms[right] - self.atoms[left]);
        }
        Ok(best)
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &AtomicMeasure) -> Result<Self> {
        let mut pairs = Vec::with_capacity(self.len() * other.len());
        for (&x, &w) in self.atoms.iter().zip(&self.weights) {
            for (&y, &v) in other.atoms.iter().zip(&other.weights) {
                pairs.push((x + y, w * v));
            }
        }
        Self::from_pairs(pairs)
    }

    /// `n`-fold convolution power; `n = 0` gives `δ_0`.
    pub fn convolve_power(&self, n: usize) -> Result<Self> {
        let mut acc = Self::dirac(0.0)?;
        for _ in 0..n {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    /// Pushforward under `x ↦ a·x + b`.
    pub fn scale_shift(&self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(invalid("a", format!("scale must be finite and non-zero, got {a}")));
        }
        Self::from_pairs(
            self.atoms
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| (a * x + b, w)),
        )
    }

    /// Translates by `−mean` so the result has mean zero.
    pub fn centered(&self) -> Result<Self> {
        self.scale_shift(1.0, -self.mean())
    }

    pub fn support_gaps(&self) -> SupportGaps {
        let n = self.atoms.len();
        let mut delta_minus = Vec::with_capacity(n);
        let mut delta_plus = Vec::with_capacity(n);
        for i in 0..n {
            delta_minus.push((i > 0).then(|| self.atoms[i] - self.atoms[i - 1]));
            delta_plus.push((i + 1 < n).then(|| self.atoms[i + 1] - self.atoms[i]));
        }
        let max_gap = delta_minus.iter().flatten().fold(0.0_f64, |m, &g| m.max(g));
        SupportGaps {
            delta_minus,
            delta_plus,
            max_gap,
            singleton: n == 1,
        }
    }

    /// Reads the JSON measure format, validating every invariant.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text)?;
        Self::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(atoms: &[f64], weights: &[f64]) -> AtomicMeasure {
        AtomicMeasure::new(atoms.to_vec(), weights.to_vec()).unwrap()
    }

    // Brute-force oracle: convolution by enumerating the product grid.
    fn enumerate_sum(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &(x, w) in a {
            for &(y, v) in b {
                match out.iter_mut().find(|(z, _)| *z == x + y) {
                    Some(e) => e.1 += w * v,
                    None => out.push((x + y, w * v)),
                }
            }
        }
        out.sort_by(|p, q| p.0.total_cmp(&q.0));
        out
    }

    #[test]
    fn cdf_examples() {
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        assert_eq!(d0.cdf(-1.0), 0.0);
        assert_eq!(d0.cdf(0.0), 1.0);
        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(u.cdf(0.5), 0.5);
        assert_eq!(u.cdf(1.0), 1.0);
    }

    #[test]
    fn generalized_inverse_examples() {
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        assert_eq!(d0.generalized_inverse(0.7, 3.0).unwrap(), 0.0);
        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(u.generalized_inverse(0.5, 0.0).unwrap(), 0.0);
        assert_eq!(u.generalized_inverse(0.6, 0.0).unwrap(), 1.0);
        assert_eq!(u.generalized_inverse(0.0, 42.0).unwrap(), 42.0);
        assert!(u.generalized_inverse(1.5, 0.0).is_err());
        assert!(u.generalized_inverse(-0.1, 0.0).is_err());
    }

    #[test]
    fn partial_diameter_examples() {
        let u = AtomicMeasure::uniform_range(3).unwrap();
        assert_eq!(u.partial_diameter(0.0).unwrap(), 0.0);
        assert_eq!(u.partial_diameter(2.0 / 3.0).unwrap(), 1.0);
        assert_eq!(u.partial_diameter(1.0).unwrap(), 2.0);
        assert_eq!(u.partial_diameter(1.0 / 3.0).unwrap(), 0.0);
        assert!(u.partial_diameter(1.2).is_err());
    }

    #[test]
    fn convolve_examples() {
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        let nu = m(&[-1.0, 0.5, 3.0], &[0.2, 0.3, 0.5]);
        assert_eq!(d0.convolve(&nu).unwrap(), nu);

        let u2 = AtomicMeasure::uniform_range(2).unwrap();
        let c = u2.convolve(&u2).unwrap();
        let oracle = enumerate_sum(&[(0.0, 0.5), (1.0, 0.5)], &[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(c.atoms(), &[0.0, 1.0, 2.0]);
        for ((&w, &(_, o)), e) in c.weights().iter().zip(&oracle).zip([0.25, 0.5, 0.25]) {
            assert!((w - o).abs() < 1e-12 && (w - e).abs() < 1e-12);
        }

        let u3 = AtomicMeasure::uniform_range(3).unwrap();
        let c = u3.convolve(&u3).unwrap();
        let expect = [1.0, 2.0, 3.0, 2.0, 1.0].map(|x| x / 9.0);
        assert_eq!(c.atoms(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        for (w, e) in c.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_shift_examples() {
        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(u.scale_shift(1.0, 0.0).unwrap(), u);
        assert_eq!(u.scale_shift(2.0, 0.0).unwrap().atoms(), &[0.0, 2.0]);
        assert_eq!(u.scale_shift(1.0, -0.5).unwrap().atoms(), &[-0.5, 0.5]);
        let r = m(&[0.0, 1.0], &[0.25, 0.75]).scale_shift(-1.0, 0.0).unwrap();
        assert_eq!(r.atoms(), &[-1.0, 0.0]);
        assert_eq!(r.weights(), &[0.75, 0.25]);
        assert!(u.scale_shift(0.0, 1.0).is_err());
    }

    #[test]
    fn support_gap_examples() {
        let g = AtomicMeasure::dirac(0.0).unwrap().support_gaps();
        assert!(g.singleton);
        assert_eq!(g.max_gap, 0.0);

        let g = AtomicMeasure::uniform_range(3).unwrap().support_gaps();
        assert_eq!(g.delta_minus, vec![None, Some(1.0), Some(1.0)]);
        assert_eq!(g.delta_plus, vec![Some(1.0), Some(1.0), None]);
        assert_eq!(g.max_gap, 1.0);

        let g = AtomicMeasure::uniform(&[0.0, 0.5, 2.0]).unwrap().support_gaps();
        assert_eq!(g.max_gap, 1.5);
    }

    #[test]
    fn construction_rejects_bad_input() {
        let err = AtomicMeasure::from_json(r#"{"atoms":[0,2,1],"weights":[0.2,0.3,0.5]}"#)
            .unwrap_err();
        assert!(
            matches!(err, Error::NotSorted { index: 2, .. }),
            "unexpected error {err}"
        );
        assert!(err.to_string().contains("index 2"));
        assert!(AtomicMeasure::new(vec![0.0], vec![0.0]).is_err());
        assert!(AtomicMeasure::new(vec![0.0, 1.0], vec![0.7, 0.7]).is_err());
        assert!(AtomicMeasure::new(vec![], vec![]).is_err());
        assert!(AtomicMeasure::from_json(r#"{"atoms":[0],"weights":[1],"x":1}"#).is_err());
    }

    #[test]
    fn near_duplicate_atoms_merge() {
        let mu = AtomicMeasure::from_pairs([(0.1 + 0.2, 0.5), (0.3, 0.5)]).unwrap();
        assert_eq!(mu.len(), 1);
        assert!(mu.is_probability());
        let nu = AtomicMeasure::new(vec![1.0, 1.0 + 1e-13], vec![0.5, 0.5]).unwrap();
        assert_eq!(nu.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mu = m(&[-0.5, 0.1, 7.25], &[0.125, 0.375, 0.5]);
        assert_eq!(AtomicMeasure::from_json(&mu.to_json()).unwrap(), mu);
    }

    fn arb_measure() -> impl Strategy<Value = AtomicMeasure> {
        prop::collection::vec((-20i32..20, 1u32..8), 1..7).prop_map(|raw| {
            let total: u32 = raw.iter().map(|r| r.1).sum();
            AtomicMeasure::from_pairs(
                raw.into_iter()
                    .map(|(x, w)| (x as f64 * 0.5, w as f64 / total as f64)),
            )
            .unwrap()
        })
    }

    fn close(a: &AtomicMeasure, b: &AtomicMeasure) -> bool {
        a.len() == b.len()
            && a.atoms().iter().zip(b.atoms()).all(|(x, y)| (x - y).abs() <= 1e-12)
            && a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= 1e-12)
    }

    proptest! {
        #[test]
        fn gen_inverse_lemma(mu in arb_measure()) {
            let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
            // (1) F ∘ F̃(s) ≥ s
            for &s in &grid {
                let q = mu.generalized_inverse(s, 0.0).unwrap();
                prop_assert!(mu.cdf(q) >= s - 1e-12);
            }
            // (2) F̃ ∘ F(t) ≤ t at atoms
            for &t in mu.atoms() {
                let f = mu.cdf(t).min(1.0);
                prop_assert!(mu.generalized_inverse(f, 0.0).unwrap() <= t);
            }
            // (3) {s ∈ (0,1] : F̃(s) ≤ t} = (0, F(t)], checked on the grid
            let mut probes: Vec<f64> = mu.atoms().to_vec();
            probes.extend(mu.atoms().iter().map(|a| a - 0.25));
            for &t in &probes {
                let ft = mu.cdf(t);
                for &s in &grid {
                    let lhs = mu.generalized_inverse(s, 0.0).unwrap() <= t;
                    if (s - ft).abs() > 1e-9 {
                        prop_assert_eq!(lhs, s <= ft);
                    }
                }
            }
        }

        #[test]
        fn partial_diameter_monotone(mu in arb_measure()) {
            let mut last = 0.0;
            for i in 0..=50 {
                let d = mu.partial_diameter(i as f64 / 50.0).unwrap();
                prop_assert!(d >= last);
                last = d;
            }
        }

        #[test]
        fn convolve_commutative_associative(a in arb_measure(), b in arb_measure(), c in arb_measure()) {
            let ab = a.convolve(&b).unwrap();
            prop_assert!(close(&ab, &b.convolve(&a).unwrap()));
            let l = ab.convolve(&c).unwrap();
            let r = a.convolve(&b.convolve(&c).unwrap()).unwrap();
            prop_assert!(close(&l, &r));
            prop_assert!((l.total_mass() - 1.0).abs() <= 1e-12);
        }
    }
}
