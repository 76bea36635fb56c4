use serde::{Deserialize, Serialize};

use crate::coupling::PairSet;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::tol;

/// Plans with at most this many grid entries serialize as a dense matrix.
pub const DENSE_JSON_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanCell {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
}

/// A (sub)transport plan on the grid `row_atoms × col_atoms`.
///
/// Cells are kept sorted by `(row, col)` with strictly positive mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanJson", into = "PlanJson")]
pub struct Plan {
    rows: Vec<f64>,
    cols: Vec<f64>,
    cells: Vec<PlanCell>,
}

/// Wire format: `{"rows":[...], "cols":[...], "mass":[[...]]}` or with
/// `"triplets":[[i, j, mass], ...]` in place of `"mass"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanJson {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triplets: Option<Vec<(usize, usize, f64)>>,
}

impl TryFrom<PlanJson> for Plan {
    type Error = Error;

    fn try_from(value: PlanJson) -> Result<Self> {
        let cells: Vec<PlanCell> = match (value.mass, value.triplets) {
            (Some(mass), None) => {
                if mass.len() != value.rows.len()
                    || mass.iter().any(|r| r.len() != value.cols.len())
                {
                    return Err(Error::Incompatible("mass matrix shape".into()));
                }
                mass.iter()
                    .enumerate()
                    .flat_map(|(row, r)| {
                        r.iter().enumerate().map(move |(col, &mass)| PlanCell { row, col, mass })
                    })
                    .collect()
            }
            (None, Some(t)) => t
                .into_iter()
                .map(|(row, col, mass)| PlanCell { row, col, mass })
                .collect(),
            _ => {
                return Err(Error::Incompatible(
                    "plan needs exactly one of `mass` or `triplets`".into(),
                ))
            }
        };
        Plan::new(value.rows, value.cols, cells)
    }
}

impl From<Plan> for PlanJson {
    fn from(value: Plan) -> Self {
        let (m, n) = (value.rows.len(), value.cols.len());
        if m * n <= DENSE_JSON_LIMIT {
            let mut mass = vec![vec![0.0; n]; m];
            for c in &value.cells {
                mass[c.row][c.col] = c.mass;
            }
            PlanJson {
                rows: value.rows,
                cols: value.cols,
                mass: Some(mass),
                triplets: None,
            }
        } else {
            PlanJson {
                rows: value.rows,
                cols: value.cols,
                mass: None,
                triplets: Some(value.cells.iter().map(|c| (c.row, c.col, c.mass)).collect()),
            }
        }
    }
}

impl Plan {
    /// Builds a plan, merging repeated cells and dropping zero cells.
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, mut cells: Vec<PlanCell>) -> Result<Self> {
        for c in &cells {
            if c.row >= rows.len() || c.col >= cols.len() {
                return Err(Error::Incompatible(format!(
                    "cell ({}, {}) outside {}x{} grid",
                    c.row,
                    c.col,
                    rows.len(),
                    cols.len()
                )));
            }
            if !(c.mass.is_finite() && c.mass >= 0.0) {
                return Err(Error::Incompatible(format!("negative cell mass {}", c.mass)));
            }
        }
        cells.sort_by_key(|c| (c.row, c.col));
        let mut merged: Vec<PlanCell> = Vec::with_capacity(cells.len());
        for c in cells {
            match merged.last_mut() {
                Some(last) if last.row == c.row && last.col == c.col => last.mass += c.mass,
                _ => merged.push(c),
            }
        }
        merged.retain(|c| c.mass > 0.0);
        Ok(Self {
            rows,
            cols,
            cells: merged,
        })
    }

    /// `(id, id)_* μ`.
    pub fn identity(mu: &AtomicMeasure) -> Self {
        let cells = mu
            .weights()
            .iter()
            .enumerate()
            .map(|(i, &mass)| PlanCell { row: i, col: i, mass })
            .collect();
        Self {
            rows: mu.atoms().to_vec(),
            cols: mu.atoms().to_vec(),
            cells,
        }
    }

    /// Product coupling `μ ⊗ ν`.
    pub fn product(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Self {
        let mut cells = Vec::with_capacity(mu.len() * nu.len());
        for (i, &w) in mu.weights().iter().enumerate() {
            for (j, &v) in nu.weights().iter().enumerate() {
                cells.push(PlanCell { row: i, col: j, mass: w * v });
            }
        }
        Self {
            rows: mu.atoms().to_vec(),
            cols: nu.atoms().to_vec(),
            cells,
        }
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn cells(&self) -> &[PlanCell] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows.len()];
        for c in &self.cells {
            s[c.row] += c.mass;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols.len()];
        for c in &self.cells {
            s[c.col] += c.mass;
        }
        s
    }

    pub fn mass_at(&self, row: usize, col: usize) -> f64 {
        self.cells
            .binary_search_by_key(&(row, col), |c| (c.row, c.col))
            .map(|k| self.cells[k].mass)
            .unwrap_or(0.0)
    }

    /// Total mass on the given grid cells (duplicates counted once).
    pub fn mass_on(&self, cells: &[(usize, usize)]) -> f64 {
        let mut sorted = cells.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.iter().map(|&(i, j)| self.mass_at(i, j)).sum()
    }

    /// The support as a set of `(x, y)` points.
    pub fn support(&self) -> PairSet {
        PairSet::new(
            self.cells
                .iter()
                .map(|c| (self.rows[c.row], self.cols[c.col]))
                .collect(),
        )
    }

    pub fn support_cells(&self) -> Vec<(usize, usize)> {
        self.cells.iter().map(|c| (c.row, c.col)).collect()
    }

    fn check_atoms(&self, mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<()> {
        let same = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol::MASS)
        };
        if !same(&self.rows, mu.atoms()) || !same(&self.cols, nu.atoms()) {
            return Err(Error::Incompatible("plan grid does not match the measures".into()));
        }
        Ok(())
    }

    /// Marginals equal `μ` and `ν` within [`tol::MARGINAL`].
    pub fn is_transport_plan(&self, mu: &AtomicMeasure, nu: &AtomicMeasure) -> bool {
        self.check_atoms(mu, nu).is_ok()
            && self
                .row_sums()
                .iter()
                .zip(mu.weights())
                .all(|(s, w)| (s - w).abs() <= tol::MARGINAL)
            && self
                .col_sums()
                .iter()
                .zip(nu.weights())
                .all(|(s, w)| (s - w).abs() <= tol::MARGINAL)
    }

    /// Marginals dominated by `μ` and `ν` within [`tol::MARGINAL`].
    pub fn is_subtransport_plan(&self, mu: &AtomicMeasure, nu: &AtomicMeasure) -> bool {
        self.check_atoms(mu, nu).is_ok()
            && self
                .row_sums()
                .iter()
                .zip(mu.weights())
                .all(|(s, w)| *s <= w + tol::MARGINAL)
            && self
                .col_sums()
                .iter()
                .zip(nu.weights())
                .all(|(s, w)| *s <= w + tol::MARGINAL)
    }

    /// Keeps only the listed cells.
    pub fn restrict(&self, cells: &[(usize, usize)]) -> Plan {
        let mut keep = cells.to_vec();
        keep.sort_unstable();
        let kept = self
            .cells
            .iter()
            .filter(|c| keep.binary_search(&(c.row, c.col)).is_ok())
            .copied()
            .collect();
        Plan {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            cells: kept,
        }
    }

    /// Extends a subtransport plan to a transport plan by routing the unused
    /// marginal mass with the north-west corner rule.
    pub fn complete(&self, mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<Plan> {
        if !self.is_subtransport_plan(mu, nu) {
            return Err(Error::Incompatible("not a subtransport plan of μ, ν".into()));
        }
        let mut a: Vec<f64> = mu
            .weights()
            .iter()
            .zip(self.row_sums())
            .map(|(w, s)| (w - s).max(0.0))
            .collect();
        let mut b: Vec<f64> = nu
            .weights()
            .iter()
            .zip(self.col_sums())
            .map(|(w, s)| (w - s).max(0.0))
            .collect();
        let mut cells = self.cells.clone();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= tol::MASS {
                i += 1;
                continue;
            }
            if b[j] <= tol::MASS {
                j += 1;
                continue;
            }
            let q = a[i].min(b[j]);
            cells.push(PlanCell { row: i, col: j, mass: q });
            a[i] -= q;
            b[j] -= q;
        }
        Plan::new(self.rows.clone(), self.cols.clone(), cells)
    }

    /// `dis_Δ π = inf_S max{dis_Δ S, 1 − π(S)}`, evaluated exactly over the
    /// distance sublevel sets of the support.
    pub fn dis_delta(&self) -> f64 {
        let mut by_dist: Vec<(f64, f64)> = self
            .cells
            .iter()
            .map(|c| ((self.rows[c.row] - self.cols[c.col]).abs(), c.mass))
            .collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        // S = ∅
        let mut best = 1.0_f64;
        let mut inside = 0.0;
        let mut k = 0;
        while k < by_dist.len() {
            let c = by_dist[k].0;
            while k < by_dist.len() && by_dist[k].0 == c {
                inside += by_dist[k].1;
                k += 1;
            }
            let outside = (1.0 - inside).max(0.0);
            let outside = if outside <= tol::MASS { 0.0 } else { outside };
            best = best.min(c.max(outside));
        }
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serialization is infallible")
    }
}

/// The comonotone (quantile) coupling, obtained by merging the two
/// cumulative weight sequences.
pub fn quantile_coupling(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<Plan> {
    mu.require_probability()?;
    nu.require_probability()?;
    let (cm, cn) = (mu.cumulative(), nu.cumulative());
    let mut cells = Vec::with_capacity(mu.len() + nu.len());
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    while i < cm.len() && j < cn.len() {
        let next = cm[i].min(cn[j]);
        if next > prev {
            cells.push(PlanCell {
                row: i,
                col: j,
                mass: next - prev,
            });
            prev = next;
        }
        let step_i = cm[i] <= next + tol::MASS;
        let step_j = cn[j] <= next + tol::MASS;
        if step_i {
            i += 1;
        }
        if step_j {
            j += 1;
        }
    }
    Plan::new(mu.atoms().to_vec(), nu.atoms().to_vec(), cells)
}

/// Glues `π₁ ∈ Π(μ₁, μ₂)` and `π₂ ∈ Π(μ₂, μ₃)` (both possibly sub-plans) along
/// the middle measure: at each middle atom `y` the conditional rows of `π₁`
/// and columns of `π₂` are multiplied and weighted by
/// `min{(pr₂)_*π₁(y), (pr₁)_*π₂(y)}`.
pub fn compose_subtransport(pi1: &Plan, pi2: &Plan) -> Result<Plan> {
    let mid1 = pi1.cols();
    let mid2 = pi2.rows();
    if mid1.len() != mid2.len() || mid1.iter().zip(mid2).any(|(a, b)| (a - b).abs() > tol::MASS) {
        return Err(Error::Incompatible(format!(
            "middle atom sets differ ({} vs {} atoms)",
            mid1.len(),
            mid2.len()
        )));
    }
    let into_mid = pi1.col_sums();
    let out_of_mid = pi2.row_sums();
    let mut by_mid_in: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mid1.len()];
    for c in pi1.cells() {
        by_mid_in[c.col].push((c.row, c.mass));
    }
    let mut by_mid_out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mid2.len()];
    for c in pi2.cells() {
        by_mid_out[c.row].push((c.col, c.mass));
    }
    let mut cells = Vec::new();
    for y in 0..mid1.len() {
        let w = into_mid[y].min(out_of_mid[y]);
        if w <= 0.0 {
            continue;
        }
        let scale = w / (into_mid[y] * out_of_mid[y]);
        for &(x, a) in &by_mid_in[y] {
            for &(z, b) in &by_mid_out[y] {
                cells.push(PlanCell {
                    row: x,
                    col: z,
                    mass: a * b * scale,
                });
            }
        }
    }
    Plan::new(pi1.rows().to_vec(), pi2.cols().to_vec(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(atoms: &[f64], weights: &[f64]) -> AtomicMeasure {
        AtomicMeasure::new(atoms.to_vec(), weights.to_vec()).unwrap()
    }

    fn cells_of(p: &Plan) -> Vec<(usize, usize, f64)> {
        p.cells().iter().map(|c| (c.row, c.col, c.mass)).collect()
    }

    #[test]
    fn dis_delta_examples() {
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        assert_eq!(Plan::identity(&d0).dis_delta(), 0.0);
        let d1 = AtomicMeasure::dirac(1.0).unwrap();
        assert_eq!(Plan::product(&d0, &d1).dis_delta(), 1.0);
        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(Plan::product(&u, &d0).dis_delta(), 0.5);
    }

    #[test]
    fn quantile_examples() {
        let d0 = AtomicMeasure::dirac(0.0).unwrap();
        let nu = m(&[1.0, 2.0, 5.0], &[0.25, 0.25, 0.5]);
        assert_eq!(quantile_coupling(&d0, &nu).unwrap(), Plan::product(&d0, &nu));

        let u = AtomicMeasure::uniform_range(2).unwrap();
        let v = AtomicMeasure::uniform(&[10.0, 11.0]).unwrap();
        let q = quantile_coupling(&u, &v).unwrap();
        assert_eq!(cells_of(&q), vec![(0, 0, 0.5), (1, 1, 0.5)]);
        assert_eq!(q.support().points(), &[(0.0, 10.0), (1.0, 11.0)]);

        let w = AtomicMeasure::uniform_range(4).unwrap();
        let q = quantile_coupling(&u, &w).unwrap();
        assert_eq!(
            cells_of(&q),
            vec![(0, 0, 0.25), (0, 1, 0.25), (1, 2, 0.25), (1, 3, 0.25)]
        );
        assert!(q.is_transport_plan(&u, &w));
    }

    #[test]
    fn compose_examples() {
        let mu = m(&[0.0, 1.0, 3.0], &[0.25, 0.25, 0.5]);
        let id = Plan::identity(&mu);
        assert_eq!(compose_subtransport(&id, &id).unwrap(), id);

        let u = AtomicMeasure::uniform_range(2).unwrap();
        let v = AtomicMeasure::uniform(&[5.0, 6.0]).unwrap();
        let c = compose_subtransport(
            &quantile_coupling(&u, &u).unwrap(),
            &quantile_coupling(&u, &v).unwrap(),
        )
        .unwrap();
        assert_eq!(cells_of(&c), vec![(0, 0, 0.5), (1, 1, 0.5)]);
        assert_eq!(c.cols(), v.atoms());
    }

    #[test]
    fn compose_mass_bound() {
        // Two sub-plans of mass 0.9 whose deficits sit on different middle atoms.
        let a = m(&[0.0, 1.0], &[0.5, 0.5]);
        let p1 = Plan::new(
            a.atoms().to_vec(),
            a.atoms().to_vec(),
            vec![
                PlanCell { row: 0, col: 0, mass: 0.4 },
                PlanCell { row: 1, col: 1, mass: 0.5 },
            ],
        )
        .unwrap();
        let p2 = Plan::new(
            a.atoms().to_vec(),
            a.atoms().to_vec(),
            vec![
                PlanCell { row: 0, col: 0, mass: 0.5 },
                PlanCell { row: 1, col: 1, mass: 0.4 },
            ],
        )
        .unwrap();
        let c = compose_subtransport(&p1, &p2).unwrap();
        // conditional-product oracle: min(0.4, 0.5) + min(0.5, 0.4)
        assert!((c.total_mass() - 0.8).abs() < 1e-15);
        assert!(c.total_mass() >= p1.total_mass() + p2.total_mass() - 1.0 - 1e-10);
        assert!(c.is_subtransport_plan(&a, &a));
    }

    #[test]
    fn compose_rejects_mismatched_middle() {
        let u = AtomicMeasure::uniform_range(2).unwrap();
        let v = AtomicMeasure::uniform_range(3).unwrap();
        let p1 = quantile_coupling(&u, &u).unwrap();
        let p2 = quantile_coupling(&v, &v).unwrap();
        assert!(compose_subtransport(&p1, &p2).is_err());
    }

    #[test]
    fn complete_fills_marginals() {
        let mu = m(&[0.0, 1.0, 2.0], &[0.25, 0.25, 0.5]);
        let nu = m(&[0.0, 3.0], &[0.5, 0.5]);
        let partial = Plan::new(
            mu.atoms().to_vec(),
            nu.atoms().to_vec(),
            vec![PlanCell { row: 2, col: 1, mass: 0.3 }],
        )
        .unwrap();
        let full = partial.complete(&mu, &nu).unwrap();
        assert!(full.is_transport_plan(&mu, &nu));
        assert!(full.mass_at(2, 1) >= 0.3);
    }

    #[test]
    fn json_dense_and_sparse() {
        let u = AtomicMeasure::uniform_range(4).unwrap();
        let q = quantile_coupling(&u, &u).unwrap();
        let text = q.to_json();
        assert!(text.contains("\"mass\""));
        let back: Plan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);

        let sparse = r#"{"rows":[0,1],"cols":[0,1],"triplets":[[0,0,0.5],[1,1,0.5]]}"#;
        let p: Plan = serde_json::from_str(sparse).unwrap();
        let u2 = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(p, quantile_coupling(&u2, &u2).unwrap());
        assert!(serde_json::from_str::<Plan>(r#"{"rows":[0],"cols":[0]}"#).is_err());
    }

}
