//! Finite metric measure spaces and the example families: discrete ℓ¹
//! cubes, discrete tori and Cartesian products of graphs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::AtomicMeasure;
use crate::tol;

/// A finite mm-space: dense distance matrix plus positive point weights
/// summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct FiniteMMSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// Wire format: `{"dist": [[...]], "weights": [...], "labels": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub dist: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl TryFrom<SpaceJson> for FiniteMMSpace {
    type Error = Error;

    fn try_from(value: SpaceJson) -> Result<Self> {
        let mut space = FiniteMMSpace::validated(value.dist, value.weights)?;
        if let Some(labels) = value.labels {
            space = space.with_labels(labels)?;
        }
        Ok(space)
    }
}

impl From<FiniteMMSpace> for SpaceJson {
    fn from(value: FiniteMMSpace) -> Self {
        let dist = (0..value.n)
            .map(|i| value.dist[i * value.n..(i + 1) * value.n].to_vec())
            .collect();
        SpaceJson {
            dist,
            weights: value.weights,
            labels: value.labels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricViolation {
    NegativeDistance { i: usize, j: usize, d: f64 },
    NonzeroDiagonal { i: usize, d: f64 },
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    Triangle { i: usize, j: usize, k: usize, direct: f64, via: f64 },
    WeightSum { sum: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FiniteMMSpace {
    /// Builds a space after checking shape, finiteness and the weights.
    /// Metric axioms are not enforced here; see [`FiniteMMSpace::validated`].
    pub fn new(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Empty("space"));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!(
                "distance matrix must be {n}x{n} to match the weights"
            )));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        if let Some(d) = flat.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidSpace(format!("non-finite distance {d}")));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidSpace(format!("weight {i} must be positive, got {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::MASS {
            return Err(Error::InvalidSpace(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self {
            n,
            dist: flat,
            weights,
            labels: None,
        })
    }

    /// [`FiniteMMSpace::new`] plus a clean [`validate_metric`] report.
    pub fn validated(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let space = Self::new(dist, weights)?;
        let report = space.validate_metric();
        match report.violations.first() {
            None => Ok(space),
            Some(v) => Err(Error::InvalidSpace(format!(
                "{} metric violation(s), first: {v:?}",
                report.violations.len()
            ))),
        }
    }

    /// Uniform probability measure on a distance matrix.
    pub fn uniform(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Empty("space"));
        }
        Self::new(dist, vec![1.0 / n as f64; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidSpace(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// True when all weights agree with `1/|X|` within [`tol::MASS`].
    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.n as f64;
        self.weights.iter().all(|w| (w - u).abs() <= tol::MASS)
    }

    pub fn mass_of(&self, points: &[usize]) -> f64 {
        points.iter().map(|&i| self.weights[i]).sum()
    }

    /// `tX = (X, t·d, m)`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("t", format!("scale must be positive, got {t}")));
        }
        Ok(Self {
            n: self.n,
            dist: self.dist.iter().map(|d| d * t).collect(),
            weights: self.weights.clone(),
            labels: self.labels.clone(),
        })
    }

    /// Lists every violated metric axiom with its witnesses.
    pub fn validate_metric(&self) -> MetricReport {
        let n = self.n;
        let mut violations = Vec::new();
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                violations.push(MetricViolation::NonzeroDiagonal { i, d: self.d(i, i) });
            }
            for j in 0..n {
                let dij = self.d(i, j);
                if dij < 0.0 {
                    violations.push(MetricViolation::NegativeDistance { i, j, d: dij });
                }
                if j > i && (dij - self.d(j, i)).abs() > tol::DISTANCE {
                    violations.push(MetricViolation::Asymmetric {
                        i,
                        j,
                        dij,
                        dji: self.d(j, i),
                    });
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                let direct = self.d(i, k);
                for j in 0..n {
                    let via = self.d(i, j) + self.d(j, k);
                    if direct > via + tol::DISTANCE {
                        violations.push(MetricViolation::Triangle { i, j, k, direct, via });
                    }
                }
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > tol::MASS {
            violations.push(MetricViolation::WeightSum { sum });
        }
        MetricReport { violations }
    }

    /// `B_r(A) = {y : d(y, A) ≤ r}` as a sorted index list.
    pub fn closed_neighborhood(&self, set: &[usize], r: f64) -> Result<Vec<usize>> {
        if set.is_empty() {
            return Err(Error::Empty("point set"));
        }
        if !(r >= 0.0) {
            return Err(invalid("r", format!("radius must be non-negative, got {r}")));
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= self.n) {
            return Err(invalid("set", format!("point {bad} out of range")));
        }
        Ok((0..self.n)
            .filter(|&y| set.iter().any(|&a| self.d(a, y) <= r + tol::DISTANCE))
            .collect())
    }

    /// `(d(·, base))_* m_X`.
    pub fn distance_pushforward(&self, base: usize) -> Result<AtomicMeasure> {
        if base >= self.n {
            return Err(invalid("base", format!("point {base} out of range")));
        }
        AtomicMeasure::from_pairs(self.row(base).iter().copied().zip(self.weights.iter().copied()))
    }
}

/// Coordinates of `index` in `[k]^n`, most significant coordinate first.
pub fn grid_coords(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    let mut c = vec![0; n];
    for slot in c.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
    c
}

fn grid_size(k: usize, n: usize, max_points: usize) -> Result<usize> {
    let size = k.checked_pow(n as u32).unwrap_or(usize::MAX);
    if size > max_points {
        return Err(Error::BudgetExceeded {
            what: "space size",
            size,
            budget: max_points,
        });
    }
    Ok(size)
}

fn coord_label(c: &[usize]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Product space on `[k]^n` whose distance is the sum of per-coordinate
/// distances given by `factor(i, a, b)`.
fn product_space(
    k: usize,
    n: usize,
    max_points: usize,
    factor: impl Fn(usize, usize, usize) -> f64,
) -> Result<FiniteMMSpace> {
    let size = grid_size(k, n, max_points)?;
    let coords: Vec<Vec<usize>> = (0..size).map(|i| grid_coords(i, k, n)).collect();
    let mut dist = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..size {
            dist[i][j] = (0..n).map(|c| factor(c, coords[i][c], coords[j][c])).sum();
        }
    }
    let labels = coords.iter().map(|c| coord_label(c)).collect();
    FiniteMMSpace::uniform(dist)?.with_labels(labels)
}

/// `[k]^n` with `scale·ℓ¹` distance and uniform measure.
pub fn make_cube(k: usize, n: usize, scale: f64, max_points: usize) -> Result<FiniteMMSpace> {
    if k < 2 {
        return Err(invalid("k", format!("need k ≥ 2, got {k}")));
    }
    if n < 1 {
        return Err(invalid("n", "need n ≥ 1"));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid("scale", format!("must be positive, got {scale}")));
    }
    product_space(k, n, max_points, |_, a, b| scale * a.abs_diff(b) as f64)
}

/// `(ℤ/kℤ)^n` with cyclic ℓ¹ distance and uniform measure; `k` must be even.
pub fn make_torus(k: usize, n: usize, max_points: usize) -> Result<FiniteMMSpace> {
    if k < 2 || k % 2 != 0 {
        return Err(invalid(
            "k",
            format!("the discrete torus example requires a positive even k ≥ 2, got {k}"),
        ));
    }
    if n < 1 {
        return Err(invalid("n", "need n ≥ 1"));
    }
    product_space(k, n, max_points, |_, a, b| {
        let d = a.abs_diff(b);
        d.min(k - d) as f64
    })
}

/// Undirected graph as an explicit edge list: `{"order": k, "edges": [[i,j],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub order: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn complete(k: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                edges.push([i, j]);
            }
        }
        Self { order: k, edges }
    }

    pub fn path(k: usize) -> Self {
        Self {
            order: k,
            edges: (1..k).map(|i| [i - 1, i]).collect(),
        }
    }

    pub fn cycle(k: usize) -> Self {
        let mut g = Self::path(k);
        if k > 2 {
            g.edges.push([k - 1, 0]);
        }
        g
    }

    /// All-pairs hop distances; `None` if the graph is disconnected.
    pub fn path_metric(&self) -> Result<Option<Vec<Vec<usize>>>> {
        let k = self.order;
        let mut adj = vec![Vec::new(); k];
        for &[a, b] in &self.edges {
            if a >= k || b >= k {
                return Err(invalid("edges", format!("edge ({a},{b}) outside order {k}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut all = Vec::with_capacity(k);
        for s in 0..k {
            let mut d = vec![usize::MAX; k];
            d[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if d[v] == usize::MAX {
                        d[v] = d[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if d.contains(&usize::MAX) {
                return Ok(None);
            }
            all.push(d);
        }
        Ok(Some(all))
    }
}

/// Cartesian product of connected graphs of a common order `k ≥ 2` with the
/// path metric (sum of per-factor hop distances) and uniform measure.
pub fn make_product_graph(graphs: &[Graph], max_points: usize) -> Result<FiniteMMSpace> {
    let first = graphs.first().ok_or(Error::Empty("graph list"))?;
    let k = first.order;
    if k < 2 {
        return Err(invalid("graphs", format!("order must be ≥ 2, got {k}")));
    }
    let mut metrics = Vec::with_capacity(graphs.len());
    for (index, g) in graphs.iter().enumerate() {
        if g.order != k {
            return Err(Error::OrderMismatch {
                index,
                expected: k,
                found: g.order,
            });
        }
        metrics.push(g.path_metric()?.ok_or(Error::Disconnected { index })?);
    }
    product_space(k, graphs.len(), max_points, |c, a, b| metrics[c][a][b] as f64)
}
