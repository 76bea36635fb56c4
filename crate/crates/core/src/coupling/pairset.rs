use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite set of points in ℝ², deduplicated and sorted on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PairSet {
    points: Vec<(f64, f64)>,
}

impl From<Vec<(f64, f64)>> for PairSet {
    fn from(points: Vec<(f64, f64)>) -> Self {
        Self::new(points)
    }
}

impl From<PairSet> for Vec<(f64, f64)> {
    fn from(value: PairSet) -> Self {
        value.points
    }
}

/// One ordered-pair term of the iso-deviation: `y − y′ − max{x − x′, 0}`.
#[inline]
pub fn dev_term(p: (f64, f64), q: (f64, f64)) -> f64 {
    p.1 - q.1 - (p.0 - q.0).max(0.0)
}

#[inline]
fn l1(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).abs() + (p.1 - q.1).abs()
}

impl PairSet {
    pub fn new(mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        points.dedup();
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn nonempty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::Empty("pair set"))
        } else {
            Ok(())
        }
    }

    /// Iso-deviation `dev_≻ S`: maximum over all ordered pairs, self-pairs
    /// included, so the result is never negative.
    pub fn dev_succ(&self) -> Result<f64> {
        self.nonempty()?;
        let mut best = 0.0_f64;
        for &p in &self.points {
            for &q in &self.points {
                best = best.max(dev_term(p, q));
            }
        }
        Ok(best)
    }

    /// Distortion from the diagonal: `max |x − y|`.
    pub fn dis_delta(&self) -> Result<f64> {
        self.nonempty()?;
        Ok(self.points.iter().map(|&(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }

    /// Two-sided Hausdorff distance under the ℓ¹ metric on ℝ².
    pub fn hausdorff_l1(&self, other: &PairSet) -> Result<f64> {
        self.nonempty()?;
        other.nonempty()?;
        let directed = |a: &[(f64, f64)], b: &[(f64, f64)]| {
            a.iter()
                .map(|&p| b.iter().map(|&q| l1(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        Ok(directed(&self.points, &other.points).max(directed(&other.points, &self.points)))
    }
}
