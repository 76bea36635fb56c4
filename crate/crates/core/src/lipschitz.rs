//! 1-Lipschitz functions on finite mm-spaces, their pushforwards and
//! observable-diameter bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::AtomicMeasure;
use crate::mmspace::FiniteMMSpace;
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    DistanceFunction { base: usize },
    McshaneRandom { seed: u64, anchors: usize },
    User,
}

/// One real value per point of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ScalarField {
    pub fn user(values: Vec<f64>) -> Self {
        Self {
            values,
            provenance: Provenance::User,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::user(vec![c; n])
    }

    pub fn label(&self) -> String {
        match &self.provenance {
            Provenance::DistanceFunction { base } => format!("d_{base}"),
            Provenance::McshaneRandom { seed, anchors } => format!("mcshane(seed={seed},anchors={anchors})"),
            Provenance::User => "user".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub ok: bool,
    /// Pair with the largest `|f(i) − f(j)| − d(i, j)`, reported on failure.
    pub worst: Option<(usize, usize, f64)>,
}

fn check_len(x: &FiniteMMSpace, f: &ScalarField) -> Result<()> {
    if f.values.len() != x.len() {
        return Err(invalid(
            "field",
            format!("{} values for a space of {} points", f.values.len(), x.len()),
        ));
    }
    Ok(())
}

pub fn is_one_lipschitz(x: &FiniteMMSpace, f: &ScalarField) -> Result<LipschitzCheck> {
    check_len(x, f)?;
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let excess = (f.values[i] - f.values[j]).abs() - x.d(i, j);
            if excess > tol::MASS && worst.map_or(true, |w| excess > w.2) {
                worst = Some((i, j, excess));
            }
        }
    }
    Ok(LipschitzCheck {
        ok: worst.is_none(),
        worst,
    })
}

pub(crate) fn require_one_lipschitz(x: &FiniteMMSpace, f: &ScalarField) -> Result<()> {
    match is_one_lipschitz(x, f)?.worst {
        Some((i, j, excess)) => Err(Error::NotLipschitz { i, j, excess }),
        None => Ok(()),
    }
}

/// `f(x) = min_j (c_j + d(x, p_j))` for anchors `(p_j, c_j)`.
pub fn mcshane(x: &FiniteMMSpace, anchors: &[(usize, f64)]) -> Result<ScalarField> {
    if anchors.is_empty() {
        return Err(Error::Empty("anchor list"));
    }
    if let Some(&(p, _)) = anchors.iter().find(|a| a.0 >= x.len()) {
        return Err(invalid("anchors", format!("point {p} out of range")));
    }
    let values = (0..x.len())
        .map(|i| {
            anchors
                .iter()
                .map(|&(p, c)| c + x.d(i, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(ScalarField::user(values))
}

/// McShane field with anchor points drawn uniformly from `X` and offsets
/// uniform in `[−diam X, diam X]`.
pub fn mcshane_random(x: &FiniteMMSpace, anchors: usize, seed: u64) -> Result<ScalarField> {
    if anchors == 0 {
        return Err(invalid("anchors", "need at least one anchor"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = x.diameter();
    let picks: Vec<(usize, f64)> = (0..anchors)
        .map(|_| {
            let p = rng.gen_range(0..x.len());
            let c = if diam > 0.0 { rng.gen_range(-diam..=diam) } else { 0.0 };
            (p, c)
        })
        .collect();
    let mut f = mcshane(x, &picks)?;
    f.provenance = Provenance::McshaneRandom { seed, anchors };
    Ok(f)
}

/// `d(·, p)` for every point `p`.
pub fn distance_family(x: &FiniteMMSpace) -> Vec<ScalarField> {
    (0..x.len())
        .map(|p| ScalarField {
            values: x.row(p).to_vec(),
            provenance: Provenance::DistanceFunction { base: p },
        })
        .collect()
}

/// `count` McShane fields seeded `seed, seed + 1, …`.
pub fn mcshane_family(x: &FiniteMMSpace, count: usize, anchors: usize, seed: u64) -> Result<Vec<ScalarField>> {
    (0..count as u64)
        .map(|k| mcshane_random(x, anchors, seed.wrapping_add(k)))
        .collect()
}

/// `f_* m_X`.
pub fn pushforward_field(x: &FiniteMMSpace, f: &ScalarField) -> Result<AtomicMeasure> {
    require_one_lipschitz(x, f)?;
    AtomicMeasure::from_pairs(f.values.iter().copied().zip(x.weights().iter().copied()))
}

/// Largest `diam(f_* m; 1 − κ)` over the family: a lower bound for
/// `ObsDiam(X; −κ)`.
pub fn obs_diameter_lower(x: &FiniteMMSpace, kappa: f64, family: &[ScalarField]) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(invalid("kappa", format!("{kappa} is outside [0, 1]")));
    }
    if family.is_empty() {
        return Err(Error::Empty("function family"));
    }
    let diams: Vec<f64> = family
        .par_iter()
        .map(|f| pushforward_field(x, f)?.partial_diameter(1.0 - kappa))
        .collect::<Result<_>>()?;
    Ok(diams.into_iter().fold(0.0, f64::max))
}

/// `diam(ν; 1 − κ) + s`, an upper bound for `ObsDiam(X; −κ − t)` whenever
/// `ν` is an `(s, t)`-iso-dominant of `X`.
pub fn obs_diameter_upper(nu: &AtomicMeasure, s: f64, t: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !(s >= 0.0) || !(t >= 0.0) {
        return Err(invalid("kappa", "s, t and kappa must be non-negative"));
    }
    Ok(nu.partial_diameter((1.0 - kappa).max(0.0))? + s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmspace::make_cube;

    fn cube(k: usize, n: usize) -> FiniteMMSpace {
        make_cube(k, n, 1.0, 4096).unwrap()
    }

    #[test]
    fn lipschitz_examples() {
        let x = cube(2, 2);
        assert!(is_one_lipschitz(&x, &ScalarField::constant(4, 3.0)).unwrap().ok);
        for f in distance_family(&x) {
            assert!(is_one_lipschitz(&x, &f).unwrap().ok);
        }
        let double = ScalarField::user(x.row(0).iter().map(|d| 2.0 * d).collect());
        let r = is_one_lipschitz(&x, &double).unwrap();
        assert!(!r.ok);
        assert_eq!(r.worst, Some((0, 3, 2.0)));
        assert!(is_one_lipschitz(&x, &ScalarField::user(vec![0.0])).is_err());
    }

    #[test]
    fn mcshane_examples() {
        let x = cube(3, 2);
        let f = mcshane(&x, &[(4, 0.0)]).unwrap();
        assert_eq!(f.values, x.row(4));
        for seed in 0..20 {
            let f = mcshane_random(&x, 3, seed).unwrap();
            assert!(is_one_lipschitz(&x, &f).unwrap().ok);
            assert_eq!(f, mcshane_random(&x, 3, seed).unwrap());
        }
        assert!(mcshane_random(&x, 0, 1).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let x = cube(2, 2);
        let p = pushforward_field(&x, &ScalarField::constant(4, 0.0)).unwrap();
        assert_eq!(p, AtomicMeasure::dirac(0.0).unwrap());
        let d0 = pushforward_field(&x, &distance_family(&x)[0]).unwrap();
        assert_eq!(d0.atoms(), &[0.0, 1.0, 2.0]);
        assert_eq!(d0.weights(), &[0.25, 0.5, 0.25]);
        assert_eq!(d0, x.distance_pushforward(0).unwrap());
        let bad = ScalarField::user(vec![0.0, 0.0, 0.0, 5.0]);
        assert!(matches!(pushforward_field(&x, &bad), Err(Error::NotLipschitz { .. })));
    }

    #[test]
    fn obs_diameter_examples() {
        let x = cube(2, 2);
        let fam = distance_family(&x);
        assert_eq!(obs_diameter_lower(&x, 1.0, &fam).unwrap(), 0.0);
        assert_eq!(obs_diameter_lower(&x, 0.25, &fam[..1]).unwrap(), 1.0);
        let line = cube(2, 1);
        assert_eq!(obs_diameter_lower(&line, 0.0, &distance_family(&line)[..1]).unwrap(), 1.0);
        assert!(obs_diameter_lower(&x, 0.5, &[]).is_err());

        let u = AtomicMeasure::uniform_range(2).unwrap();
        assert_eq!(obs_diameter_upper(&u, 0.0, 0.0, 0.25).unwrap(), 1.0);
        let d = AtomicMeasure::dirac(0.0).unwrap();
        assert_eq!(obs_diameter_upper(&d, 0.5, 0.0, 0.3).unwrap(), 0.5);
        assert_eq!(obs_diameter_upper(&u, 0.0, 0.0, 1.0).unwrap(), 0.0);
    }
}
