use isolip::coupling::{compose_subtransport, quantile_coupling, PairSet, Plan};
use isolip::isoorder::{classic_iso_order, compose_certificates, decide_iso_order, min_s_at_t, SearchMode};
use isolip::lipschitz::{distance_family, mcshane_family, obs_diameter_lower, obs_diameter_upper, pushforward_field};
use isolip::mmspace::make_cube;
use isolip::{prohorov, AtomicMeasure};
use proptest::prelude::*;

const CELLS: usize = 400;

fn arb_pairset(max: usize) -> impl Strategy<Value = PairSet> {
    prop::collection::vec((-20i32..=20, -20i32..=20), 1..=max)
        .prop_map(|v| PairSet::new(v.into_iter().map(|(x, y)| (x as f64 * 0.25, y as f64 * 0.25)).collect()))
}

fn arb_measure(max_atoms: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::btree_map(-8i32..=8, 1u32..=4, 1..=max_atoms).prop_map(|m| {
        let total: u32 = m.values().sum();
        AtomicMeasure::new(
            m.keys().map(|&x| x as f64 * 0.25).collect(),
            m.values().map(|&w| w as f64 / total as f64).collect(),
        )
        .unwrap()
    })
}

fn exact(mu: &AtomicMeasure, nu: &AtomicMeasure, s: f64, t: f64) -> isolip::OrderDecision {
    decide_iso_order(mu, nu, s, t, SearchMode::Exact, CELLS).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dev_dominates_stretch(s in arb_pairset(10)) {
        let dev = s.dev_succ().unwrap();
        for &(x, y) in s.points() {
            for &(x2, y2) in s.points() {
                prop_assert!((y - y2).abs() - (x - x2).abs() <= dev + 1e-12);
            }
        }
    }

    #[test]
    fn dev_at_most_twice_dis_delta(s in arb_pairset(10)) {
        prop_assert!(s.dev_succ().unwrap() <= 2.0 * s.dis_delta().unwrap() + 1e-12);
    }

    #[test]
    fn dev_is_hausdorff_continuous(s in arb_pairset(8), t in arb_pairset(8)) {
        let gap = (s.dev_succ().unwrap() - t.dev_succ().unwrap()).abs();
        prop_assert!(gap <= 2.0 * s.hausdorff_l1(&t).unwrap() + 1e-12);
    }

    #[test]
    fn quantile_marginals_and_staircase(mu in arb_measure(5), nu in arb_measure(5)) {
        let q = quantile_coupling(&mu, &nu).unwrap();
        prop_assert!(q.is_transport_plan(&mu, &nu));
        let cells = q.support_cells();
        for a in &cells {
            for b in &cells {
                if a.0 < b.0 {
                    prop_assert!(a.1 <= b.1);
                }
            }
        }
    }

    #[test]
    fn compose_bounds(a in arb_measure(4), b in arb_measure(4), c in arb_measure(4)) {
        let p1 = quantile_coupling(&a, &b).unwrap();
        let p2 = Plan::product(&b, &c);
        let p = compose_subtransport(&p1, &p2).unwrap();
        prop_assert!(p.is_subtransport_plan(&a, &c));
        prop_assert!(p.total_mass() >= p1.total_mass() + p2.total_mass() - 1.0 - 1e-10);
        let dev = |q: &Plan| q.support().dev_succ().unwrap();
        prop_assert!(dev(&p) <= dev(&p1) + dev(&p2) + 1e-10);
    }

    #[test]
    fn prohorov_triangle(a in arb_measure(4), b in arb_measure(4), c in arb_measure(4)) {
        let ab = prohorov(&a, &b).unwrap();
        let bc = prohorov(&b, &c).unwrap();
        let ac = prohorov(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!((ab - prohorov(&b, &a).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn monotone_in_s_and_t(mu in arb_measure(4), nu in arb_measure(4), s in 0u32..8, t in 0u32..4) {
        let (s, t) = (s as f64 * 0.25, t as f64 * 0.25);
        if exact(&mu, &nu, s, t).holds {
            prop_assert!(exact(&mu, &nu, s + 0.25, t).holds);
            prop_assert!(exact(&mu, &nu, s, t + 0.25).holds);
        }
    }

    #[test]
    fn min_s_is_attained_and_tight(mu in arb_measure(4), nu in arb_measure(4), t in 0u32..3) {
        let t = t as f64 * 0.2;
        let (s, cert) = min_s_at_t(&mu, &nu, t, CELLS).unwrap();
        cert.verify(&mu, &nu).unwrap();
        prop_assert!(cert.s_achieved <= s + 1e-10 && cert.t_achieved <= t + 1e-10);
        prop_assert!(exact(&mu, &nu, s, t).holds);
        if s > 1e-9 {
            prop_assert!(!exact(&mu, &nu, s * (1.0 - 1e-6) - 1e-9, t).holds);
        }
        let (s_more, _) = min_s_at_t(&mu, &nu, t + 0.2, CELLS).unwrap();
        prop_assert!(s_more <= s + 1e-12);
    }

    #[test]
    fn transitive_composition(a in arb_measure(3), b in arb_measure(3), c in arb_measure(3)) {
        let (s1, c1) = min_s_at_t(&a, &b, 0.1, CELLS).unwrap();
        let (s2, c2) = min_s_at_t(&b, &c, 0.1, CELLS).unwrap();
        let glued = compose_certificates(&c1, &c2, &a, &c).unwrap();
        glued.verify(&a, &c).unwrap();
        prop_assert!(glued.s_achieved <= s1 + s2 + 1e-9);
        prop_assert!(glued.t_achieved <= c1.t_achieved + c2.t_achieved + 1e-9);
    }

    #[test]
    fn prohorov_bridge(mu in arb_measure(4), nu in arb_measure(4)) {
        let p = prohorov(&mu, &nu).unwrap();
        prop_assert!(exact(&mu, &nu, 2.0 * p + 1e-9, p + 1e-9).holds);
    }

    #[test]
    fn scaling_and_translation(mu in arb_measure(3), nu in arb_measure(3), s in 0u32..6, t in 0u32..3, c in 1u32..4, b in -3i32..3) {
        let (s, t, c, b) = (s as f64 * 0.25, t as f64 * 0.25, c as f64 * 0.5, b as f64 * 0.5);
        let base = exact(&mu, &nu, s, t).holds;
        let scaled = exact(&mu.scale_shift(c, 0.0).unwrap(), &nu.scale_shift(c, 0.0).unwrap(), c * s, t).holds;
        let moved = exact(&mu.scale_shift(1.0, b).unwrap(), &nu.scale_shift(1.0, b).unwrap(), s, t).holds;
        prop_assert_eq!(base, scaled);
        prop_assert_eq!(base, moved);
    }

    #[test]
    fn classic_matches_zero_error(mu in arb_measure(4), nu in arb_measure(4)) {
        let classic = classic_iso_order(&mu, &nu).unwrap();
        prop_assert_eq!(classic.holds, exact(&mu, &nu, 0.0, 0.0).holds);
    }

    #[test]
    fn order_controls_partial_diameter(mu in arb_measure(4), nu in arb_measure(4), t in 0u32..3, kappa in 0u32..5) {
        let t = t as f64 * 0.2;
        let kappa = kappa as f64 * 0.15;
        let (s, _) = min_s_at_t(&mu, &nu, t, CELLS).unwrap();
        let lhs = mu.partial_diameter(1.0 - kappa).unwrap() + s;
        let rhs = nu.partial_diameter((1.0 - kappa - t).max(0.0)).unwrap();
        prop_assert!(lhs >= rhs - 1e-9);
    }
}

#[test]
fn obs_diameter_sandwich_on_cubes() {
    for (k, n) in [(2, 2), (3, 2), (2, 3)] {
        let x = make_cube(k, n, 1.0, 4096).unwrap();
        let nu = x.distance_pushforward(0).unwrap();
        let mut fam = distance_family(&x);
        fam.extend(mcshane_family(&x, 30, 3, 11).unwrap());
        let s = nu.support_gaps().max_gap;
        let dom = isolip::isoorder::check_iso_dominant(&nu, &x, s, &fam, SearchMode::Exact, CELLS).unwrap();
        assert!(dom.passed());
        for kappa in [0.0, 0.1, 0.25, 0.5, 1.0] {
            let lower = obs_diameter_lower(&x, kappa, &fam).unwrap();
            let upper = obs_diameter_upper(&nu, s, 0.0, kappa).unwrap();
            assert!(lower <= upper + 1e-12, "k={k} n={n} kappa={kappa}");
        }
    }
}

#[test]
fn lipschitz_image_never_increases_lower_bound() {
    // Coordinate projection [3]² → [3]¹ is 1-Lipschitz and measure preserving.
    let x = make_cube(3, 2, 1.0, 4096).unwrap();
    let y = make_cube(3, 1, 1.0, 4096).unwrap();
    let proj = |i: usize| i / 3;
    for i in 0..x.len() {
        for j in 0..x.len() {
            assert!(y.d(proj(i), proj(j)) <= x.d(i, j));
        }
    }
    let fam_y = {
        let mut f = distance_family(&y);
        f.extend(mcshane_family(&y, 20, 2, 5).unwrap());
        f
    };
    let pulled: Vec<_> = fam_y
        .iter()
        .map(|f| isolip::ScalarField::user((0..x.len()).map(|i| f.values[proj(i)]).collect()))
        .collect();
    for (f, g) in pulled.iter().zip(&fam_y) {
        let (a, b) = (pushforward_field(&x, f).unwrap(), pushforward_field(&y, g).unwrap());
        assert_eq!(a.atoms(), b.atoms());
        for (u, v) in a.weights().iter().zip(b.weights()) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
    for kappa in [0.0, 0.2, 0.5] {
        let ly = obs_diameter_lower(&y, kappa, &fam_y).unwrap();
        let lx = obs_diameter_lower(&x, kappa, &pulled).unwrap();
        assert!(ly <= lx + 1e-12);
    }
}
