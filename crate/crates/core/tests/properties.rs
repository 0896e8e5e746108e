use std::sync::{Arc, OnceLock};

use hartree::asymptotics::{epsilon, tau, tilde_e};
use hartree::groundstate::{gn_constant, gn_ratio, nehari_project, nehari_residual, solve_ground_state, GroundStateSolution};
use hartree::io::{read_radial_csv, write_radial_csv, Checkpoint};
use hartree::potential::{PotentialSpec, Well};
use hartree::riesz::{RadialRiesz, RieszOperator};
use hartree::{CartesianField, CartesianGrid, DerivativeScheme, RadialField, RadialGrid, SolverConfig};
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(RadialGrid::new(3, 1024, 16.0).unwrap())).clone()
}

fn op(gamma: f64) -> RadialRiesz {
    RadialRiesz::new(grid(), gamma).unwrap()
}

fn ground_15() -> &'static GroundStateSolution {
    static Q: OnceLock<GroundStateSolution> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(1.5, grid(), None, &SolverConfig::default()).unwrap())
}

prop_compose! {
    fn bumps()(b in prop::collection::vec((0.1f64..1.0, 0.0f64..4.0, 0.3f64..3.0), 1..4)) -> Vec<(f64, f64, f64)> {
        b
    }
}

fn field(b: &[(f64, f64, f64)]) -> RadialField {
    let b = b.to_vec();
    RadialField::from_fn(grid(), move |r| b.iter().map(|&(c, r0, a)| c * (-a * (r - r0) * (r - r0)).exp()).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_pairing_is_symmetric_and_positive(b1 in bumps(), b2 in bumps(), g in 0.3f64..2.0) {
        let op = op(g);
        let (u, v) = (field(&b1), field(&b2));
        let r1: Vec<f64> = u.values().iter().map(|x| x * x).collect();
        let r2: Vec<f64> = v.values().iter().map(|x| x * x).collect();
        let (p12, p21) = (op.pairing(&r1, &r2), op.pairing(&r2, &r1));
        prop_assert!((p12 - p21).abs() <= 1e-10 * p12.abs());
        prop_assert!(p12 > 0.0);
        prop_assert!(op.potential(&r1).iter().all(|&p| p > 0.0));
    }

    #[test]
    fn hartree_energy_is_quartic(b in bumps(), c in 0.1f64..5.0, g in 0.3f64..2.0) {
        let op = op(g);
        let u = field(&b);
        let (d, dc) = (op.energy(u.values()), op.energy(u.scaled(c).values()));
        prop_assert!((dc - c.powi(4) * d).abs() <= 1e-10 * dc);
    }

    #[test]
    fn nehari_projection_is_idempotent_and_scale_free(b in bumps(), c in 0.2f64..5.0) {
        let op = op(1.5);
        let u = field(&b);
        let p = nehari_project(&u, &op).unwrap();
        prop_assert!(nehari_residual(&p, &op) < 1e-10);
        let q = nehari_project(&u.scaled(c), &op).unwrap();
        for (x, y) in p.values().iter().zip(q.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-200));
        }
    }

    #[test]
    fn gagliardo_nirenberg_inequality(b in bumps()) {
        let q = ground_15();
        let op = op(1.5);
        let u = field(&b);
        let r = gn_ratio(1.5, gn_constant(q), u.kinetic(), u.mass(), op.energy(u.values()));
        prop_assert!(r <= 1.0 + 1e-9, "ratio {r}");
    }

    #[test]
    fn laplacian_is_symmetric_and_kinetic_nonnegative(b1 in bumps(), b2 in bumps()) {
        let (u, v) = (field(&b1), field(&b2));
        let g = grid();
        let lu = g.neg_laplacian(u.values());
        let lv = g.neg_laplacian(v.values());
        let uv: f64 = g.weights().iter().zip(u.values()).zip(&lv).map(|((w, a), b)| w * a * b).sum();
        let vu: f64 = g.weights().iter().zip(v.values()).zip(&lu).map(|((w, a), b)| w * a * b).sum();
        prop_assert!((uv - vu).abs() <= 1e-10 * uv.abs().max(vu.abs()).max(1e-12));
        prop_assert!(u.kinetic() >= 0.0);
    }

    #[test]
    fn closed_forms_are_homogeneous(g in 0.2f64..1.99, a in 0.1f64..10.0, m in 0.1f64..10.0, t in 0.1f64..10.0) {
        let e = tilde_e(g, a, m).unwrap();
        prop_assert!((tilde_e(g, t * a, t * m).unwrap() - e).abs() <= 1e-9 * e.abs());
        let eps = epsilon(g, a, m).unwrap();
        prop_assert!((e * eps * eps - (g - 2.0) / (4.0 - g)).abs() <= 1e-9);
        let tt = tau(g, a, m).unwrap();
        prop_assert!((tt * eps - (g / (4.0 - g)).sqrt()).abs() <= 1e-9);
        prop_assert!(e < 0.0);
    }

    #[test]
    fn product_well_flatness(x in -2.0f64..2.0, y in -2.0f64..2.0, p in 1.0f64..4.0, q in 1.0f64..4.0) {
        prop_assume!((x - y).abs() > 0.1);
        let v = PotentialSpec::product_wells(vec![
            Well { center: [x, 0.0, 0.0], exponent: p },
            Well { center: [y, 0.0, 0.0], exponent: q },
        ]);
        let f = v.flatness().unwrap();
        prop_assert_eq!(f.order, p.max(q));
        let d = (x - y).abs();
        for &(i, lambda) in &f.coefficients {
            let expect = if i == 0 { d.powf(q) } else { d.powf(p) };
            prop_assert!((lambda - expect).abs() <= 1e-12 * expect);
        }
        prop_assert_eq!(v.eval([x, 0.0, 0.0]), 0.0);
        prop_assert!(v.eval([x, 0.5, 0.0]) > 0.0);
    }

    #[test]
    fn checkpoints_round_trip(k in prop::array::uniform3(5u32..7), seed in any::<u64>()) {
        let shape = k.map(|k| 1usize << k);
        let g = Arc::new(CartesianGrid::new(shape, [1.0, 2.0, 3.0], DerivativeScheme::Spectral).unwrap());
        let f = CartesianField::from_fn(g, move |x| ((seed % 997) as f64 + x[0] * 3.0 - x[1] + x[2] * x[2]).sin());
        let c = Checkpoint::cartesian(&f).with_meta("seed", seed);
        prop_assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn radial_csv_round_trips_exactly(b in bumps()) {
        let u = field(&b);
        let mut buf = Vec::new();
        write_radial_csv(&u, &mut buf).unwrap();
        let back = read_radial_csv(&buf[..], 3).unwrap();
        prop_assert_eq!(back.values(), u.values());
    }
}
