#[test]
fn deep_cut_containment_property() {
    use oracle_lp::furthest::{ellipsoid_cut, CutOutcome, Ellipsoid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = 6usize;
    for trial in 0..2000 {
        let factor = nalgebra::DMatrix::<f64>::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let center = nalgebra::DVector::<f64>::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
        let e = Ellipsoid { center: center.clone(), factor: factor.clone() };
        // random point inside: c + F u with |u| < 1
        let mut u = nalgebra::DVector::<f64>::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        u *= rng.gen_range(0.0..0.99) / u.norm();
        let z = &center + &factor * u;
        // random cut with z strictly on the kept side
        let g: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gv = nalgebra::DVector::from_column_slice(&g);
        let offset = gv.dot(&z) + rng.gen_range(0.0..0.5);
        match ellipsoid_cut(&e, &g, offset) {
            CutOutcome::Shrunk(next) => {
                let dd = &z - &next.center;
                let uu = next.factor.clone().lu().solve(&dd).unwrap();
                let maha = uu.norm_squared();
                assert!(maha <= 1.0 + 1e-6, "trial {trial}: maha {maha}");
            }
            CutOutcome::Unchanged => {}
            CutOutcome::Empty => panic!("trial {trial}: empty but z inside"),
        }
    }
}
