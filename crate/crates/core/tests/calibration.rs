mod common;

use hkcollapse::calibration::{
    calibration_report, energy_density, energy_density_with, equality_defect, gap_sum_of_squares, reconstruct,
    reconstruction_is_su2, tau, tau_wedge, DMatch, LinearMap34, DEFAULT_TOL,
};
use hkcollapse::forms4::{compare_metrics, form_inner, metric_of, KForm4, Metric4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_map(rng: &mut ChaCha8Rng) -> LinearMap34 {
    LinearMap34::new(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))))
}

fn random_calibrated(rng: &mut ChaCha8Rng) -> LinearMap34 {
    let b = rng.gen_range(-1.0..1.0);
    let v = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    LinearMap34::calibrated(b, v)
}

#[test]
fn inequality_and_gap_identity_on_random_maps() {
    let mut rng = common::rng(21);
    for _ in 0..100_000 {
        let m = random_map(&mut rng);
        let t = tau(&m);
        let e = energy_density(&m);
        assert!(t <= e + 1e-12);
        let gap = gap_sum_of_squares(&m);
        assert!(((e - t) - gap).abs() <= 1e-10 * gap.max(1e-300) + 1e-15, "{} vs {gap}", e - t);
    }
}

#[test]
fn closed_form_tau_matches_wedge_oracle() {
    let mut rng = common::rng(22);
    for _ in 0..10_000 {
        let m = random_map(&mut rng);
        assert!((tau(&m) - tau_wedge(&m)).abs() <= 1e-12);
    }
}

#[test]
fn equality_locus_both_directions() {
    let mut rng = common::rng(23);
    for _ in 0..10_000 {
        // on the locus
        let m = random_calibrated(&mut rng);
        assert!(gap_sum_of_squares(&m) <= 1e-20);
        assert!(equality_defect(&m) <= 1e-9);
        // a tiny perturbation keeps the gap below 1e-20 and the relations within 1e-9
        let mut near = m;
        for row in near.a.iter_mut() {
            for x in row.iter_mut() {
                *x += rng.gen_range(-1e-11..1e-11);
            }
        }
        if gap_sum_of_squares(&near) <= 1e-20 {
            assert!(equality_defect(&near) <= 1e-9);
        }
        // off the locus: a violated relation forces a visible gap
        let far = random_map(&mut rng);
        if equality_defect(&far) > 1e-9 {
            assert!(gap_sum_of_squares(&far) > 1e-20);
        }
    }
}

#[test]
fn reconstruction_of_random_calibrated_maps() {
    let mut rng = common::rng(24);
    let mut seen = Vec::new();
    for _ in 0..10_000 {
        let m = random_calibrated(&mut rng);
        let r = reconstruct(&m).unwrap();
        assert!(reconstruction_is_su2(&r, 1e-9));
        assert!(r.residual <= 1e-10, "residual {:e} for {m:?}", r.residual);
        if r.d_match != DMatch::Both && !seen.contains(&r.d_match) {
            seen.push(r.d_match);
        }

        // e⁰ = D^{-1/2} θ and eˡ = D^{1/2} A*fˡ are orthonormal for the reconstructed metric
        let g = metric_of(&r.triple).unwrap();
        let d = r.d_const;
        let mut coframe = vec![KForm4::one_form(r.theta).scale(d.powf(-0.5))];
        for h in 0..3 {
            coframe.push(m.pullback_coordinate(h).scale(d.sqrt()));
        }
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b { 1.0 } else { 0.0 };
                let ip = form_inner(&coframe[a], &coframe[b], &g).unwrap();
                assert!((ip - expected).abs() <= 1e-9, "({a},{b}): {ip}");
            }
        }
    }
    assert_eq!(seen, vec![DMatch::InverseTrace]);
}

#[test]
fn reports_on_random_maps_are_not_calibrated() {
    let mut rng = common::rng(25);
    for _ in 0..1000 {
        let m = random_map(&mut rng);
        let r = calibration_report(&m, DEFAULT_TOL);
        assert!(!r.calibrated);
        assert!((r.gap - r.gap_squares).abs() <= 1e-10 * r.gap_squares);
        assert!(r.reconstruction.is_none());
    }
}

#[test]
fn energy_comparison_between_metrics() {
    let mut rng = common::rng(26);
    let g = Metric4::identity();
    for _ in 0..10_000 {
        let b: [[f64; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let mut gp = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                gp[i][j] = (0..4).map(|k| b[i][k] * b[j][k]).sum::<f64>();
            }
            gp[i][i] += 0.2;
        }
        let gp = Metric4::new(gp).unwrap();
        let (c0, c1) = compare_metrics(&g, &gp).unwrap();
        let m = random_map(&mut rng);
        let lhs = energy_density_with(&m, &gp).sqrt();
        let base = energy_density_with(&m, &g).sqrt();
        assert!(lhs >= c1.powf(-0.5) * base * (1.0 - 1e-12));
        assert!(lhs <= c0.powf(-0.5) * base * (1.0 + 1e-12));
    }
    // the bounds are attained along the extreme eigendirections
    let gp = Metric4::diagonal([0.5, 2.0, 3.0, 1.0]).unwrap();
    let (c0, c1) = compare_metrics(&g, &gp).unwrap();
    let mut m = LinearMap34::zero();
    m.a[0][2] = 1.0;
    assert!((energy_density_with(&m, &gp).sqrt() - c1.powf(-0.5)).abs() <= 1e-14);
    let mut m = LinearMap34::zero();
    m.a[1][0] = 1.0;
    assert!((energy_density_with(&m, &gp).sqrt() - c0.powf(-0.5)).abs() <= 1e-14);
}
