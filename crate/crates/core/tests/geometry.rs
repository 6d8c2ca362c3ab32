use bergman_core::geometry::{
    ball_volume, bergman_metric, green, green_gamma, pseudo_distance, quad_ball,
    quad_ball_point_singular, volume_density, BallPoint, MobiusMap, QuadOptions, QuadratureRule,
};
use bergman_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_point(n: usize, max_norm: f64, rng: &mut ChaCha8Rng) -> BallPoint {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if s < max_norm * max_norm {
            return BallPoint::new(v).unwrap();
        }
    }
}

#[test]
fn mobius_fixes_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3 {
        let a = random_point(n, 0.95, &mut rng);
        let m = MobiusMap::new(a.clone());
        let fa0 = m.apply(&BallPoint::origin(n)).unwrap();
        let back = m.apply(&a).unwrap();
        for i in 0..n {
            assert!((fa0[i] - a[i]).norm() < 1e-14);
            assert!(back[i].norm() < 1e-14);
        }
    }
}

// Pullback F_a^* ω_B = ω_B with the Jacobian from central differences.
#[test]
fn bergman_metric_is_invariant_under_automorphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let a = random_point(n, 0.8, &mut rng);
        let z = random_point(n, 0.8, &mut rng);
        let m = MobiusMap::new(a);
        let h = 1e-6;
        let mut jac = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            let mut zp = z.coords().to_vec();
            let mut zm = z.coords().to_vec();
            zp[j] += h;
            zm[j] -= h;
            let fp = m.apply_raw(&zp);
            let fm = m.apply_raw(&zm);
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let analytic = m.jacobian(z.coords());
        assert!((&jac - &analytic).norm() < 1e-7 * (1.0 + analytic.norm()));
        let w = BallPoint::new(m.apply_raw(z.coords())).unwrap();
        let g_w = bergman_metric(&w).unwrap().matrix;
        let g_z = bergman_metric(&z).unwrap().matrix;
        // H'_kl = Σ_ij J_ik H_ij conj(J_jl)
        let pulled = jac.transpose() * g_w * jac.map(|c| c.conj());
        let scale = g_z.norm();
        assert!((&pulled - &g_z).norm() < 1e-8 * scale, "trial {trial}");
    }
}

#[test]
fn volume_density_ratio() {
    let z = BallPoint::from_parts(&[(0.3, 0.4), (0.1, -0.2)]).unwrap();
    let r = volume_density(&z).unwrap() / volume_density(&BallPoint::origin(2)).unwrap();
    assert!((r - (1.0 - z.norm_sqr()).powi(-3)).abs() < 1e-12);
}

#[test]
fn quad_ball_constant_matches_closed_form() {
    for n in 1..=2 {
        for &r in &[0.3, 0.7, 0.9] {
            let rule = QuadratureRule::bergman_ball(n, r, &QuadOptions::for_dim(n)).unwrap();
            let c = random_point(n, 0.6, &mut ChaCha8Rng::seed_from_u64(3));
            let v = quad_ball(|_| 1.0, &c, &rule).unwrap();
            let exact = ball_volume(n, r).unwrap();
            assert!(
                (v - exact).abs() < 1e-6 * exact,
                "n={n} r={r}: {v} vs {exact}"
            );
        }
    }
}

#[test]
fn pluriharmonic_mean_value_equality() {
    let bank: Vec<(&str, Box<dyn Fn(&[C64]) -> f64 + Sync>)> = vec![
        ("Re z1", Box::new(|z: &[C64]| z[0].re)),
        ("Re z1 z2", Box::new(|z: &[C64]| (z[0] * z[1]).re)),
        ("Re z1^3", Box::new(|z: &[C64]| z[0].powu(3).re)),
        (
            "Im (z1 + 2 z2^2)",
            Box::new(|z: &[C64]| (z[0] + 2.0 * z[1] * z[1]).im),
        ),
    ];
    let center = BallPoint::from_parts(&[(0.3, -0.2), (0.25, 0.1)]).unwrap();
    let r = 0.7;
    let rule = QuadratureRule::bergman_ball(2, r, &QuadOptions::for_dim(2)).unwrap();
    let v = ball_volume(2, r).unwrap();
    for (name, g) in &bank {
        let avg = quad_ball(|p| g(p.coords()), &center, &rule).unwrap() / v;
        let exact = g(center.coords());
        assert!(
            (avg - exact).abs() < 1e-6 * exact.abs().max(1e-2),
            "{name}: {avg} vs {exact}"
        );
    }
}

#[test]
fn subharmonic_functions_exceed_center_value() {
    let center = BallPoint::from_parts(&[(0.2, 0.1), (-0.1, 0.3)]).unwrap();
    let rule = QuadratureRule::bergman_ball(2, 0.5, &QuadOptions::for_dim(2)).unwrap();
    let v = ball_volume(2, 0.5).unwrap();
    let bank: Vec<Box<dyn Fn(&[C64]) -> f64 + Sync>> = vec![
        Box::new(|z: &[C64]| z[0].norm_sqr()),
        Box::new(|z: &[C64]| (z[0] * z[1]).norm_sqr() + z[1].norm_sqr()),
        Box::new(|z: &[C64]| (0.05 + (z[0] - 0.2).norm_sqr() + z[1].norm_sqr()).ln()),
    ];
    for g in &bank {
        let avg = quad_ball(|p| g(p.coords()), &center, &rule).unwrap() / v;
        assert!(avg >= g(center.coords()), "{avg} < {}", g(center.coords()));
    }
}

#[test]
fn quadrature_is_converged_for_smooth_integrands() {
    let center = BallPoint::from_parts(&[(0.1, 0.2), (0.3, -0.1)]).unwrap();
    let g = |p: &BallPoint| (p[0].norm_sqr() + 0.5 * p[1].re).exp();
    let opts = QuadOptions::for_dim(2);
    let coarse = QuadratureRule::bergman_ball(2, 0.6, &opts).unwrap();
    let fine = QuadratureRule::bergman_ball(2, 0.6, &opts.refined()).unwrap();
    let a = quad_ball(g, &center, &coarse).unwrap();
    let b = quad_ball(g, &center, &fine).unwrap();
    assert!((a - b).abs() < 1e-8 * b.abs());
}

#[test]
fn monte_carlo_volume_in_three_variables() {
    let rule = QuadratureRule::bergman_ball(3, 0.5, &QuadOptions::for_dim(3)).unwrap();
    let (v, se) = rule.integrate_with_error(|_| 1.0).unwrap();
    let exact = ball_volume(3, 0.5).unwrap();
    assert!((v - exact).abs() < 3.0 * se, "{v} vs {exact} (se {se})");
}

#[test]
fn log_singularity_quadrature_matches_radial_oracle() {
    // ∫_{B(0,r)} log|ζ|^2 ω_B in one variable: 2π ∫ log ρ^2 · 4 ρ (1−ρ^2)^{-2} dρ.
    let r: f64 = 0.5;
    let m = 200_000;
    let h = r / m as f64;
    let mut oracle = 0.0;
    for i in 0..m {
        let rho = (i as f64 + 0.5) * h;
        oracle += 2.0 * PI * (rho * rho).ln() * 4.0 * rho / (1.0 - rho * rho).powi(2) * h;
    }
    let origin = BallPoint::origin(1);
    let v = quad_ball_point_singular(
        |p| p.norm_sqr().ln(),
        &origin,
        r,
        &origin,
        &QuadOptions::for_dim(1),
    )
    .unwrap();
    assert!((v - oracle).abs() < 1e-6 * oracle.abs(), "{v} vs {oracle}");
}

#[test]
fn green_basics() {
    let a = BallPoint::from_parts(&[(0.2, -0.3)]).unwrap();
    let z = BallPoint::from_parts(&[(0.0, 0.5)]).unwrap();
    assert!((green(&z, &BallPoint::origin(1)).unwrap() - green_gamma(&z).unwrap()).abs() < 1e-15);
    assert!((green(&z, &a).unwrap() - green(&a, &z).unwrap()).abs() < 1e-12);
    assert!(green(&a, &a).is_err());
    let near = BallPoint::from_parts(&[(0.2 + 1e-9, -0.3)]).unwrap();
    assert!(green(&near, &a).unwrap() < -2.0);
}

#[test]
fn green_is_increasing_and_negative() {
    for n in 1..=3 {
        let mut prev = f64::NEG_INFINITY;
        for k in 1..200 {
            let t = k as f64 / 200.0;
            let mut coords = vec![C64::new(0.0, 0.0); n];
            coords[0] = C64::new(t, 0.0);
            let g = green_gamma(&BallPoint::new(coords).unwrap()).unwrap();
            assert!(g < 0.0 && g > prev);
            prev = g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn involution_and_norm_identity(
        n in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_point(n, 0.99, &mut rng);
        let z = random_point(n, 0.99, &mut rng);
        let m = MobiusMap::new(a.clone());
        let w = m.apply(&z).unwrap();
        let back = m.apply(&w).unwrap();
        for i in 0..n {
            prop_assert!((back[i] - z[i]).norm() < 1e-12);
        }
        let lhs = 1.0 - w.norm_sqr();
        let rhs = (1.0 - z.norm_sqr()) * (1.0 - a.norm_sqr()) / (C64::new(1.0, 0.0) - z.inner(&a)).norm_sqr();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn pseudo_distance_is_symmetric(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_point(n, 0.99, &mut rng);
        let b = random_point(n, 0.99, &mut rng);
        let d1 = pseudo_distance(&a, &b).unwrap();
        let d2 = pseudo_distance(&b, &a).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
        prop_assert!((0.0..1.0).contains(&d1));
    }
}
