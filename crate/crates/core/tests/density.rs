use bergman_core::density::{
    averaged_potential, density_forms, density_sweep, local_density, pseudo_grid,
    spread_directions, theta_density, upsilon, upsilon_estimate, AverageOptions, UpsilonMethod,
    Weight,
};
use bergman_core::geometry::{bergman_metric, BallPoint, MobiusMap};
use bergman_core::numeric::GaussRule;
use bergman_core::{DefiningFunction, DefiningPolynomial, PointDivisor, Twisted, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pt(v: &[(f64, f64)]) -> BallPoint {
    BallPoint::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
}

fn fd() -> AverageOptions {
    AverageOptions {
        method: UpsilonMethod::FiniteDifference,
        ..AverageOptions::default()
    }
}

fn max_abs<'a>(m: impl Iterator<Item = &'a C64>) -> f64 {
    m.map(|x| x.norm()).fold(0.0, f64::max)
}

fn parabola(lambda: f64) -> DefiningPolynomial {
    DefiningPolynomial::new(
        2,
        [(vec![0, 1], c(1.0, 0.0)), (vec![2, 0], c(-lambda, 0.0))],
    )
    .unwrap()
}

#[test]
fn radial_average_of_log_modulus_at_the_origin() {
    let t = DefiningPolynomial::coordinate(1, 0).unwrap();
    let r: f64 = 0.5;
    let got = averaged_potential(&t, &BallPoint::origin(1), r, &AverageOptions::default()).unwrap();
    // (1/V_1(r)) ∫_0^r log s^2 · 8π s/(1 − s^2)^2 ds, by Gauss–Legendre in s^2
    let rule = GaussRule::legendre(200);
    let integral = rule.integrate(0.0, r * r, |u| {
        u.ln() * 4.0 * std::f64::consts::PI / (1.0 - u).powi(2)
    });
    let volume = 4.0 * std::f64::consts::PI * r * r / (1.0 - r * r);
    let oracle = integral / volume;
    assert!(
        (got - oracle).abs() < 1e-4 * oracle.abs(),
        "{got} vs {oracle}"
    );
}

#[test]
fn average_equals_center_value_away_from_the_zero_set() {
    let opts = AverageOptions::default();
    let t1 = PointDivisor::new(vec![c(0.8, 0.1)]).unwrap();
    let z = pt(&[(-0.2, 0.1)]);
    let exact = t1.log_modulus_sq(z.coords());
    let got = averaged_potential(&t1, &z, 0.3, &opts).unwrap();
    assert!((got - exact).abs() < 1e-6 * exact.abs().max(1.0));

    let t2 = DefiningPolynomial::affine(c(0.9, 0.0), &[c(1.0, 0.0), c(0.0, 0.5)]).unwrap();
    let z = pt(&[(0.1, 0.0), (0.0, -0.2)]);
    let exact = t2.log_modulus_sq(z.coords());
    let got = averaged_potential(&t2, &z, 0.2, &opts).unwrap();
    assert!(
        (got - exact).abs() < 1e-6 * exact.abs().max(1.0),
        "{got} vs {exact}"
    );
}

#[test]
fn scaling_the_defining_function_shifts_the_average() {
    let opts = fd();
    let t = parabola(0.4);
    let k = c(2.0, -1.5);
    let ts = t.scaled(k).unwrap();
    let z = pt(&[(0.2, 0.1), (0.05, -0.1)]);
    let a = averaged_potential(&t, &z, 0.6, &opts).unwrap();
    let b = averaged_potential(&ts, &z, 0.6, &opts).unwrap();
    assert!((b - a - k.norm_sqr().ln()).abs() < 1e-12);
    let green = AverageOptions::default();
    let ua = upsilon(&t, &z, 0.6, &green).unwrap();
    let ub = upsilon(&ts, &z, 0.6, &green).unwrap();
    assert!(max_abs((&ua.matrix - &ub.matrix).iter()) < 1e-6);
}

#[test]
fn upsilon_vanishes_without_zeros_nearby() {
    let opts = fd();
    let t = DefiningPolynomial::affine(c(0.95, 0.0), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    let z = pt(&[(-0.3, 0.0), (0.2, 0.1)]);
    let u = upsilon(&t, &z, 0.3, &opts).unwrap();
    assert!(max_abs(u.matrix.iter()) < 1e-6, "{}", u.matrix);
    let one = DefiningPolynomial::constant(2, c(1.0, 0.0)).unwrap();
    assert!(max_abs(upsilon(&one, &z, 0.9, &opts).unwrap().matrix.iter()) < 1e-12);
}

#[test]
fn upsilon_is_unchanged_by_a_holomorphic_twist() {
    let opts = fd();
    let t = parabola(0.5);
    let twists = [
        DefiningPolynomial::affine(c(0.3, 0.1), &[c(0.5, -0.2), c(0.1, 0.4)]).unwrap(),
        DefiningPolynomial::new(2, [(vec![1, 1], c(0.7, 0.0)), (vec![0, 2], c(0.0, -0.3))])
            .unwrap(),
        DefiningPolynomial::new(2, [(vec![3, 0], c(1.0, 0.5)), (vec![0, 0], c(-2.0, 0.0))])
            .unwrap(),
    ];
    let z = pt(&[(0.15, -0.05), (0.1, 0.08)]);
    let base = upsilon(&t, &z, 0.7, &opts).unwrap();
    for h in twists {
        let tw = Twisted::new(t.clone(), h).unwrap();
        let u = upsilon(&tw, &z, 0.7, &opts).unwrap();
        assert!(max_abs((&u.matrix - &base.matrix).iter()) < 1e-4);
    }
}

#[test]
fn upsilon_is_positive_in_one_dimension_near_a_zero() {
    let opts = AverageOptions::default();
    let t = DefiningPolynomial::coordinate(1, 0).unwrap();
    let u = upsilon(&t, &BallPoint::origin(1), 0.5, &opts).unwrap();
    assert!(u.matrix[(0, 0)].re > 0.1);
    assert!(u.matrix[(0, 0)].im.abs() < 1e-12);
}

#[test]
fn upsilon_has_a_stable_negative_direction_beside_a_hyperplane() {
    // For n ≥ 2 the moving-ball average of log|T|^2 is not plurisubharmonic:
    // the tangential eigenvalue is negative and independent of the step.
    let t = DefiningPolynomial::coordinate(2, 1).unwrap();
    let z = pt(&[(0.0, 0.0), (0.1, 0.0)]);
    let mut opts = fd();
    let est = upsilon_estimate(&t, &z, 0.6, &opts).unwrap();
    assert!(est.indefinite);
    let metric = bergman_metric(&z).unwrap();
    let (rel, _) = est.form.generalized_eigen(&metric).unwrap();
    assert!(rel[0] < -0.25 && rel[0] > -0.4, "{rel:?}");
    assert!(rel[1] > 0.5, "{rel:?}");
    opts.h_fd = 3e-4;
    let fine = upsilon_estimate(&t, &z, 0.6, &opts).unwrap();
    assert!((fine.min_eigenvalue - est.min_eigenvalue).abs() < 1e-2 * est.min_eigenvalue.abs());
    // the density numerator stays positive
    let forms = density_forms(&t, &Weight::log_family(3.0).unwrap(), &z, 0.6, &opts).unwrap();
    assert!(forms.numerator.is_positive_definite());
}

#[test]
fn green_and_difference_routes_agree() {
    let z = pt(&[(0.0, 0.0), (0.1, 0.0)]);
    let t = DefiningPolynomial::coordinate(2, 1).unwrap();
    let a = upsilon(&t, &z, 0.6, &fd()).unwrap();
    let green = AverageOptions {
        method: UpsilonMethod::GreenForm,
        ..AverageOptions::default()
    };
    let b = upsilon(&t, &z, 0.6, &green).unwrap();
    assert!(max_abs((&a.matrix - &b.matrix).iter()) < 1e-4 * max_abs(b.matrix.iter()));
    // curved W: the line rule converges slowly, so compare at a finer rule
    let t = parabola(0.4);
    let z = pt(&[(0.3, -0.2), (-0.05, 0.1)]);
    let fine = AverageOptions { lines: 128, ..fd() };
    let a = upsilon(&t, &z, 0.7, &fine).unwrap();
    let b = upsilon(&t, &z, 0.7, &green).unwrap();
    assert!(max_abs((&a.matrix - &b.matrix).iter()) < 0.02 * max_abs(b.matrix.iter()));
    // one dimension: both are exact
    let t = PointDivisor::new(vec![c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
    let z = pt(&[(0.1, -0.1)]);
    let a = upsilon(&t, &z, 0.7, &fd()).unwrap();
    let b = upsilon(&t, &z, 0.7, &green).unwrap();
    assert!(
        max_abs((&a.matrix - &b.matrix).iter()) < 1e-5 * max_abs(b.matrix.iter()),
        "{} {}",
        a.matrix,
        b.matrix
    );
}

#[test]
fn log_weight_density_without_zeros() {
    let opts = AverageOptions::default();
    for n in 1..=2 {
        let one = DefiningPolynomial::constant(n, c(1.0, 0.0)).unwrap();
        for beta in [2.0, 3.5] {
            let w = Weight::log_family(beta).unwrap();
            for z in pseudo_grid(n, 0.9, 2).unwrap() {
                let d = local_density(&one, &w, &z, 0.7, &opts).unwrap();
                assert!((d - n as f64 / beta).abs() < 1e-6, "{d}");
            }
        }
    }
    // n = 1, β = 2, W = {0}, z far away
    let t = DefiningPolynomial::coordinate(1, 0).unwrap();
    let d = local_density(
        &t,
        &Weight::log_family(2.0).unwrap(),
        &pt(&[(0.9, 0.0)]),
        0.5,
        &opts,
    )
    .unwrap();
    assert!((d - 0.5).abs() < 1e-6, "{d}");
}

#[test]
fn doubling_the_weight_halves_the_density() {
    let opts = AverageOptions::default();
    let t = parabola(0.3);
    let z = pt(&[(0.2, 0.0), (0.05, 0.1)]);
    let w = Weight::log_family(2.5).unwrap();
    let forms = density_forms(&t, &w, &z, 0.6, &opts).unwrap();
    let d1 = forms.local_density().unwrap().0;
    let twice = bergman_core::density::DensityForms::new(forms.upsilon.clone(), &z, &w.scaled(2.0))
        .unwrap();
    let d2 = twice.local_density().unwrap().0;
    assert!((d1 - 2.0 * d2).abs() < 1e-10 * d1);
}

#[test]
fn direction_quotients_are_bounded_by_the_density() {
    let opts = AverageOptions::default();
    let t = parabola(0.4);
    let w = Weight::log_family(3.0).unwrap();
    for (z, r) in [
        (pt(&[(0.1, 0.0), (0.12, 0.0)]), 0.5),
        (pt(&[(0.3, -0.2), (-0.05, 0.1)]), 0.7),
    ] {
        let forms = density_forms(&t, &w, &z, r, &opts).unwrap();
        let (d, v) = forms.local_density().unwrap();
        assert!((forms.theta(&v).unwrap() - d).abs() < 1e-10 * d.max(1.0));
        let mut best = f64::NEG_INFINITY;
        for u in spread_directions(&forms.denominator, 64, 5).unwrap() {
            let q = forms.theta(&u).unwrap();
            assert!(q <= d + 1e-10);
            best = best.max(q);
        }
        assert!(best > 0.98 * d, "{best} vs {d}");
        let single = theta_density(&t, &w, &z, r, &v, &opts).unwrap();
        assert!((single - d).abs() < 1e-10 * d.max(1.0));
    }
}

#[test]
fn density_is_invariant_under_automorphisms_in_one_dimension() {
    let opts = AverageOptions::default();
    let w = Weight::log_family(2.0).unwrap();
    let zero = c(0.3, 0.1);
    let map = MobiusMap::new(pt(&[(0.4, 0.2)]));
    let moved = map.apply(&pt(&[(zero.re, zero.im)])).unwrap()[0];
    let t = PointDivisor::new(vec![zero]).unwrap();
    let tm = PointDivisor::new(vec![moved]).unwrap();
    for z in [pt(&[(0.1, -0.2)]), pt(&[(0.35, 0.0)]), pt(&[(-0.5, 0.4)])] {
        let fz = map.apply(&z).unwrap();
        // κ_β ∘ F_a differs from κ_β by a pluriharmonic term, so i∂∂̄κ_β serves both.
        let d = local_density(&t, &w, &z, 0.6, &opts).unwrap();
        let dm = local_density(&tm, &w, &fz, 0.6, &opts).unwrap();
        assert!((d - dm).abs() < 1e-3 * d, "{d} vs {dm}");
    }
}

#[test]
fn sweep_without_zeros_extrapolates_to_the_exact_density() {
    let opts = AverageOptions::default();
    let one = DefiningPolynomial::constant(2, c(1.0, 0.0)).unwrap();
    let w = Weight::log_family(3.0).unwrap();
    let grid = pseudo_grid(2, 0.9, 2).unwrap();
    let rep = density_sweep(&one, &w, &grid, &[0.5, 0.6, 0.7, 0.8, 0.9], &opts, 8).unwrap();
    assert!((rep.extrapolated_plus - 2.0 / 3.0).abs() < 1e-4);
    assert!((rep.extrapolated_minus - 2.0 / 3.0).abs() < 1e-4);
    assert_eq!(rep.excluded, 0);
    assert!(rep
        .sup_curve
        .iter()
        .zip(&rep.inf_curve)
        .all(|(s, i)| s >= i));
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), 1 + grid.len() * 5);
}

#[test]
fn single_point_sweep_reproduces_local_density() {
    let opts = AverageOptions::default();
    let t = DefiningPolynomial::coordinate(1, 0).unwrap();
    let w = Weight::log_family(2.0).unwrap();
    let z = pt(&[(0.2, 0.1)]);
    let ladder = [0.4, 0.6, 0.8];
    let rep = density_sweep(&t, &w, std::slice::from_ref(&z), &ladder, &opts, 0).unwrap();
    for (k, &r) in ladder.iter().enumerate() {
        let d = local_density(&t, &w, &z, r, &opts).unwrap();
        assert!((rep.sup_curve[k] - d).abs() < 1e-12);
        assert_eq!(rep.sup_curve[k], rep.inf_curve[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_dimensional_upsilon_is_positive(
        a in (-0.6f64..0.6, -0.6f64..0.6),
        b in (-0.6f64..0.6, -0.6f64..0.6),
        z in (-0.5f64..0.5, -0.5f64..0.5),
        r in 0.3f64..0.9,
    ) {
        let t = PointDivisor::new(vec![c(a.0, a.1), c(b.0, b.1)]).unwrap();
        let zp = pt(&[z]);
        let near = t.points().iter().map(|p| (p - zp[0]).norm()).fold(1.0, f64::min);
        prop_assume!(near > 0.01);
        let u = upsilon(&t, &zp, r, &AverageOptions::default()).unwrap();
        prop_assert!(u.min_eigenvalue() >= -1e-4);
    }
}
