use proptest::prelude::*;

use qbm_core::entanglement::{log_negativity, nu_minus_general};
use qbm_core::gaussian::{
    characteristic_function, covariance_from_moments, default_regulator, density_exponent,
    rho_element,
};
use qbm_core::model::{
    eta_tilde, from_dimensionless, to_dimensionless, v_eff, v_eff_prime, DimensionlessPoint,
    PhysicalParams, ReferenceScale,
};
use qbm_core::moments::moments_all;
use qbm_core::quadrature::{integrate, Tolerance};
use qbm_core::{Convention, CovarianceMatrix};

fn scale() -> impl Strategy<Value = ReferenceScale> {
    (
        0.2..5.0f64,
        0.2..5.0f64,
        0.2..5.0f64,
        0.2..5.0f64,
        0.2..5.0f64,
    )
        .prop_map(|(omega0, mass, k0, hbar, k_b)| ReferenceScale {
            omega0,
            mass,
            k0,
            hbar,
            k_b,
        })
}

fn params() -> impl Strategy<Value = PhysicalParams> {
    (
        0.3..3.0f64,
        0.05..2.0f64,
        0.5..20.0f64,
        0.2..4.0f64,
        0.0..3.0f64,
    )
        .prop_map(|(m, eta, cutoff, k0, t)| PhysicalParams::natural(m, eta, cutoff, k0, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimensionless_round_trip(r in 0.01..2.0f64, a in 0.0..10.0f64, s in scale()) {
        let p = from_dimensionless(DimensionlessPoint { r, a }, &s).unwrap();
        let back = to_dimensionless(&p);
        prop_assert!((back.r - r).abs() <= 1e-12 * r);
        prop_assert!((back.a - a).abs() <= 1e-12 * a.max(1e-300));
        prop_assert!((p.omega0() - s.omega0).abs() <= 1e-12 * s.omega0);
    }

    #[test]
    fn potential_and_friction_parity(p in params(), xi in -50.0..50.0f64) {
        prop_assert_eq!(v_eff(xi, &p), v_eff(-xi, &p));
        prop_assert_eq!(eta_tilde(xi, &p), eta_tilde(-xi, &p));
        prop_assert_eq!(v_eff_prime(xi, &p), -v_eff_prime(-xi, &p));
        prop_assert!(v_eff(xi, &p) < 0.0);
        prop_assert!(v_eff(xi, &p) >= v_eff(0.0, &p));
        prop_assert!(p.eta - eta_tilde(xi, &p) >= 0.0);
    }

    #[test]
    fn force_is_derivative_of_potential(p in params(), xi in -5.0..5.0f64) {
        let h = 1e-5 / p.k0;
        let fd = (v_eff(xi + h, &p) - v_eff(xi - h, &p)) / (2.0 * h);
        let scale = p.eta * p.cutoff / p.k0;
        prop_assert!((fd - v_eff_prime(xi, &p)).abs() <= 1e-6 * scale);
    }

    #[test]
    fn negativity_nonnegative_and_consistent(nu in 1e-6..10.0f64, hbar in 0.1..5.0f64) {
        for c in [Convention::Standard, Convention::HbarUnit] {
            let e = log_negativity(nu, hbar, c);
            prop_assert!(e.log_negativity >= 0.0);
            prop_assert_eq!(e.separable, e.log_negativity == 0.0);
        }
        let e = log_negativity(nu, hbar, Convention::Standard);
        prop_assert_eq!(e.separable, 2.0 * nu >= hbar);
    }

    #[test]
    fn general_route_is_symmetric_under_particle_swap(
        a in 0.1..10.0f64, b in 0.1..10.0f64, c in 0.1..10.0f64, d in 0.1..10.0f64,
    ) {
        let sigma = CovarianceMatrix::from_sector_variances(a, b, c, d).unwrap();
        let n1 = nu_minus_general(&sigma).unwrap();
        let n2 = nu_minus_general(&sigma.swap_particles()).unwrap();
        prop_assert!((n1 - n2).abs() <= 1e-12 * n1);
        let closed = (2.0 * (a * d).sqrt()).min((b * c).sqrt() / 2.0);
        prop_assert!((n1 - closed).abs() <= 1e-10 * closed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hbar_temperature_scaling(r in 0.05..1.0f64, a in 0.0..2.0f64, s in 0.5..4.0f64) {
        let base = ReferenceScale::default();
        let p1 = from_dimensionless(DimensionlessPoint { r, a }, &base).unwrap();
        let p2 = from_dimensionless(DimensionlessPoint { r, a }, &ReferenceScale { hbar: s, ..base }).unwrap();
        let m1 = moments_all(&p1).unwrap();
        let m2 = moments_all(&p2).unwrap();
        for (x, y) in [(m1.q2_xi, m2.q2_xi), (m1.p2_xi, m2.p2_xi), (m1.p2_zeta, m2.p2_zeta)] {
            prop_assert!((y.value / x.value - s).abs() <= 1e-10 * s);
        }
    }

    /// The relative-sector density in position representation Fourier
    /// transforms to the characteristic function of its covariance:
    /// `∫ dX e^{ikX} ρ_ξ(X + ħl/2, X − ħl/2) = exp[−½ Var(k ξ + l p_ξ)]`.
    #[test]
    fn density_fourier_transform_is_characteristic_function(
        r in 0.05..0.9f64, a in 0.05..1.0f64, k in -2.0..2.0f64, l in -2.0..2.0f64,
    ) {
        let p = from_dimensionless(DimensionlessPoint { r, a }, &ReferenceScale::default()).unwrap();
        let m = moments_all(&p).unwrap();
        let e = density_exponent(&m, p.hbar).unwrap();
        let q = m.q2_xi.value;
        let kq = k / q.sqrt();
        let lp = l / m.p2_xi.value.sqrt();
        // ξ = x₁ − x₂ with ζ = 0 on both sides.
        let rho = |xi: f64, xi_p: f64| rho_element(xi / 2.0, -xi / 2.0, xi_p / 2.0, -xi_p / 2.0, &e);
        let half = p.hbar * lp / 2.0;
        let width = 14.0 * q.sqrt();
        let ft = integrate(
            |x| (kq * x).cos() * rho(x + half, x - half),
            -width,
            width,
            &[0.0],
            Tolerance { abs: 1e-14, rel: 1e-11, max_intervals: 2000 },
        )
        .unwrap()
        .value;

        let sigma = covariance_from_moments(&m, Some(default_regulator(&m, p.hbar))).unwrap();
        // k ξ + l p_ξ with ξ = x₁ − x₂ and p_ξ = (p₁ − p₂)/2.
        let x = [kq, lp / 2.0, -kq, -lp / 2.0];
        let chi = characteristic_function(&x, &sigma);
        prop_assert!((ft - chi).abs() <= 1e-9, "ft {} chi {}", ft, chi);
    }
}
