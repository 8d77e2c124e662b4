//! Library results against independently coded references: a tanh-sinh
//! quadrature of the unsubstituted kernel integrands, a bisection for the
//! equilibrium constant, and values frozen from high-precision runs.

use num_complex::Complex64;

use spinrad::constants::{temperature_from_frequency, C_LIGHT};
use spinrad::equilibrium::equilibrium_theta;
use spinrad::kernels::{chi_kernel, psi_e, psi_m};
use spinrad::rates::{spectral_rate_rotational, spectral_torque_rotational, ClosedForm};
use spinrad::{Channel, Material, PlateOptics, SystemConfig, ThermalState};

/// Tanh-sinh quadrature of `f(t, t − a, b − t)` over `[a, b]`. Passing the
/// endpoint distances lets the integrand avoid cancellation next to
/// integrable endpoint singularities.
fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let node = |u: f64| {
        let s = 0.5 * std::f64::consts::PI * u.sinh();
        let w = 0.5 * std::f64::consts::PI * u.cosh() / s.cosh().powi(2);
        // 1 − tanh(s) and 1 + tanh(s) without cancellation
        let e = (-2.0 * s.abs()).exp();
        let small = 2.0 * e / (1.0 + e);
        let (lo, hi) = if s >= 0.0 { (2.0 - small, small) } else { (small, 2.0 - small) };
        (mid + half * s.tanh(), half * lo, half * hi, w * half)
    };
    let eval = |u: f64| {
        let (t, da, db, w) = node(u);
        if da <= 0.0 || db <= 0.0 || w == 0.0 {
            0.0
        } else {
            w * f(t, da, db)
        }
    };
    let mut h = 0.5;
    let sum_level = |h: f64, odd_only: bool| {
        let mut s = 0.0;
        let mut k = if odd_only { 1 } else { 0 };
        loop {
            let u = k as f64 * h;
            if u > 4.5 {
                break;
            }
            s += if k == 0 { eval(0.0) } else { eval(u) + eval(-u) };
            k += if odd_only { 2 } else { 1 };
        }
        s
    };
    let mut total = sum_level(h, false);
    let mut estimate = total * h;
    for _ in 0..12 {
        h *= 0.5;
        total += sum_level(h, true);
        let next = total * h;
        if (next - estimate).abs() <= 1e-14 * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

#[derive(Clone, Copy)]
enum Which {
    PsiE,
    PsiM,
    ChiE,
}

/// Unsubstituted integrand `t Im[e^{−2xq₀}/q₀ · R]` with `q₀ = √(t²−1)` and
/// `q = √(t²−n²)` on the `+i` branch.
fn raw(which: Which, n: f64, x: f64, t: f64, q0: Complex64, q: Complex64) -> f64 {
    let n2 = n * n;
    let de = (n2 * q0 - q) / (n2 * q0 + q);
    let dm = (q0 - q) / (q0 + q);
    let phase = (-2.0 * x * q0).exp() / q0;
    let k2 = t * t - 1.0;
    match which {
        Which::PsiE => t * (phase * (k2 * de + dm)).im,
        Which::PsiM => t * (phase * (k2 * dm + de)).im,
        Which::ChiE => t.powi(3) * (phase * de).im,
    }
}

fn reference(which: Which, n: f64, x: f64) -> f64 {
    let below = tanh_sinh(
        |t, _, db| {
            let q0 = Complex64::new(0.0, (db * (1.0 + t)).sqrt());
            let q = Complex64::new(0.0, (n * n - t * t).sqrt());
            raw(which, n, x, t, q0, q)
        },
        0.0,
        1.0,
    );
    let above = tanh_sinh(
        |t, da, db| {
            let q0 = Complex64::new((da * (t + 1.0)).sqrt(), 0.0);
            let q = Complex64::new(0.0, (db * (n + t)).sqrt());
            raw(which, n, x, t, q0, q)
        },
        1.0,
        n,
    );
    below + above
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + abs
}

#[test]
fn psi_kernels_match_independent_quadrature() {
    for n in [1.2, 3.0, 10.0, 50.0] {
        for x in [0.0, 0.05, 0.5, 2.0, 7.0] {
            let e = psi_e(n, x, 1e-11).unwrap().value;
            let m = psi_m(n, x, 1e-11).unwrap().value;
            let re = reference(Which::PsiE, n, x);
            let rm = reference(Which::PsiM, n, x);
            assert!(close(e, re, 1e-8, 1e-12), "psi_e({n}, {x}) = {e} vs {re}");
            assert!(close(m, rm, 1e-8, 1e-12), "psi_m({n}, {x}) = {m} vs {rm}");
        }
    }
}

#[test]
fn chi_kernel_matches_independent_quadrature() {
    for n in [1.5, 3.0, 20.0] {
        for x in [0.0, 1.0] {
            let c = chi_kernel(n, x, Channel::Electric, 1e-11).unwrap().value;
            let r = reference(Which::ChiE, n, x);
            assert!(close(c, r, 1e-8, 1e-12), "chi_e({n}, {x}) = {c} vs {r}");
        }
    }
}

#[test]
fn frozen_kernel_values() {
    // 30-digit mpmath quadrature of the unsubstituted integrand.
    let frozen = [
        (3.0, 0.0, -2.619_522_377_533_61, -7.538_109_557_997_21),
        (10.0, 0.0, -12.037_671_084_497_1, -264.340_675_011_248),
        (50.0, 0.0, -65.345_553_448_415_7, -33_314.802_198_061_3),
    ];
    for (n, x, e, m) in frozen {
        assert!(close(psi_e(n, x, 1e-10).unwrap().value, e, 1e-9, 0.0));
        assert!(close(psi_m(n, x, 1e-10).unwrap().value, m, 1e-9, 0.0));
    }
}

#[test]
fn equilibrium_constant_by_bisection() {
    // At θ₂ = 0 the heating bracket vanishes where y⁶ = 21y² + 16.8, y = θ₁/Ω.
    let g = |y: f64| y.powi(6) - 21.0 * y * y - 16.8;
    let (mut lo, mut hi) = (1.0f64, 5.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for omega in [1.0, 3e7, 1e13] {
        let y = equilibrium_theta(0.0, omega).unwrap().theta1_star / omega;
        assert!((y - lo).abs() < 1e-13, "{y} vs {lo}");
    }
    // intensity constant in units of ħAR³Ω⁶|ψ_e|/c³
    let y = lo;
    let k = (y.powi(6) / 126.0 + y.powi(4) / 10.0 + y * y / 6.0 + 1.0 / 15.0) / (2.0 * std::f64::consts::PI);
    assert!((k - 0.6822).abs() < 1e-4, "{k}");
}

#[test]
fn spectral_integral_matches_closed_form_with_unequal_temperatures() {
    let omega = 2e11;
    let th1 = 3e11;
    let th2 = 1e11;
    let n = 3.0;
    let z0 = 1e-10 * C_LIGHT / (n * 40.0 * th1);
    let c = SystemConfig::new(
        Material::sio2(5e-6).unwrap(),
        PlateOptics::new(n).unwrap(),
        z0,
        omega,
        ThermalState::new(temperature_from_frequency(th1), temperature_from_frequency(th2)).unwrap(),
    )
    .unwrap();
    let cf = ClosedForm::new(&c.material, &c.plate, 1e-12).unwrap();
    let (a, b) = (c.theta1(), c.theta2());
    let i = spectral_rate_rotational(&c, 1e-9).unwrap();
    let m = spectral_torque_rotational(&c, 1e-9).unwrap();
    assert!(close(i, cf.intensity(a, b, omega), 1e-6, 0.0), "{i} vs {}", cf.intensity(a, b, omega));
    assert!(close(m, cf.torque(a, b, omega), 1e-6, 0.0), "{m} vs {}", cf.torque(a, b, omega));
}
