//! Plate response: reflection factors and the wavevector-integrated kernels
//! `ψ_e`, `ψ_m` and `χ_e`, `χ_m`.
//!
//! With the scaled wavevector `t = kc/ω` and `x = ωz₀/c`,
//!
//! ```text
//! ψ_e(n, x) = ∫₀ⁿ dt t Im[ e^{−2x√(t²−1)} / √(t²−1) · ((t²−1) Δ_e + Δ_m) ]
//! ψ_m(n, x) = same with Δ_e ↔ Δ_m
//! χ_s(n, x) = ∫₀ⁿ dt t³ Im[ e^{−2x√(t²−1)} Δ_s / √(t²−1) ]
//! ```
//!
//! For `t > n` every factor is real, so the integrals stop at `n`.
//!
//! The integrand has an inverse square-root singularity at `t = 1` and a
//! square-root branch point at `t = n`. Both are removed analytically:
//! `t = sin θ` on `[0, 1]` and `√(t²−1) = √(n²−1)·sin φ` on `[1, n]`. After
//! the substitutions both pieces are smooth and purely real, and they are
//! integrated together with one adaptive Gauss–Kronrod run over
//! `s ∈ [0, π]` (`θ = s` on the first half, `φ = s − π/2` on the second).

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::material::Channel;
use crate::quadrature::Quadrature;

/// Default relative tolerance of kernel quadratures.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Transparent, lossless half-space with real refractive index `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateOptics {
    refractive_index: f64,
}

impl PlateOptics {
    pub fn new(refractive_index: f64) -> Result<Self> {
        if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(Error::Domain(format!(
                "refractive index must be a finite number >= 1, got {refractive_index}"
            )));
        }
        Ok(PlateOptics { refractive_index })
    }

    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
}

/// Square root with the branch used throughout: real and non-negative for
/// `u² ≥ 0`, `+i√(−u²)` otherwise. This is the branch for which the kernels
/// are negative at `x = 0` and the radiated intensity is positive;
/// [`branch_self_test`] checks it.
pub fn branch_sqrt(u2: f64) -> Complex64 {
    if u2 >= 0.0 {
        Complex64::new(u2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-u2).sqrt())
    }
}

/// Reflection factors in scaled form (`ω/c = 1`, `k = t`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFactors {
    pub delta_e: Complex64,
    pub delta_m: Complex64,
    /// `(t²−1)Δ_e + Δ_m`
    pub r_e: Complex64,
    /// `(t²−1)Δ_m + Δ_e`
    pub r_m: Complex64,
    /// `√(t²−1)`
    pub q0: Complex64,
    /// `√(t²−n²)`
    pub q: Complex64,
}

pub fn reflection_factors(n: f64, t: f64) -> ReflectionFactors {
    let q0 = branch_sqrt(t * t - 1.0);
    let q = branch_sqrt(t * t - n * n);
    let n2 = n * n;
    let delta_e = (n2 * q0 - q) / (n2 * q0 + q);
    let delta_m = (q0 - q) / (q0 + q);
    let k2 = t * t - 1.0;
    ReflectionFactors {
        delta_e,
        delta_m,
        r_e: k2 * delta_e + delta_m,
        r_m: k2 * delta_m + delta_e,
        q0,
        q,
    }
}

/// Which plate-response kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `ψ_s`: in-plane (rotating) dipole components, weighted by `R_s`.
    Psi(Channel),
    /// `χ_s`: dipole component normal to the plate, weighted by `k² Δ_s`.
    Chi(Channel),
}

/// Integrand of a kernel in the unsubstituted variable `t`, computed with
/// complex arithmetic. Singular at `t = 1`; intended for diagnostics and
/// independent checks, not for the quadrature itself.
pub fn kernel_integrand(kind: KernelKind, n: f64, x: f64, t: f64) -> f64 {
    let f = reflection_factors(n, t);
    let phase = (-2.0 * x * f.q0).exp() / f.q0;
    match kind {
        KernelKind::Psi(Channel::Electric) => t * (phase * f.r_e).im,
        KernelKind::Psi(Channel::Magnetic) => t * (phase * f.r_m).im,
        KernelKind::Chi(Channel::Electric) => t.powi(3) * (phase * f.delta_e).im,
        KernelKind::Chi(Channel::Magnetic) => t.powi(3) * (phase * f.delta_m).im,
    }
}

/// Substituted integrand over `s ∈ [0, π]`.
fn substituted_integrand(kind: KernelKind, n: f64, x: f64, s: f64) -> f64 {
    let n2 = n * n;
    if s <= FRAC_PI_2 {
        // t = sin θ, √(t²−1) = i a, √(t²−n²) = i b. Both reflection factors
        // are real here; dt = a dθ cancels the 1/a of the integrand.
        let (t, a) = s.sin_cos();
        let b = (n2 - t * t).sqrt();
        let de = (n2 * a - b) / (n2 * a + b);
        let dm = (a - b) / (a + b);
        let osc = (2.0 * x * a).cos();
        match kind {
            KernelKind::Psi(Channel::Electric) => t * (a * a * de - dm) * osc,
            KernelKind::Psi(Channel::Magnetic) => t * (a * a * dm - de) * osc,
            KernelKind::Chi(Channel::Electric) => -t * t * t * de * osc,
            KernelKind::Chi(Channel::Magnetic) => -t * t * t * dm * osc,
        }
    } else {
        // √(t²−1) = p = P sin φ, √(t²−n²) = i b with b = P cos φ, P² = n²−1.
        // t dt = p dp and dp = b dφ.
        let big_p = (n2 - 1.0).sqrt();
        let (sin_phi, cos_phi) = (s - FRAC_PI_2).sin_cos();
        let p = big_p * sin_phi;
        let b = big_p * cos_phi;
        let im_de = -2.0 * n2 * p * b / (n2 * n2 * p * p + b * b);
        let im_dm = -2.0 * p * b / (n2 - 1.0);
        let decay = (-2.0 * x * p).exp();
        match kind {
            KernelKind::Psi(Channel::Electric) => decay * (p * p * im_de + im_dm) * b,
            KernelKind::Psi(Channel::Magnetic) => decay * (p * p * im_dm + im_de) * b,
            KernelKind::Chi(Channel::Electric) => decay * (1.0 + p * p) * im_de * b,
            KernelKind::Chi(Channel::Magnetic) => decay * (1.0 + p * p) * im_dm * b,
        }
    }
}

/// Initial panel boundaries in `s`: the two half-ranges, the zero of `Δ_e`
/// below the light line, its resonance in the frustrated band, and extra
/// panels proportional to `x` to resolve the phase `2x√(1−t²)`.
fn seed_points(n: f64, x: f64) -> Vec<f64> {
    let n2 = n * n;
    let oscillations = (2.0 * x / std::f64::consts::PI).ceil() as usize + 1;
    let mut pts = Vec::with_capacity(oscillations + 5);
    for i in 0..oscillations {
        pts.push(FRAC_PI_2 * i as f64 / oscillations as f64);
    }
    pts.push((1.0 / (n2 + 1.0).sqrt()).acos());
    pts.push(FRAC_PI_2);
    pts.push(FRAC_PI_2 + (1.0 / n2).atan());
    if x > 1.0 {
        // decay length of e^{−2xp} in φ
        let phi = (1.0 / (x * (n2 - 1.0).sqrt())).min(1.0).asin();
        pts.push(FRAC_PI_2 + phi);
    }
    pts.push(std::f64::consts::PI);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// A kernel value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub abs_error_estimate: f64,
    /// Absolute tolerance the estimate was required to meet.
    pub tolerance: f64,
}

fn validate(n: f64, x: f64, rel_tol: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::Domain(format!("refractive index must be >= 1, got {n}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and >= 0, got {x}")));
    }
    if !(rel_tol > 0.0 && rel_tol <= 1e-4) {
        return Err(Error::Domain(format!(
            "relative tolerance must lie in (0, 1e-4], got {rel_tol}"
        )));
    }
    Ok(())
}

/// Evaluates any of the four kernels.
pub fn kernel(kind: KernelKind, n: f64, x: f64, rel_tol: f64) -> Result<KernelValue> {
    validate(n, x, rel_tol)?;
    if n == 1.0 {
        return Ok(KernelValue {
            value: 0.0,
            abs_error_estimate: 0.0,
            tolerance: 0.0,
        });
    }
    // Near a zero crossing in x the relative target is unreachable, so the
    // tolerance is also floored against ∫|f|.
    let quad = Quadrature::new(rel_tol)
        .l1_rel_tol((1e-3 * rel_tol).max(1e-14))
        .max_intervals(4000);
    match quad.integrate(|s| substituted_integrand(kind, n, x, s), &seed_points(n, x)) {
        Ok(est) => Ok(KernelValue {
            value: est.value,
            abs_error_estimate: est.abs_error,
            tolerance: est.tolerance,
        }),
        Err(nc) => Err(Error::numerical(
            format!("{kind:?} kernel at n = {n}, x = {x} did not converge"),
            nc.best.value,
        )),
    }
}

/// `ψ_e(n, x)`.
pub fn psi_e(n: f64, x: f64, rel_tol: f64) -> Result<KernelValue> {
    kernel(KernelKind::Psi(Channel::Electric), n, x, rel_tol)
}

/// `ψ_m(n, x)`.
pub fn psi_m(n: f64, x: f64, rel_tol: f64) -> Result<KernelValue> {
    kernel(KernelKind::Psi(Channel::Magnetic), n, x, rel_tol)
}

pub fn psi(channel: Channel, n: f64, x: f64, rel_tol: f64) -> Result<KernelValue> {
    kernel(KernelKind::Psi(channel), n, x, rel_tol)
}

/// `χ_s(n, x)`, the kernel of the Ω-independent exchange through the dipole
/// component normal to the plate.
pub fn chi_kernel(n: f64, x: f64, channel: Channel, rel_tol: f64) -> Result<KernelValue> {
    kernel(KernelKind::Chi(channel), n, x, rel_tol)
}

/// Checks the branch convention: `ψ_e(3, 0)` must be negative.
pub fn branch_self_test() -> Result<()> {
    let v = psi_e(3.0, 0.0, DEFAULT_REL_TOL)?;
    if v.value < 0.0 {
        Ok(())
    } else {
        Err(Error::numerical(
            "branch self-test failed: psi_e(3, 0) is not negative",
            v.value,
        ))
    }
}
