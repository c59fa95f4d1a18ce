//! Modified Bessel functions `K_τ` of half-integer order, the radial profile
//! `φ_τ(z) = K_τ(√z)/√z^τ` and the operator `Dφ = 4zφ'' + 4(τ+1)φ' − φ`.
//!
//! `K_τ` is evaluated from `K_τ(z) = ∫₀^∞ e^{−z cosh t} cosh(τt) dt`. Orders
//! in `½ + ℤ` also have a terminating closed form, used as a fast path.

use crate::catalog::{self, Multiplicities};
use crate::error::{Error, Result};
use crate::fmath::{cosh, exp, ln, powf, sqrt};
use crate::quadrature::{self, Tolerance};
use crate::rational::{q, HalfInt, Q};
use crate::report::{CheckOutcome, VerificationReport};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Below this, `K_0` is dominated by its logarithmic singularity and
/// evaluation is refused.
pub const K0_MIN_Z: f64 = 1e-8;

const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

fn check_domain(tau: HalfInt, z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            z,
            reason: "z must be positive and finite",
        });
    }
    if tau.twice() == 0 && z < K0_MIN_Z {
        return Err(Error::Domain {
            z,
            reason: "K_0 is not evaluated below 1e-8",
        });
    }
    Ok(())
}

/// Log of the integrand `e^{−z(cosh t − 1)} cosh(νt)` without the even part
/// correction, i.e. `νt − z(cosh t − 1)`.
#[inline]
fn log_envelope(nu: f64, z: f64, t: f64) -> f64 {
    nu * t - z * (cosh(t) - 1.0)
}

/// Where the scaled integrand peaks and where it has fallen by `e^{−depth}`
/// past the peak.
fn integration_window(nu: f64, z: f64, depth: f64) -> (f64, f64) {
    // The envelope νt − z(cosh t − 1) peaks at sinh t = ν/z.
    let peak = if nu > 0.0 {
        let s = nu / z;
        ln(s + sqrt(s * s + 1.0))
    } else {
        0.0
    };
    let top = log_envelope(nu, z, peak);
    let mut hi = peak.max(1.0);
    while log_envelope(nu, z, hi) > top - depth {
        hi *= 1.5;
        if hi > 800.0 {
            break;
        }
    }
    (peak, hi)
}

#[inline]
fn scaled_integrand(nu: f64, z: f64, t: f64) -> f64 {
    // e^{−z(cosh t −1)} cosh(νt), with cosh(νt) = e^{νt}(1 + e^{−2νt})/2.
    let env = log_envelope(nu, z, t);
    0.5 * exp(env) * (1.0 + exp(-2.0 * nu * t))
}

/// `K_τ(z)` by adaptive Gauss–Kronrod quadrature of the integral
/// representation, to the given relative tolerance.
pub fn bessel_k_integral_tol(tau: HalfInt, z: f64, rel: f64) -> Result<f64> {
    check_domain(tau, z)?;
    let nu = tau.abs().to_f64();
    let (peak, hi) = integration_window(nu, z, 45.0);
    let tol = Tolerance {
        abs: 0.0,
        rel,
        max_intervals: 4000,
    };
    let f = |t: f64| scaled_integrand(nu, z, t);
    let mut total = 0.0;
    if peak > 0.0 {
        total += quadrature::integrate(f, 0.0, peak, tol)?.value;
    }
    total += quadrature::integrate(f, peak, hi, tol)?.value;
    Ok(total * exp(-z))
}

pub fn bessel_k_integral(tau: HalfInt, z: f64) -> Result<f64> {
    bessel_k_integral_tol(tau, z, 1e-14)
}

/// `K_{m+½}(z) = √(π/2z) e^{−z} Σ_{k=0}^{m} (m+k)! / (k!(m−k)!(2z)^k)`.
pub fn bessel_k_half_odd(tau: HalfInt, z: f64) -> Result<f64> {
    check_domain(tau, z)?;
    let t = tau.abs().twice();
    if t % 2 == 0 {
        return Err(Error::Domain {
            z,
            reason: "closed form needs an order in 1/2 + Z",
        });
    }
    let m = (t - 1) / 2;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..m {
        term *= ((m + k + 1) * (m - k)) as f64 / ((k + 1) as f64 * 2.0 * z);
        sum += term;
    }
    Ok(sqrt(FRAC_PI_2 / z) * exp(-z) * sum)
}

/// `K_τ(z)` to at least ten significant digits. Orders in `½ + ℤ` use the
/// closed form; all others the integral representation.
pub fn bessel_k(tau: HalfInt, z: f64) -> Result<f64> {
    if !tau.is_integer() {
        bessel_k_half_odd(tau, z)
    } else {
        bessel_k_integral(tau, z)
    }
}

/// `K_τ, K_{τ+1}, K_{τ+2}` at once, for the sampling loops.
///
/// Non-half-odd orders use a fixed-step trapezoid rule on the integral
/// representation. The integrand is entire and decays doubly exponentially
/// in the strip `|Im t| < π/2`, so the error of step `h` is about
/// `e^{−π²/h}` once `h` also resolves the peak width `~1/√z`; agreement with [`bessel_k_integral`] is covered by tests.
pub fn bessel_k_fast3(tau: HalfInt, z: f64) -> Result<[f64; 3]> {
    fast_orders([tau, tau.add_int(1), tau.add_int(2)], z)
}

pub fn bessel_k_fast(tau: HalfInt, z: f64) -> Result<f64> {
    Ok(fast_orders([tau], z)?[0])
}

fn fast_orders<const N: usize>(orders: [HalfInt; N], z: f64) -> Result<[f64; N]> {
    for t in orders {
        check_domain(t, z)?;
    }
    if !orders[0].is_integer() {
        let mut out = [0.0; N];
        for (o, t) in out.iter_mut().zip(orders) {
            *o = bessel_k_half_odd(t, z)?;
        }
        return Ok(out);
    }
    let nus = orders.map(|t| t.abs().to_f64());
    let numax = nus.iter().cloned().fold(0.0, f64::max);
    let (_, hi) = integration_window(numax, z, 40.0);
    // For large z the peak narrows like 1/√z and the step follows it.
    let h = 0.25f64.min(0.6 / sqrt(z));
    let steps = (hi / h) as usize + 1;
    let mut acc = [0.0f64; N];
    for i in 0..=steps {
        let t = i as f64 * h;
        let base = -z * (cosh(t) - 1.0);
        let w = if i == 0 { 0.5 } else { 1.0 };
        for (a, &nu) in acc.iter_mut().zip(&nus) {
            *a += w * 0.5 * (exp(base + nu * t) + exp(base - nu * t));
        }
    }
    let scale = h * exp(-z);
    Ok(acc.map(|a| a * scale))
}

fn phi_from_k(nu: HalfInt, k: f64, w: f64) -> f64 {
    k / powf(w, nu.to_f64())
}

/// `(φ_τ(z), φ_τ'(z), φ_τ''(z))` with derivatives from
/// `φ_τ' = −½ φ_{τ+1}` and `φ_τ'' = ¼ φ_{τ+2}`. Each order is evaluated
/// independently.
pub fn phi_tau(tau: HalfInt, z: f64) -> Result<(f64, f64, f64)> {
    let w = sqrt(z);
    let k0 = bessel_k(tau, w)?;
    let k1 = bessel_k(tau.add_int(1), w)?;
    let k2 = bessel_k(tau.add_int(2), w)?;
    Ok((
        phi_from_k(tau, k0, w),
        -0.5 * phi_from_k(tau.add_int(1), k1, w),
        0.25 * phi_from_k(tau.add_int(2), k2, w),
    ))
}

/// As [`phi_tau`] but through [`bessel_k_fast3`].
pub fn phi_tau_fast(tau: HalfInt, z: f64) -> Result<(f64, f64, f64)> {
    let w = sqrt(z);
    let [k0, k1, k2] = bessel_k_fast3(tau, w)?;
    Ok((
        phi_from_k(tau, k0, w),
        -0.5 * phi_from_k(tau.add_int(1), k1, w),
        0.25 * phi_from_k(tau.add_int(2), k2, w),
    ))
}

/// `g_τ(y) = φ_τ(|y|²) = K_τ(|y|)/|y|^τ`.
pub fn g_tau(tau: HalfInt, radius: f64) -> Result<f64> {
    Ok(bessel_k(tau, radius)? / powf(radius, tau.to_f64()))
}

/// Largest relative disagreement between the recurrence derivatives of
/// `φ_τ` and five-point finite differences of its values.
pub fn derivative_crosscheck(tau: HalfInt, z: f64) -> Result<f64> {
    let h = 1e-2 * z;
    let f = |x: f64| phi_tau(tau, x).map(|p| p.0);
    let (fm2, fm1, f0, fp1, fp2) = (f(z - 2.0 * h)?, f(z - h)?, f(z)?, f(z + h)?, f(z + 2.0 * h)?);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    let (_, r1, r2) = phi_tau(tau, z)?;
    Ok(((d1 - r1) / r1).abs().max(((d2 - r2) / r2).abs()))
}

/// Threshold above which [`derivative_crosscheck`] flags a disagreement.
pub const DERIVATIVE_AGREEMENT: f64 = 1e-6;

/// Relative residual of `z²K'' + zK' − (z²+τ²)K = 0` with finite-difference
/// derivatives of `K_τ`, normalized by the sum of the magnitudes of the
/// three terms.
pub fn bessel_ode_residual(tau: HalfInt, z: f64) -> Result<f64> {
    let h = (1e-2 * z).min(0.05);
    let k = |x: f64| bessel_k(tau, x);
    let (km2, km1, k0, kp1, kp2) = (k(z - 2.0 * h)?, k(z - h)?, k(z)?, k(z + h)?, k(z + 2.0 * h)?);
    let d1 = (km2 - 8.0 * km1 + 8.0 * kp1 - kp2) / (12.0 * h);
    let d2 = (-km2 + 16.0 * km1 - 30.0 * k0 + 16.0 * kp1 - kp2) / (12.0 * h * h);
    let t = tau.to_f64();
    let terms = [z * z * d2, z * d1, -(z * z + t * t) * k0];
    let scale: f64 = terms.iter().map(|x| x.abs()).sum();
    Ok((terms[0] + terms[1] + terms[2]).abs() / scale)
}

/// A function of one positive variable with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialFunction {
    /// `φ_τ`.
    Phi(HalfInt),
    /// A constant.
    Constant(f64),
    /// `z ↦ e^{−az}`.
    Exponential(f64),
}

impl RadialFunction {
    pub fn eval(&self, z: f64) -> Result<(f64, f64, f64)> {
        match *self {
            RadialFunction::Phi(tau) => phi_tau(tau, z),
            RadialFunction::Constant(c) => Ok((c, 0.0, 0.0)),
            RadialFunction::Exponential(a) => {
                let v = exp(-a * z);
                Ok((v, -a * v, a * a * v))
            }
        }
    }
}

/// Coefficients of `D = 4z∂² + 4(τ+1)∂ − 1` as `[z∂², ∂, 1]`.
pub fn d_operator_coefficients(tau: HalfInt) -> [Q; 3] {
    [q(4), q(4) * (tau.to_q() + q(1)), q(-1)]
}

/// `4(τ+1) = 2(d+1−e)` in exact arithmetic.
pub fn d_coefficient_identity(m: Multiplicities) -> (Q, Q) {
    let lhs = d_operator_coefficients(catalog::tau(m))[1].clone();
    let rhs = q(2) * q(m.d as i64 + 1 - m.e as i64);
    (lhs, rhs)
}

/// `(Dφ)(z)` for the operator attached to `τ`.
pub fn apply_d(tau: HalfInt, f: &RadialFunction, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain {
            z,
            reason: "z must be positive",
        });
    }
    let (v, d1, d2) = f.eval(z)?;
    Ok(4.0 * z * d2 + 4.0 * (tau.to_f64() + 1.0) * d1 - v)
}

/// `max φ_τ(z) e^{√z/2}` over the given points with `z ≥ 1`: a finite value
/// bounds `φ_τ` by a multiple of `e^{−√z/2}` there.
pub fn decay_constant(tau: HalfInt, zs: &[f64]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &z in zs.iter().filter(|&&z| z >= 1.0) {
        let (v, _, _) = phi_tau(tau, z)?;
        c = c.max(v * exp(0.5 * sqrt(z)));
    }
    Ok(c)
}

/// `K_ν(z) = ½∫_ℝ e^{νt − z cosh t} dt` without folding the integrand:
/// the window is centred on the peak at `sinh t = ν/z`, so `ν` and `−ν`
/// are evaluated on mirrored but separately refined partitions.
pub fn bessel_k_full_line(nu: f64, z: f64) -> Result<f64> {
    check_domain(HalfInt::HALF, z)?;
    let s = (nu / z).abs();
    let peak = ln(s + sqrt(s * s + 1.0)) * if nu < 0.0 { -1.0 } else { 1.0 };
    let env = |t: f64| nu * t - z * (cosh(t) - 1.0);
    let top = env(peak);
    let reach = |dir: f64| {
        let mut d = 1.0;
        while env(peak + dir * d) > top - 45.0 && d < 800.0 {
            d *= 1.5;
        }
        peak + dir * d
    };
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-15,
        max_intervals: 4000,
    };
    let f = |t: f64| exp(env(t) - top);
    let v = quadrature::integrate(f, reach(-1.0), peak, tol)?.value
        + quadrature::integrate(f, peak, reach(1.0), tol)?.value;
    Ok(0.5 * v * exp(top - z))
}

/// Orders and points used by [`bessel_suite`].
pub fn default_suite_grid() -> (Vec<HalfInt>, Vec<f64>) {
    let taus = vec![-HalfInt::HALF, HalfInt::ZERO, HalfInt::HALF];
    let zs = (0..=120)
        .map(|i| 0.1 * powf(500.0, i as f64 / 120.0))
        .collect();
    (taus, zs)
}

fn relative_d_residual(tau: HalfInt, z: f64, k: impl Fn(HalfInt, f64) -> Result<f64>) -> Result<f64> {
    let w = sqrt(z);
    let p = |o: HalfInt| -> Result<f64> { Ok(phi_from_k(o, k(o, w)?, w)) };
    let (v, d1, d2) = (p(tau)?, -0.5 * p(tau.add_int(1))?, 0.25 * p(tau.add_int(2))?);
    let terms = [4.0 * z * d2, 4.0 * (tau.to_f64() + 1.0) * d1, -v];
    let scale: f64 = terms.iter().map(|x| x.abs()).sum();
    Ok((terms[0] + terms[1] + terms[2]).abs() / scale)
}

/// Residual of `Dφ_τ = 0` by two routes, the finite-difference ODE
/// residual of `K_τ`, the half-order closed form against quadrature and
/// evenness in the order.
pub fn bessel_suite(taus: &[HalfInt], zs: &[f64]) -> VerificationReport {
    let mut rep = VerificationReport::new("bessel", "-");
    let mut run = |name: &str, tol: f64, detail: String, f: &mut dyn FnMut(HalfInt, f64) -> Result<Option<f64>>| {
        let (mut worst, mut fails, mut count) = (0.0f64, 0u64, 0u64);
        for &t in taus {
            for &z in zs {
                match f(t, z) {
                    Ok(Some(r)) => {
                        count += 1;
                        worst = worst.max(r);
                        if !(r <= tol) {
                            fails += 1;
                        }
                    }
                    Ok(None) => {}
                    Err(_) => {
                        count += 1;
                        fails += 1;
                        worst = f64::INFINITY;
                    }
                }
            }
        }
        rep.push(CheckOutcome::float(name, count, fails, worst, tol, detail));
    };
    run(
        "d_residual_quadrature",
        1e-9,
        "relative |Dφ_τ(z)| with K_τ, K_τ+1, K_τ+2 each by quadrature".into(),
        &mut |t, z| relative_d_residual(t, z, bessel_k_integral).map(Some),
    );
    run(
        "d_residual_closed_form",
        1e-9,
        "relative |Dφ_τ(z)| with closed forms, orders in ½ + ℤ".into(),
        &mut |t, z| {
            if t.is_integer() {
                Ok(None)
            } else {
                relative_d_residual(t, z, bessel_k_half_odd).map(Some)
            }
        },
    );
    run(
        "ode_finite_difference",
        1e-6,
        "z²K″ + zK′ − (z²+τ²)K with five-point differences".into(),
        &mut |t, z| bessel_ode_residual(t, z).map(Some),
    );
    run(
        "half_order_closed_form",
        1e-10,
        "K_1/2 closed form against quadrature, relative".into(),
        &mut |t, z| {
            if t != HalfInt::HALF {
                return Ok(None);
            }
            let c = bessel_k_half_odd(t, z)?;
            let i = bessel_k_integral(t, z)?;
            Ok(Some(((c - i) / c).abs()))
        },
    );
    run(
        "evenness",
        1e-12,
        "K_−τ against K_τ, full-line integral without folding".into(),
        &mut |t, z| {
            let a = bessel_k_full_line(t.to_f64(), z)?;
            let b = bessel_k_full_line(-t.to_f64(), z)?;
            Ok(Some(((a - b) / a).abs()))
        },
    );
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: HalfInt = HalfInt::HALF;

    #[test]
    fn half_order_closed_form() {
        let v = bessel_k(HALF, 1.0).unwrap();
        assert!((v - 0.461_068_504_447_894_5).abs() < 1e-12);
        let i = bessel_k_integral(HALF, 1.0).unwrap();
        assert!(((v - i) / v).abs() < 1e-12);
    }

    #[test]
    fn refuses_bad_arguments() {
        assert!(bessel_k(HALF, 0.0).is_err());
        assert!(bessel_k(HALF, -1.0).is_err());
        assert!(bessel_k(HalfInt::ZERO, 1e-9).is_err());
        assert!(bessel_k(HalfInt::ZERO, 2e-8).is_ok());
    }

    #[test]
    fn fast_path_agrees_with_integral() {
        for tau in [0, 2, 4, 6] {
            for z in [1e-3, 0.1, 0.7, 3.0, 20.0, 60.0] {
                let t = HalfInt::from_twice(tau);
                let f = bessel_k_fast(t, z).unwrap();
                let i = bessel_k_integral(t, z).unwrap();
                assert!(((f - i) / i).abs() < 1e-12, "tau {t} z {z}: {f} vs {i}");
            }
        }
    }

    #[test]
    fn suite_passes() {
        let (taus, zs) = default_suite_grid();
        let r = bessel_suite(&taus, &zs);
        for c in &r.checks {
            assert!(c.passed(), "{} {} {}", c.name, c.residual, c.detail);
        }
    }

    #[test]
    fn full_line_matches_folded() {
        for z in [0.1, 1.0, 7.0, 40.0] {
            let a = bessel_k_full_line(1.5, z).unwrap();
            let b = bessel_k_half_odd(HalfInt::from_twice(3), z).unwrap();
            assert!(((a - b) / b).abs() < 1e-12, "{z}");
        }
    }

    #[test]
    fn d_coefficients() {
        let (l, r) = d_coefficient_identity(Multiplicities { d: 2, e: 0 });
        assert_eq!((l.clone(), r), (q(6), q(6)));
        let (l, r) = d_coefficient_identity(Multiplicities { d: 4, e: 1 });
        assert_eq!(l, r);
        assert_eq!(l, q(8));
        let c = apply_d(HALF, &RadialFunction::Constant(1.0), 2.0).unwrap();
        assert_eq!(c, -1.0);
    }
}
