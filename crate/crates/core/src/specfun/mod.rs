//! Gamma and modified Bessel functions, and the overcompleteness measure
//! densities built from them.

pub mod quad;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Exact factorials that fit in a double, `n!` for `n <= 170`.
fn factorial_table() -> &'static [f64; 171] {
    static TABLE: std::sync::OnceLock<[f64; 171]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0f64; 171];
        for n in 1..171 {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("ln_gamma", x));
    }
    if x.fract() == 0.0 && x <= 171.0 {
        return Ok(factorial_table()[x as usize - 1].ln());
    }
    Ok(ln_gamma_stirling(x))
}

/// Shift the argument above 15 and sum the Stirling series there.
fn ln_gamma_stirling(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut prod = 1.0;
    let mut y = x;
    while y < 15.0 {
        prod *= y;
        y += 1.0;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
    }
    shift += prod.ln();
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // B_{2n} / (2n (2n-1)) for n = 1..7
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    (y - 0.5) * y.ln() - y + LN_SQRT_2PI + series - shift
}

pub fn ln_factorial(n: u32) -> f64 {
    if n <= 170 {
        factorial_table()[n as usize].ln()
    } else {
        ln_gamma_stirling(n as f64 + 1.0)
    }
}

/// `ln I_nu(x)` by the ascending series, with periodic rescaling so that the
/// partial sums never overflow. Returns `-inf` for `I_nu(0) = 0`.
fn ln_bessel_i_series(nu: f64, x: f64, max_terms: usize) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0f64;
    let peak = 0.5 * x;
    for m in 0..max_terms {
        let mf = m as f64;
        term *= q / ((mf + 1.0) * (mf + nu + 1.0));
        sum += term;
        if sum > 1e290 {
            sum *= 1e-290;
            term *= 1e-290;
            ln_scale += 290.0 * std::f64::consts::LN_10;
        }
        if mf > peak && term < sum * 1e-17 {
            break;
        }
    }
    Ok(nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)? + sum.ln() + ln_scale)
}

fn check_bessel_args(name: &'static str, nu: f64, x: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(name, nu));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(name, x));
    }
    Ok(())
}

/// Number of series terms used by default; ample for `x <= 700`.
pub const BESSEL_I_TERMS: usize = 4000;

/// Modified Bessel function of the first kind `I_nu(x)` for `nu >= 0`, `x >= 0`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    check_bessel_args("bessel_i", nu, x)?;
    let ln = ln_bessel_i_series(nu, x, BESSEL_I_TERMS)?;
    if ln > 709.0 {
        return Err(Error::Overflow {
            function: "bessel_i",
            nu,
            x,
        });
    }
    Ok(ln.exp())
}

/// `I_nu(x)` summed with at most `terms` series terms; used to check series
/// convergence.
pub fn bessel_i_truncated(nu: f64, x: f64, terms: usize) -> Result<f64> {
    check_bessel_args("bessel_i", nu, x)?;
    Ok(ln_bessel_i_series(nu, x, terms)?.exp())
}

/// `ln I_nu(x)`, finite for arguments where `I_nu` itself would overflow.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    check_bessel_args("bessel_i", nu, x)?;
    ln_bessel_i_series(nu, x, BESSEL_I_TERMS)
}

/// `e^{-x} I_nu(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    Ok((ln_bessel_i(nu, x)? - x).exp())
}

/// `ln(e^x K_nu(x))` from `K_nu(x) = int_0^inf e^{-x cosh t} cosh(nu t) dt`.
///
/// The integrand is even and analytic in a strip around the real axis, so the
/// trapezoid rule converges geometrically; the step is halved until two
/// refinements agree to 1e-15.
fn ln_bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let nu = nu.abs();
    if x > 40.0 + 2.0 * nu * nu {
        return Ok(ln_bessel_k_scaled_asymptotic(nu, x));
    }
    // Leading small-x term, used only where the first correction is below
    // double precision: (x/2)^{2 min(nu, 1)} relative for nu > 0, x^2 for nu = 0.
    if nu == 0.0 && x < 1e-9 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        return Ok((-(0.5 * x).ln() - EULER_GAMMA).ln() + x);
    }
    if nu > 0.0 && x < 2.0 * 1e-17f64.powf(0.5 / nu.min(1.0)) {
        return Ok(ln_gamma(nu)? - std::f64::consts::LN_2 + nu * (2.0 / x).ln() + x);
    }
    // Exponent of the integrand, shifted by its maximum.
    let t_peak = (nu / x).asinh();
    let phi = |t: f64| -x * (t.cosh() - 1.0) + nu * t;
    let phi_max = phi(t_peak);
    let g = |t: f64| {
        let e = phi(t) - phi_max;
        // cosh(nu t) e^{-nu t} = (1 + e^{-2 nu t}) / 2
        e.exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp())
    };
    // Right edge where the integrand has dropped by e^{-45} past the peak.
    let mut t_end = t_peak + 1.0;
    while phi(t_end) - phi_max > -45.0 {
        t_end += 0.5;
        if t_end > 1e4 {
            return Err(Error::Quadrature(format!(
                "K_{nu}({x}) integrand does not decay"
            )));
        }
    }
    let mut h = 0.5f64;
    let mut n = (t_end / h).ceil() as usize;
    let mut sum = 0.5 * g(0.0) + (1..=n).map(|k| g(k as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    for _ in 0..20 {
        h *= 0.5;
        n *= 2;
        sum += (0..n / 2).map(|k| g((2 * k + 1) as f64 * h)).sum::<f64>();
        let next = sum * h;
        let done = (next - estimate).abs() <= 1e-15 * next;
        estimate = next;
        if done && h < 0.2 {
            return Ok(phi_max + estimate.ln());
        }
    }
    Err(Error::Quadrature(format!(
        "K_{nu}({x}) trapezoid did not converge"
    )))
}

fn check_k_args(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() {
        return Err(Error::Domain("bessel_k", nu));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("bessel_k", x));
    }
    Ok(())
}

/// Hankel expansion `e^x K_nu(x) ~ sqrt(pi/2x) sum_k a_k(nu) / x^k`, summed
/// until the terms stop shrinking or fall below double precision.
fn ln_bessel_k_scaled_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let j = (2 * k - 1) as f64;
        let next = term * (mu - j * j) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    0.5 * (PI / (2.0 * x)).ln() + sum.ln()
}

/// Modified Bessel function of the second kind `K_nu(x)` for real `nu` and
/// `x > 0`; `K_{-nu} = K_nu`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    check_k_args(nu, x)?;
    let ln = ln_bessel_k_scaled(nu, x)? - x;
    if ln > 709.0 {
        return Err(Error::Overflow {
            function: "bessel_k",
            nu,
            x,
        });
    }
    Ok(ln.exp())
}

/// `e^x K_nu(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    check_k_args(nu, x)?;
    let ln = ln_bessel_k_scaled(nu, x)?;
    if ln > 709.0 {
        return Err(Error::Overflow {
            function: "bessel_k",
            nu,
            x,
        });
    }
    Ok(ln.exp())
}

/// `sum_m u^m / (m! Gamma(m + nu + 1))` for complex `u`.
///
/// Equals `I_nu(2w) / w^nu` with `w^2 = u`; for integer `nu` the value does
/// not depend on which square root is taken.
pub fn bessel_i_entire(nu: f64, u: C64) -> Result<C64> {
    let mut term = C64::new((-ln_gamma(nu + 1.0)?).exp(), 0.0);
    let mut sum = term;
    let au = u.norm();
    for m in 0..10_000usize {
        let mf = m as f64;
        term *= u / ((mf + 1.0) * (mf + nu + 1.0));
        sum += term;
        if mf > au.sqrt() && term.norm() <= 1e-18 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::Quadrature("entire Bessel series did not converge".into()))
}

/// Overcompleteness measure densities with respect to `d^2` of their complex
/// variables. Radial points are passed as `|z_1|, ..., |z_d|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// `pi^{-N} e^{-|alpha|^2}` over N modes.
    GaussianGlauber { modes: usize },
    /// `(2/pi) K_{2k-1}(2|z|) I_{2k-1}(2|z|)`.
    BgSu11 { two_k: u32 },
    /// Gaussian density over the `p + q` amplitudes of the u(p,q) family.
    UpqAlpha { p: usize, q: usize },
    /// `pi^{-N} F(|z_p|, |z_q|; l, p, q)` over `N - 1` variables, with
    /// `F = int d^2 a |a|^{2(q-p-l-1)} exp(-(|z_p|^2/|a|^2 + |z_q|^2 |a|^2 + |a|^2))`.
    ///
    /// The extra `-1` in the exponent comes from the Jacobian of
    /// `alpha -> z` together with the `alpha_N^{-l}` factor absorbed into the
    /// state; this is the density that resolves `1_l` for the states
    /// `upq_bg_cs` builds from a reduced parameterization.
    UpqZ { l: i64, p: usize, q: usize },
    /// Same integral with exponent `2(q-p-l)`, kept for comparison.
    UpqZAsPrinted { l: i64, p: usize, q: usize },
    /// `(2 |z|^{-l-p} / pi^N) K_{-l-p}(2|z|)`, `N = p + 1`.
    FujiiK { l: i64, p: usize },
    /// `factor` times another density.
    Scaled { factor: f64, inner: Box<MeasureSpec> },
}

impl MeasureSpec {
    /// Number of radial coordinates the density takes.
    pub fn dims(&self) -> usize {
        match self {
            MeasureSpec::GaussianGlauber { modes } => *modes,
            MeasureSpec::BgSu11 { .. } => 1,
            MeasureSpec::UpqAlpha { p, q } => p + q,
            MeasureSpec::UpqZ { p, q, .. } | MeasureSpec::UpqZAsPrinted { p, q, .. } => {
                p + q - 1
            }
            MeasureSpec::FujiiK { p, .. } => *p,
            MeasureSpec::Scaled { inner, .. } => inner.dims(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            MeasureSpec::GaussianGlauber { modes } => format!("GaussianGlauber(N={modes})"),
            MeasureSpec::BgSu11 { two_k } => format!("BGSu11(k={})", *two_k as f64 / 2.0),
            MeasureSpec::UpqAlpha { p, q } => format!("UpqAlpha(p={p},q={q})"),
            MeasureSpec::UpqZ { l, p, q } => format!("UpqZ(l={l},p={p},q={q})"),
            MeasureSpec::UpqZAsPrinted { l, p, q } => {
                format!("UpqZAsPrinted(l={l},p={p},q={q})")
            }
            MeasureSpec::FujiiK { l, p } => format!("FujiiK(l={l},p={p})"),
            MeasureSpec::Scaled { factor, inner } => format!("{factor}*{}", inner.label()),
        }
    }
}

/// `F` for the reduced u(p,q) measure: `pi int_0^inf t^s e^{-rp^2/t - (1 + rq^2) t} dt`
/// after `t = |alpha_N|^2` and the trivial angular integral.
pub fn upq_f_integral(s: i64, rp: f64, rq: f64) -> Result<f64> {
    let b = 1.0 + rq * rq;
    if rp == 0.0 {
        if s <= -1 {
            return Err(Error::Divergent(format!(
                "F with exponent t^{s} is not integrable at |z_p| = 0"
            )));
        }
        // pi Gamma(s+1) / b^{s+1}
        let sp1 = (s + 1) as f64;
        return Ok(PI * (ln_gamma(sp1)? - sp1 * b.ln()).exp());
    }
    let a = rp * rp;
    let sf = s as f64;
    let v = quad::exp_sinh(|t| (sf * t.ln() - a / t - b * t).exp(), 1e-13)?;
    Ok(PI * v)
}

fn split_radii(point: &[f64], p: usize) -> (f64, f64) {
    let rp = point[..p].iter().map(|r| r * r).sum::<f64>().sqrt();
    let rq = point[p..].iter().map(|r| r * r).sum::<f64>().sqrt();
    (rp, rq)
}

pub fn measure_density(spec: &MeasureSpec, point: &[f64]) -> Result<f64> {
    if point.len() != spec.dims() {
        return Err(Error::Mismatch(format!(
            "{} takes {} radial coordinates, got {}",
            spec.label(),
            spec.dims(),
            point.len()
        )));
    }
    if point.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(Error::Mismatch(format!(
            "radial coordinates must be finite and non-negative: {point:?}"
        )));
    }
    match spec {
        MeasureSpec::GaussianGlauber { .. } | MeasureSpec::UpqAlpha { .. } => {
            let n = point.len() as i32;
            let r2: f64 = point.iter().map(|r| r * r).sum();
            Ok((-r2).exp() / PI.powi(n))
        }
        MeasureSpec::BgSu11 { two_k } => {
            if *two_k == 0 {
                return Err(Error::InvalidBargmannIndex(0));
            }
            let nu = *two_k as f64 - 1.0;
            let x = 2.0 * point[0];
            if x == 0.0 {
                // K_nu I_nu -> 1/(2 nu) for nu > 0; K_0 I_0 diverges logarithmically.
                return if nu > 0.0 {
                    Ok(2.0 / PI / (2.0 * nu))
                } else {
                    Err(Error::Divergent("K_0(0) I_0(0)".into()))
                };
            }
            Ok(2.0 / PI * bessel_k_scaled(nu, x)? * bessel_i_scaled(nu, x)?)
        }
        MeasureSpec::UpqZ { l, p, q } | MeasureSpec::UpqZAsPrinted { l, p, q } => {
            if *p == 0 || *q == 0 {
                return Err(Error::InvalidSplit {
                    p: *p,
                    q: *q,
                    modes: p + q,
                });
            }
            let printed = matches!(spec, MeasureSpec::UpqZAsPrinted { .. });
            let s = *q as i64 - *p as i64 - l - if printed { 0 } else { 1 };
            let (rp, rq) = split_radii(point, *p);
            let n = (p + q) as i32;
            Ok(upq_f_integral(s, rp, rq)? / PI.powi(n))
        }
        MeasureSpec::FujiiK { l, p } => {
            let r = point.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
            let nu = (-l - *p as i64) as f64;
            let n = (*p + 1) as i32;
            if r == 0.0 {
                // r^nu K_nu(2r) -> Gamma(nu) / 2 for nu > 0.
                if nu > 0.0 {
                    return Ok(ln_gamma(nu)?.exp() / PI.powi(n));
                }
                return Err(Error::Domain("FujiiK density", r));
            }
            let x = 2.0 * r;
            check_k_args(nu, x)?;
            // r^nu K_nu(2r) stays finite as r -> 0 while K alone overflows.
            let ln = nu * r.ln() + ln_bessel_k_scaled(nu, x)? - x;
            Ok(2.0 * ln.exp() / PI.powi(n))
        }
        MeasureSpec::Scaled { factor, inner } => Ok(factor * measure_density(inner, point)?),
    }
}

/// Radial moment of the BG measure, `int d^2z (2/pi) K_nu(2|z|) |z|^{2n+2k-1}`
/// with `nu = 2k - 1`, which the resolution of unity requires to equal
/// `n! Gamma(2k + n)`.
pub fn bg_measure_moment(two_k: u32, n: u32) -> Result<f64> {
    if two_k == 0 {
        return Err(Error::InvalidBargmannIndex(0));
    }
    let nu = two_k as f64 - 1.0;
    let power = 2.0 * n as f64 + two_k as f64;
    // 4 int_0^inf K_nu(2r) r^{2n+2k} dr, integrand in log form.
    let v = quad::exp_sinh(
        |r| match bessel_k_scaled(nu, 2.0 * r) {
            Ok(ks) => (ks.ln() - 2.0 * r + power * r.ln()).exp(),
            Err(_) => 0.0,
        },
        1e-13,
    )?;
    Ok(4.0 * v)
}

/// `|x (I_nu K_{nu+1} + I_{nu+1} K_nu)(x) - 1|`, built from the scaled
/// functions so the exponentials cancel.
pub fn bessel_wronskian_residual(nu: f64, x: f64) -> Result<f64> {
    let w = bessel_i_scaled(nu, x)? * bessel_k_scaled(nu + 1.0, x)?
        + bessel_i_scaled(nu + 1.0, x)? * bessel_k_scaled(nu, x)?;
    Ok((x * w - 1.0).abs())
}

/// Relative error of `K_{1/2}(x)` against `sqrt(pi/2x) e^{-x}`.
pub fn bessel_k_half_residual(x: f64) -> Result<f64> {
    let want = (PI / (2.0 * x)).sqrt();
    Ok(((bessel_k_scaled(0.5, x)? - want) / want).abs())
}

/// Both sides of the integral representation quoted for `K_nu(2z)`, plus the
/// classical Mellin-type form that does hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnuProbe {
    pub nu: u32,
    pub z: f64,
    /// `K_nu(2z)`.
    pub lhs: f64,
    /// `2 pi (2z)^{-nu} int_0^inf x^{1+nu} e^{-(x + z^2/x)} dx`.
    pub rhs: f64,
    pub ratio: f64,
    /// `(1/2) z^{-nu} int_0^inf x^{nu-1} e^{-(x + z^2/x)} dx`, equal to `K_nu(2z)`.
    pub classical: f64,
    pub classical_rel_error: f64,
}

pub fn knu_integral_probe(nu: u32, z: f64) -> Result<KnuProbe> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain("knu_integral_probe", z));
    }
    let nuf = nu as f64;
    let z2 = z * z;
    let lhs = bessel_k(nuf, 2.0 * z)?;
    let printed = quad::exp_sinh(|x| ((1.0 + nuf) * x.ln() - x - z2 / x).exp(), 1e-13)?;
    let rhs = 2.0 * PI * (-nuf * (2.0 * z).ln()).exp() * printed;
    let mellin = quad::exp_sinh(|x| ((nuf - 1.0) * x.ln() - x - z2 / x).exp(), 1e-13)?;
    let classical = 0.5 * (-nuf * z.ln()).exp() * mellin;
    Ok(KnuProbe {
        nu,
        z,
        lhs,
        rhs,
        ratio: rhs / lhs,
        classical,
        classical_rel_error: ((classical - lhs) / lhs).abs(),
    })
}
