//! Gram matrices `G_mn = int dmu <m|psi><psi|n>` for each state family and
//! its measure, and moment probes comparing two densities.
//!
//! Every family here has amplitudes `g(n) prod_i w_i^{n_i} / sqrt(n_i!)` in
//! some complex variables `w`, so the angular integrals are trapezoid sums
//! that vanish exactly off the diagonal of each mode's exponent, and only
//! radial moments need real quadrature.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{sector_of, FockBasis, MultiIndex, Parity};
use crate::specfun::quad::{angular_nodes, exp_sinh, ExpSinhRule, GaussLaguerre};
use crate::specfun::{ln_bessel_i, ln_factorial, ln_gamma, measure_density, MeasureSpec};
use crate::states::PhiSign;

/// Radial and angular rule sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureGrid {
    #[serde(default = "default_laguerre")]
    pub laguerre_order: usize,
    #[serde(default = "default_angular")]
    pub angular_order: usize,
    /// Step `2^{-level}` of the fixed exp-sinh rule used on tensor grids.
    #[serde(default = "default_level")]
    pub exp_sinh_level: u32,
}

fn default_laguerre() -> usize {
    64
}
fn default_angular() -> usize {
    64
}
fn default_level() -> u32 {
    5
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            laguerre_order: default_laguerre(),
            angular_order: default_angular(),
            exp_sinh_level: default_level(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvenOddNormalization {
    /// `(|alpha> +- |-alpha>) / 2`, the projector-normalized members.
    Projector,
    /// Unit-norm members; one mode only.
    Normalized,
}

/// State family whose frame operator is assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResolutionFamily {
    Glauber,
    PhiCat {
        phi: f64,
        sign: PhiSign,
    },
    EvenOdd {
        parity: Parity,
        #[serde(default = "default_eo_norm")]
        normalization: EvenOddNormalization,
    },
    BgSu11 {
        two_k: u32,
    },
    /// `||alpha; l>` over all `p + q` amplitudes.
    UpqAlpha {
        p: usize,
        q: usize,
        l: i64,
    },
    /// `||z; l>` with `alpha_N = 1`, over `N - 1` reduced variables.
    UpqZ {
        p: usize,
        q: usize,
        l: i64,
    },
}

fn default_eo_norm() -> EvenOddNormalization {
    EvenOddNormalization::Projector
}

impl ResolutionFamily {
    pub fn label(&self) -> String {
        match self {
            ResolutionFamily::Glauber => "glauber".into(),
            ResolutionFamily::PhiCat { phi, sign } => {
                format!("phi_cat(phi={phi},sign={})", if sign.value() > 0.0 { "+" } else { "-" })
            }
            ResolutionFamily::EvenOdd {
                parity,
                normalization,
            } => format!("even_odd({parity:?},{normalization:?})").to_lowercase(),
            ResolutionFamily::BgSu11 { two_k } => format!("bg_su11(k={})", *two_k as f64 / 2.0),
            ResolutionFamily::UpqAlpha { p, q, l } => format!("upq_alpha(p={p},q={q},l={l})"),
            ResolutionFamily::UpqZ { p, q, l } => format!("upq_z(p={p},q={q},l={l})"),
        }
    }

    /// The operator the family is expected to resolve.
    fn natural_target(&self) -> Target {
        match self {
            ResolutionFamily::EvenOdd { parity, .. } => Target::Parity { parity: *parity },
            ResolutionFamily::UpqAlpha { p, q, l } | ResolutionFamily::UpqZ { p, q, l } => {
                Target::Sector {
                    l: *l,
                    p: *p,
                    q: *q,
                }
            }
            _ => Target::Identity,
        }
    }
}

/// Expected value of the Gram matrix on the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// Whatever the family claims to resolve.
    Natural,
    Identity,
    Parity { parity: Parity },
    Sector { l: i64, p: usize, q: usize },
}

impl Target {
    fn diagonal(&self, n: &MultiIndex) -> Result<f64> {
        Ok(match self {
            Target::Natural => unreachable!("resolved before use"),
            Target::Identity => 1.0,
            Target::Parity { parity } => {
                if n.parity() == *parity {
                    1.0
                } else {
                    0.0
                }
            }
            Target::Sector { l, p, q } => {
                if sector_of(n, *p, *q)?.l == *l {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub family: String,
    pub measure: MeasureSpec,
    pub target: Target,
    pub probe: Vec<usize>,
    /// `max |G_mn - T_mn|` over the probe.
    pub gram_deviation: f64,
    pub worst_entry: (usize, usize),
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    #[serde(skip)]
    pub gram: Option<DMatrix<C64>>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

fn unscaled(measure: &MeasureSpec) -> (f64, &MeasureSpec) {
    match measure {
        MeasureSpec::Scaled { factor, inner } => {
            let (f, m) = unscaled(inner);
            (factor * f, m)
        }
        m => (1.0, m),
    }
}

fn mismatch(family: &ResolutionFamily, measure: &MeasureSpec) -> Error {
    Error::Mismatch(format!(
        "measure {} does not apply to family {}",
        measure.label(),
        family.label()
    ))
}

/// Per-mode Gaussian moment table `T(a, b) = int d^2w pi^{-1} e^{-|w|^2} w^a w*^b / sqrt(a! b!)`.
fn gaussian_table(max: u32, gl: &GaussLaguerre, angles: &[f64]) -> Vec<Vec<C64>> {
    let m = max as usize + 1;
    let angular: Vec<C64> = (0..m)
        .map(|d| {
            // (1/2pi) sum_k (2pi/M) e^{i d theta_k}
            angles
                .iter()
                .map(|&t| C64::from_polar(1.0, d as f64 * t))
                .sum::<C64>()
                / angles.len() as f64
        })
        .collect();
    let mut t = vec![vec![C64::new(0.0, 0.0); m]; m];
    for a in 0..m {
        for b in 0..m {
            let s = (a + b) as f64 / 2.0;
            let radial = gl.integrate(|x| x.powf(s));
            let norm = (-0.5 * (ln_factorial(a as u32) + ln_factorial(b as u32))).exp();
            let ang = if a >= b {
                angular[a - b]
            } else {
                angular[b - a].conj()
            };
            t[a][b] = ang * radial * norm;
        }
    }
    t
}

fn check_angular(order: usize, probe_max: u32) -> Result<()> {
    let need = 2 * probe_max as usize + 2;
    if order < need {
        return Err(Error::Mismatch(format!(
            "angular order {order} is below 2*{probe_max}+2 = {need} for this probe"
        )));
    }
    Ok(())
}

/// One-mode entry for the unit-norm even/odd members, whose extra weight
/// `2/(1 +- e^{-2|alpha|^2})` couples radius and parity.
fn normalized_even_odd_entry(gl: &GaussLaguerre, angles: &[f64], parity: Parity, a: u32, b: u32) -> C64 {
    if Parity::of(a) != parity || Parity::of(b) != parity {
        return C64::new(0.0, 0.0);
    }
    let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
    let s = (a + b) as f64 / 2.0;
    let radial = gl.integrate(|t| 2.0 / (1.0 + sign * (-2.0 * t).exp()) * t.powf(s));
    let d = a as f64 - b as f64;
    let ang = angles
        .iter()
        .map(|&t| C64::from_polar(1.0, d * t))
        .sum::<C64>()
        / angles.len() as f64;
    let norm = (-0.5 * (ln_factorial(a) + ln_factorial(b))).exp();
    ang * radial * norm
}

fn gram_gaussian(
    family: &ResolutionFamily,
    basis: &Arc<FockBasis>,
    probe: &[usize],
    grid: &QuadratureGrid,
    factor: f64,
) -> Result<(DMatrix<C64>, usize)> {
    let probe_max = probe
        .iter()
        .flat_map(|&k| basis.state(k).occupations().iter().copied())
        .max()
        .unwrap_or(0);
    check_angular(grid.angular_order, probe_max)?;
    let gl = GaussLaguerre::new(grid.laguerre_order)?;
    let angles = angular_nodes(grid.angular_order);
    let table = gaussian_table(probe_max, &gl, &angles);
    let amplitude = |n: &MultiIndex| -> Result<C64> {
        Ok(match family {
            ResolutionFamily::Glauber => C64::new(1.0, 0.0),
            ResolutionFamily::PhiCat { phi, sign } => {
                let parity = if n.total().is_multiple_of(2) { 1.0 } else { -1.0 };
                C64::from_polar(1.0, sign.value() * parity * phi)
            }
            ResolutionFamily::EvenOdd { parity, .. } => {
                // (1 +- (-1)^n) / 2
                if n.parity() == *parity {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            ResolutionFamily::UpqAlpha { p, q, l } => {
                if sector_of(n, *p, *q)?.l == *l {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            _ => unreachable!("non-Gaussian family"),
        })
    };
    let normalized_eo = match family {
        ResolutionFamily::EvenOdd {
            parity,
            normalization: EvenOddNormalization::Normalized,
        } => {
            if basis.modes() != 1 {
                return Err(Error::Mismatch(
                    "unit-norm even/odd family is only assembled for one mode".into(),
                ));
            }
            Some(*parity)
        }
        _ => None,
    };
    let g: Vec<C64> = probe
        .iter()
        .map(|&k| amplitude(basis.state(k)))
        .collect::<Result<_>>()?;
    let np = probe.len();
    let entries: Vec<C64> = (0..np * np)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / np, idx % np);
            let m = basis.state(probe[r]);
            let n = basis.state(probe[c]);
            if let Some(parity) = normalized_eo {
                return factor
                    * normalized_even_odd_entry(&gl, &angles, parity, m.get(1), n.get(1));
            }
            let mut v = g[r] * g[c].conj() * factor;
            for (a, b) in m.occupations().iter().zip(n.occupations()) {
                v *= table[*a as usize][*b as usize];
            }
            v
        })
        .collect();
    Ok((DMatrix::from_row_slice(np, np, &entries), gl.order()))
}

/// Largest radius kept on the BG radial rule; `2r` stays inside the range
/// where the Bessel series is accurate and the integrand has long vanished.
const BG_R_MAX: f64 = 350.0;

fn gram_bg(
    two_k: u32,
    measure: &MeasureSpec,
    basis: &Arc<FockBasis>,
    probe: &[usize],
    grid: &QuadratureGrid,
) -> Result<(DMatrix<C64>, usize)> {
    if basis.modes() != 1 {
        return Err(Error::OneModeOnly("BG resolution".into()));
    }
    let probe_max = probe.iter().map(|&k| basis.state(k).get(1)).max().unwrap_or(0);
    check_angular(grid.angular_order, probe_max)?;
    let angles = angular_nodes(grid.angular_order);
    let tk = two_k as f64;
    let nu = tk - 1.0;
    let np = probe.len();
    // Radial integrals R(s) = int r dr mu(r) r^{2k-1+s} / I_nu(2r), s = m + n.
    let sums: Vec<u32> = {
        let mut s: Vec<u32> = probe
            .iter()
            .flat_map(|&a| probe.iter().map(move |&b| (a + b) as u32))
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let radial: Vec<(u32, f64)> = sums
        .par_iter()
        .map(|&s| {
            let power = tk + s as f64;
            let v = exp_sinh(
                |r| {
                    if r > BG_R_MAX {
                        return 0.0;
                    }
                    let d = match measure_density(measure, &[r]) {
                        Ok(d) => d,
                        Err(_) => return f64::NAN,
                    };
                    let ln_i = ln_bessel_i(nu, 2.0 * r).unwrap_or(f64::NAN);
                    d * (power * r.ln() - ln_i).exp()
                },
                1e-13,
            )?;
            Ok((s, v))
        })
        .collect::<Result<_>>()?;
    let lookup = |s: u32| radial.iter().find(|(t, _)| *t == s).map(|(_, v)| *v).unwrap_or(0.0);
    let norm = |n: u32| -> Result<f64> {
        Ok((-0.5 * (ln_factorial(n) + ln_gamma(tk + n as f64)?)).exp())
    };
    let mut g = DMatrix::<C64>::zeros(np, np);
    for (r, &a) in probe.iter().enumerate() {
        for (c, &b) in probe.iter().enumerate() {
            let (a, b) = (a as u32, b as u32);
            let d = a as i64 - b as i64;
            let ang: C64 = angles
                .iter()
                .map(|&t| C64::from_polar(1.0, d as f64 * t))
                .sum::<C64>()
                * (2.0 * PI / angles.len() as f64);
            g[(r, c)] = ang * lookup(a + b) * norm(a)? * norm(b)?;
        }
    }
    let nodes = ExpSinhRule::new(10, 0.0, BG_R_MAX).len();
    Ok((g, nodes))
}

fn gram_upq_z(
    p: usize,
    q: usize,
    l: i64,
    measure: &MeasureSpec,
    basis: &Arc<FockBasis>,
    probe: &[usize],
    grid: &QuadratureGrid,
) -> Result<(DMatrix<C64>, usize)> {
    let n_modes = p + q;
    if basis.modes() != n_modes {
        return Err(Error::InvalidSplit {
            p,
            q,
            modes: basis.modes(),
        });
    }
    let dims = n_modes - 1;
    if measure.dims() != dims {
        return Err(Error::Mismatch(format!(
            "{} takes {} coordinates, the reduced family has {dims}",
            measure.label(),
            measure.dims()
        )));
    }
    let probe_max = probe
        .iter()
        .flat_map(|&k| basis.state(k).occupations()[..dims].to_vec())
        .max()
        .unwrap_or(0);
    check_angular(grid.angular_order, probe_max)?;
    let angles = angular_nodes(grid.angular_order);
    let rule = ExpSinhRule::new(grid.exp_sinh_level, 1e-12, 60.0);
    let nr = rule.len();
    // Density on the tensor grid, row-major in the radial index of each variable.
    let total = nr.pow(dims as u32);
    let density: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut point = vec![0.0; dims];
            let mut w = 1.0;
            for d in (0..dims).rev() {
                let i = rest % nr;
                rest /= nr;
                point[d] = rule.nodes[i];
                w *= rule.weights[i] * rule.nodes[i];
            }
            Ok(w * measure_density(measure, &point)?)
        })
        .collect::<Result<_>>()?;
    let angular_factor = |d: i64| -> C64 {
        angles
            .iter()
            .map(|&t| C64::from_polar(1.0, d as f64 * t))
            .sum::<C64>()
            * (2.0 * PI / angles.len() as f64)
    };
    let amplitude_norm = |n: &MultiIndex| -> f64 {
        let s: f64 = n.occupations().iter().map(|&m| ln_factorial(m)).sum();
        (-0.5 * s).exp()
    };
    let np = probe.len();
    let entries: Vec<C64> = (0..np * np)
        .into_par_iter()
        .map(|idx| {
            let m = basis.state(probe[idx / np]);
            let n = basis.state(probe[idx % np]);
            let in_sector = |x: &MultiIndex| sector_of(x, p, q).map(|s| s.l == l).unwrap_or(false);
            if !in_sector(m) || !in_sector(n) {
                return C64::new(0.0, 0.0);
            }
            let mut ang = C64::new(1.0, 0.0);
            for d in 0..dims {
                ang *= angular_factor(m.get(d + 1) as i64 - n.get(d + 1) as i64);
            }
            if ang.norm() == 0.0 {
                return ang;
            }
            let mut radial = 0.0;
            for (idx2, dens) in density.iter().enumerate() {
                let mut rest = idx2;
                let mut mono = 1.0;
                for d in (0..dims).rev() {
                    let i = rest % nr;
                    rest /= nr;
                    mono *= rule.nodes[i].powi((m.get(d + 1) + n.get(d + 1)) as i32);
                }
                radial += dens * mono;
            }
            ang * radial * amplitude_norm(m) * amplitude_norm(n)
        })
        .collect();
    Ok((DMatrix::from_row_slice(np, np, &entries), nr))
}

/// Assembles the frame operator of `family` under `measure` on the probe
/// states and compares it to `target`.
pub fn resolve_identity(
    family: &ResolutionFamily,
    measure: &MeasureSpec,
    basis: &Arc<FockBasis>,
    probe: &[usize],
    grid: &QuadratureGrid,
    target: Target,
) -> Result<ResolutionReport> {
    let start = Instant::now();
    if probe.is_empty() {
        return Err(Error::Mismatch("empty probe".into()));
    }
    if let Some(&bad) = probe.iter().find(|&&k| k >= basis.len()) {
        return Err(Error::Mismatch(format!(
            "probe ordinal {bad} outside a basis of {} states",
            basis.len()
        )));
    }
    let target = match target {
        Target::Natural => family.natural_target(),
        t => t,
    };
    let (factor, base) = unscaled(measure);
    let modes = basis.modes();
    let (gram, radial_nodes) = match family {
        ResolutionFamily::Glauber
        | ResolutionFamily::PhiCat { .. }
        | ResolutionFamily::EvenOdd { .. }
        | ResolutionFamily::UpqAlpha { .. } => {
            let ok = match (family, base) {
                (ResolutionFamily::UpqAlpha { p, q, .. }, MeasureSpec::UpqAlpha { p: mp, q: mq }) => {
                    p == mp && q == mq && p + q == modes
                }
                (ResolutionFamily::UpqAlpha { .. }, _) => false,
                (_, MeasureSpec::GaussianGlauber { modes: m }) => *m == modes,
                _ => false,
            };
            if !ok {
                return Err(mismatch(family, measure));
            }
            if let ResolutionFamily::UpqAlpha { p, q, .. } = family {
                if p + q != modes {
                    return Err(Error::InvalidSplit {
                        p: *p,
                        q: *q,
                        modes,
                    });
                }
            }
            gram_gaussian(family, basis, probe, grid, factor)?
        }
        ResolutionFamily::BgSu11 { two_k } => {
            match base {
                MeasureSpec::BgSu11 { .. } | MeasureSpec::FujiiK { .. } => {}
                _ => return Err(mismatch(family, measure)),
            }
            gram_bg(*two_k, measure, basis, probe, grid)?
        }
        ResolutionFamily::UpqZ { p, q, l } => {
            match base {
                MeasureSpec::UpqZ { .. }
                | MeasureSpec::UpqZAsPrinted { .. }
                | MeasureSpec::FujiiK { .. } => {}
                _ => return Err(mismatch(family, measure)),
            }
            gram_upq_z(*p, *q, *l, measure, basis, probe, grid)?
        }
    };
    let np = probe.len();
    let mut deviation = 0.0f64;
    let mut worst = (probe[0], probe[0]);
    let mut herm = 0.0f64;
    for r in 0..np {
        for c in 0..np {
            let want = if r == c {
                target.diagonal(basis.state(probe[r]))?
            } else {
                0.0
            };
            let d = (gram[(r, c)] - C64::new(want, 0.0)).norm();
            if d > deviation {
                deviation = d;
                worst = (probe[r], probe[c]);
            }
            herm = herm.max((gram[(r, c)] - gram[(c, r)].conj()).norm());
        }
    }
    let hermitian = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = hermitian
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(ResolutionReport {
        family: family.label(),
        measure: measure.clone(),
        target,
        probe: probe.to_vec(),
        gram_deviation: deviation,
        worst_entry: worst,
        hermiticity_deviation: herm,
        min_eigenvalue,
        radial_nodes,
        angular_nodes: grid.angular_order,
        gram: Some(gram),
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One degree tuple of a moment comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub degrees: Vec<u32>,
    pub moment_a: f64,
    pub moment_b: f64,
    pub difference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub density_a: MeasureSpec,
    pub density_b: MeasureSpec,
    pub rows: Vec<MomentRow>,
    /// `(max ratio - min ratio) / |mean ratio|`.
    pub ratio_spread: f64,
}

fn moment(spec: &MeasureSpec, degrees: &[u32], level: u32) -> Result<f64> {
    let d = spec.dims();
    if degrees.len() != d {
        return Err(Error::Mismatch(format!(
            "{} takes {d} degrees, got {}",
            spec.label(),
            degrees.len()
        )));
    }
    let diverged = |e: Error| match e {
        Error::Quadrature(msg) => Error::Divergent(format!("moment {degrees:?} of {}: {msg}", spec.label())),
        other => other,
    };
    if d == 1 {
        let n = degrees[0] as f64;
        return exp_sinh(
            |r| match measure_density(spec, &[r]) {
                Ok(0.0) => 0.0,
                Ok(v) => (v.ln() + (n + 1.0) * r.ln()).exp(),
                Err(_) => f64::NAN,
            },
            1e-12,
        )
        .map_err(diverged);
    }
    let rule = ExpSinhRule::new(level, 1e-12, 60.0);
    let nr = rule.len();
    let total = nr.pow(d as u32);
    let parts: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut point = vec![0.0; d];
            let mut w = 1.0;
            for k in (0..d).rev() {
                let i = rest % nr;
                rest /= nr;
                point[k] = rule.nodes[i];
                w *= rule.weights[i] * rule.nodes[i].powi(degrees[k] as i32 + 1);
            }
            Ok(w * measure_density(spec, &point)?)
        })
        .collect::<Result<_>>()?;
    let s: f64 = parts.iter().sum();
    if !s.is_finite() {
        return Err(Error::Divergent(format!("moment {degrees:?} of {}", spec.label())));
    }
    Ok(s)
}

/// Radial moments `int prod_i r_i^{n_i} r_i dr_i F(r)` of two densities.
/// One-variable moments use adaptive exp-sinh; more variables use a fixed
/// exp-sinh tensor rule at `level`.
pub fn measure_uniqueness_probe(
    density_a: &MeasureSpec,
    density_b: &MeasureSpec,
    degrees: &[Vec<u32>],
    level: u32,
) -> Result<UniquenessReport> {
    if density_a.dims() != density_b.dims() {
        return Err(Error::Mismatch(format!(
            "{} and {} live on different radial domains",
            density_a.label(),
            density_b.label()
        )));
    }
    let mut rows = Vec::with_capacity(degrees.len());
    for deg in degrees {
        let a = moment(density_a, deg, level)?;
        let b = if density_a == density_b {
            a
        } else {
            moment(density_b, deg, level)?
        };
        rows.push(MomentRow {
            degrees: deg.clone(),
            moment_a: a,
            moment_b: b,
            difference: a - b,
            ratio: a / b,
        });
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    Ok(UniquenessReport {
        density_a: density_a.clone(),
        density_b: density_b.clone(),
        rows,
        ratio_spread: if ratios.is_empty() { 0.0 } else { (max - min) / mean.abs() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn glauber_resolves_identity() {
        let b = FockBasis::new(1, 20).unwrap();
        let r = resolve_identity(
            &ResolutionFamily::Glauber,
            &MeasureSpec::GaussianGlauber { modes: 1 },
            &b,
            &first(15),
            &QuadratureGrid::default(),
            Target::Natural,
        )
        .unwrap();
        assert!(r.gram_deviation < 1e-10, "{}", r.gram_deviation);
        assert!(r.min_eigenvalue > -1e-12);
    }

    #[test]
    fn even_family_resolves_only_its_parity() {
        let b = FockBasis::new(1, 10).unwrap();
        let fam = ResolutionFamily::EvenOdd {
            parity: Parity::Even,
            normalization: EvenOddNormalization::Projector,
        };
        let m = MeasureSpec::GaussianGlauber { modes: 1 };
        let grid = QuadratureGrid::default();
        let ok = resolve_identity(&fam, &m, &b, &first(8), &grid, Target::Natural).unwrap();
        assert!(ok.gram_deviation < 1e-10);
        let bad = resolve_identity(&fam, &m, &b, &[0, 1], &grid, Target::Identity).unwrap();
        assert!((bad.gram_deviation - 1.0).abs() < 1e-12);
        assert_eq!(bad.worst_entry, (1, 1));
    }

    #[test]
    fn normalized_even_members_do_not_resolve() {
        let b = FockBasis::new(1, 10).unwrap();
        let fam = ResolutionFamily::EvenOdd {
            parity: Parity::Even,
            normalization: EvenOddNormalization::Normalized,
        };
        let r = resolve_identity(
            &fam,
            &MeasureSpec::GaussianGlauber { modes: 1 },
            &b,
            &first(6),
            &QuadratureGrid::default(),
            Target::Natural,
        )
        .unwrap();
        assert!(r.gram_deviation > 0.1);
    }

    #[test]
    fn mismatch_and_angular_errors() {
        let b = FockBasis::new(1, 40).unwrap();
        let grid = QuadratureGrid {
            angular_order: 8,
            ..QuadratureGrid::default()
        };
        assert!(resolve_identity(
            &ResolutionFamily::Glauber,
            &MeasureSpec::GaussianGlauber { modes: 1 },
            &b,
            &first(10),
            &grid,
            Target::Natural
        )
        .is_err());
        assert!(resolve_identity(
            &ResolutionFamily::Glauber,
            &MeasureSpec::BgSu11 { two_k: 1 },
            &b,
            &first(3),
            &QuadratureGrid::default(),
            Target::Natural
        )
        .is_err());
    }

    #[test]
    fn bg_half_resolves_ladder() {
        let b = FockBasis::new(1, 8).unwrap();
        let r = resolve_identity(
            &ResolutionFamily::BgSu11 { two_k: 1 },
            &MeasureSpec::BgSu11 { two_k: 1 },
            &b,
            &first(9),
            &QuadratureGrid::default(),
            Target::Natural,
        )
        .unwrap();
        assert!(r.gram_deviation < 1e-8, "{}", r.gram_deviation);
    }

    #[test]
    fn upq_z_resolves_sector() {
        // p = q = 1, l = 1: reduced density with exponent t^{-l-1}.
        let b = FockBasis::new(2, 12).unwrap();
        let probe: Vec<usize> = (0..b.len())
            .filter(|&k| b.state(k).total() <= 7)
            .collect();
        let r = resolve_identity(
            &ResolutionFamily::UpqZ { p: 1, q: 1, l: 1 },
            &MeasureSpec::UpqZ { l: 1, p: 1, q: 1 },
            &b,
            &probe,
            &QuadratureGrid::default(),
            Target::Natural,
        )
        .unwrap();
        assert!(r.gram_deviation < 1e-6, "{}", r.gram_deviation);
        let printed = resolve_identity(
            &ResolutionFamily::UpqZ { p: 1, q: 1, l: 1 },
            &MeasureSpec::UpqZAsPrinted { l: 1, p: 1, q: 1 },
            &b,
            &probe,
            &QuadratureGrid::default(),
            Target::Natural,
        )
        .unwrap();
        assert!(printed.gram_deviation > 0.1);
    }

    #[test]
    fn uniqueness_probe_linear_and_trivial() {
        let f = MeasureSpec::UpqZ { l: -2, p: 1, q: 1 };
        let degrees: Vec<Vec<u32>> = (0..6).map(|n| vec![2 * n]).collect();
        let same = measure_uniqueness_probe(&f, &f, &degrees, 5).unwrap();
        assert!(same.rows.iter().all(|r| r.difference == 0.0));
        let twice = MeasureSpec::Scaled {
            factor: 2.0,
            inner: Box::new(f.clone()),
        };
        let r = measure_uniqueness_probe(&twice, &f, &degrees, 5).unwrap();
        for row in &r.rows {
            assert!((row.ratio - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn upq_z_matches_fujii_with_shifted_label() {
        let degrees: Vec<Vec<u32>> = (0..6).map(|n| vec![2 * n]).collect();
        let r = measure_uniqueness_probe(
            &MeasureSpec::UpqZ { l: -2, p: 1, q: 1 },
            &MeasureSpec::FujiiK { l: -3, p: 1 },
            &degrees,
            5,
        )
        .unwrap();
        assert!(r.ratio_spread < 1e-6, "{}", r.ratio_spread);
        assert!((r.rows[0].ratio - PI).abs() < 1e-8);
    }
}
