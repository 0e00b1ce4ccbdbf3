//! Coherent-state families on a truncated Fock basis.
//!
//! Raw constructors follow the literal coefficient formulas, including their
//! relative phases. Each state's truncation-loss accumulator carries an upper
//! bound on the probability weight the cutoff removed.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_tail_bound, inner_product, sector_of, FockBasis, StateVector};
use crate::specfun::{bessel_i_entire, ln_bessel_i, ln_factorial, ln_gamma};

/// Default ceiling on the coherent tail a constructor accepts.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Tolerance on the cat normalization condition.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

fn check_alpha(basis: &FockBasis, alpha: &[C64]) -> Result<()> {
    if alpha.len() != basis.modes() {
        return Err(Error::AlphaLength {
            got: alpha.len(),
            expected: basis.modes(),
        });
    }
    Ok(())
}

/// Smallest cutoff whose coherent tail is at most `tolerance`.
pub fn required_cutoff(alpha: &[C64], tolerance: f64) -> u32 {
    let mut c = 0u32;
    while coherent_tail_bound(alpha, c) > tolerance && c < 100_000 {
        c += 1;
    }
    c
}

fn check_tail(alpha: &[C64], cutoff: u32, tolerance: f64) -> Result<f64> {
    let tail = coherent_tail_bound(alpha, cutoff);
    if tail > tolerance {
        return Err(Error::TailTooLarge {
            tail,
            cutoff,
            tolerance,
            required: required_cutoff(alpha, tolerance),
        });
    }
    Ok(tail)
}

/// `prod_i alpha_i^{n_i} / sqrt(n_i!)` in log-polar form; `None` when a zero
/// amplitude is raised to a positive power.
fn monomial(alpha: &[C64], occ: &[u32]) -> Option<C64> {
    let mut ln_mag = 0.0;
    let mut phase = 0.0;
    for (a, &n) in alpha.iter().zip(occ) {
        if n == 0 {
            continue;
        }
        if *a == C64::new(0.0, 0.0) {
            return None;
        }
        ln_mag += n as f64 * a.norm().ln() - 0.5 * ln_factorial(n);
        phase += n as f64 * a.arg();
    }
    Some(C64::from_polar(ln_mag.exp(), phase))
}

fn coherent_with<F: Fn(u32) -> C64>(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    factor: F,
) -> StateVector {
    let lambda: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let prefactor = (-0.5 * lambda).exp();
    let mut v = StateVector::zero(basis);
    for (k, n) in basis.states().iter().enumerate() {
        if let Some(m) = monomial(alpha, n.occupations()) {
            v.add_at(k, m * prefactor * factor(n.total()));
        }
    }
    v
}

/// Truncated multimode Glauber state `e^{-|alpha|^2/2} sum prod alpha_i^{n_i}/sqrt(n_i!) |n>`.
///
/// Fails with the required cutoff when the tail exceeds `tolerance`; pass
/// `f64::INFINITY` to force construction.
pub fn glauber_cs(basis: &Arc<FockBasis>, alpha: &[C64], tolerance: f64) -> Result<StateVector> {
    check_alpha(basis, alpha)?;
    let tail = check_tail(alpha, basis.cutoff(), tolerance)?;
    let mut v = coherent_with(basis, alpha, |_| C64::new(1.0, 0.0));
    v.add_loss(tail);
    Ok(v)
}

/// Coefficients of `C+ |alpha> + C- |-alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatParams {
    pub c_plus: C64,
    pub c_minus: C64,
}

impl CatParams {
    pub fn new(c_plus: C64, c_minus: C64) -> Self {
        CatParams { c_plus, c_minus }
    }

    /// Normalized even state, `C- = C+`.
    pub fn even(alpha: &[C64]) -> Self {
        let c = (2.0 * (1.0 + overlap_minus(alpha))).sqrt().recip();
        CatParams::new(C64::new(c, 0.0), C64::new(c, 0.0))
    }

    /// Normalized odd state, `C- = -C+`.
    pub fn odd(alpha: &[C64]) -> Self {
        let c = (2.0 * (1.0 - overlap_minus(alpha))).sqrt().recip();
        CatParams::new(C64::new(c, 0.0), C64::new(-c, 0.0))
    }

    /// `C+ = cos phi`, `C- = +-i sin phi`.
    pub fn phi(phi: f64, sign: PhiSign) -> Self {
        let s = sign.value();
        CatParams::new(C64::new(phi.cos(), 0.0), C64::new(0.0, s * phi.sin()))
    }

    /// `|C+|^2 + |C-|^2 + 2 Re(C- C+^*) <alpha|-alpha> - 1`.
    pub fn normalization_residual(&self, alpha: &[C64]) -> f64 {
        let cross = (self.c_minus * self.c_plus.conj()).re;
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr() + 2.0 * cross * overlap_minus(alpha)
            - 1.0
    }

    fn parity_factor(&self, total: u32) -> C64 {
        if total.is_multiple_of(2) {
            self.c_plus + self.c_minus
        } else {
            self.c_plus - self.c_minus
        }
    }
}

/// `<alpha|-alpha> = e^{-2|alpha|^2}`.
pub fn overlap_minus(alpha: &[C64]) -> f64 {
    (-2.0 * alpha.iter().map(|a| a.norm_sqr()).sum::<f64>()).exp()
}

/// `C+ |alpha> + C- |-alpha>` without the normalization check.
pub fn cat_superposition(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    params: CatParams,
    tolerance: f64,
) -> Result<StateVector> {
    check_alpha(basis, alpha)?;
    let tail = check_tail(alpha, basis.cutoff(), tolerance)?;
    let mut v = coherent_with(basis, alpha, |n| params.parity_factor(n));
    let reach = params.c_plus.norm() + params.c_minus.norm();
    v.add_loss(reach * reach * tail);
    Ok(v)
}

/// Multimode cat `C+ |alpha> + C- |-alpha>`; the coefficients must satisfy
/// the normalization condition to 1e-9.
pub fn multimode_cat(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    params: CatParams,
    tolerance: f64,
) -> Result<StateVector> {
    let residual = params.normalization_residual(alpha);
    if !(residual.abs() <= NORMALIZATION_TOLERANCE) {
        return Err(Error::Normalization { residual });
    }
    cat_superposition(basis, alpha, params, tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl PhiSign {
    pub fn value(self) -> f64 {
        match self {
            PhiSign::Plus => 1.0,
            PhiSign::Minus => -1.0,
        }
    }
}

/// `cos phi |alpha> +- i sin phi |-alpha>`, built from the direct expansion
/// with amplitude factor `e^{+-i (-1)^{n_tot} phi}`.
///
/// At `phi = pi/2` with sign `+` this is `i |-alpha>`; no global phase is removed.
pub fn phi_cat(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    phi: f64,
    sign: PhiSign,
    tolerance: f64,
) -> Result<StateVector> {
    check_alpha(basis, alpha)?;
    let tail = check_tail(alpha, basis.cutoff(), tolerance)?;
    let s = sign.value();
    let mut v = coherent_with(basis, alpha, |n| {
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        C64::from_polar(1.0, s * parity * phi)
    });
    v.add_loss(tail);
    Ok(v)
}

/// The same state as a superposition of two Glauber states.
pub fn phi_cat_superposition(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    phi: f64,
    sign: PhiSign,
    tolerance: f64,
) -> Result<StateVector> {
    let plus = glauber_cs(basis, alpha, tolerance)?;
    let neg: Vec<C64> = alpha.iter().map(|a| -a).collect();
    let minus = glauber_cs(basis, &neg, tolerance)?;
    let p = CatParams::phi(phi, sign);
    plus.scaled(p.c_plus).axpy(p.c_minus, &minus)
}

/// Discrete-series su(1,1) state `|z;k>` over the abstract ladder `|n+k,k>`,
/// stored on a one-mode basis with ordinal `n`.
///
/// Coefficients are `z^{k-1/2} z^n / sqrt(I_{2k-1}(2|z|) n! Gamma(2k+n))`
/// with principal powers. The accumulator holds the exact missing weight.
pub fn bg_su11_cs(basis: &Arc<FockBasis>, two_k: u32, z: C64) -> Result<StateVector> {
    if two_k == 0 {
        return Err(Error::InvalidBargmannIndex(two_k));
    }
    if basis.modes() != 1 {
        return Err(Error::OneModeOnly("bg_su11_cs".into()));
    }
    let mut v = StateVector::zero(basis);
    if z == C64::new(0.0, 0.0) {
        v.add_at(0, C64::new(1.0, 0.0));
        return Ok(v);
    }
    let tk = two_k as f64;
    let r = z.norm();
    let theta = z.arg();
    let ln_norm = ln_bessel_i(tk - 1.0, 2.0 * r)?;
    let head = 0.5 * (tk - 1.0);
    let mut kept = 0.0;
    for n in 0..=basis.cutoff() {
        let nf = n as f64;
        let ln_mag = (head + nf) * r.ln()
            - 0.5 * (ln_norm + ln_factorial(n) + ln_gamma(tk + nf)?);
        let amp = C64::from_polar(ln_mag.exp(), (head + nf) * theta);
        kept += amp.norm_sqr();
        v.add_at(n as usize, amp);
    }
    v.add_loss((1.0 - kept).max(0.0));
    Ok(v)
}

/// Closed-form `<z1;k|z2;k>`.
///
/// Evaluated as `conj(z1^{k-1/2}) z2^{k-1/2} I~(z1^* z2) / sqrt(I(2|z1|) I(2|z2|))`
/// with `I~(u) = sum u^n / (n! Gamma(2k+n))` and principal powers. This equals
/// `I_{2k-1}(2 sqrt(z1^* z2)) / sqrt(I(2|z1|) I(2|z2|))` up to the sign that the
/// branch of the square root introduces for half-integer `2k-1`.
pub fn bg_overlap_closed_form(two_k: u32, z1: C64, z2: C64) -> Result<C64> {
    if two_k == 0 {
        return Err(Error::InvalidBargmannIndex(two_k));
    }
    if z1 == z2 {
        return Ok(C64::new(1.0, 0.0));
    }
    let nu = two_k as f64 - 1.0;
    let head = 0.5 * nu;
    let (r1, r2) = (z1.norm(), z2.norm());
    let entire = bessel_i_entire(nu, z1.conj() * z2)?;
    // |z|^{k-1/2} / sqrt(I(2|z|)) -> 1/sqrt(I~(0)) = sqrt(Gamma(2k)) at z = 0.
    let weight = |r: f64, theta: f64| -> Result<C64> {
        if r == 0.0 {
            return Ok(C64::new((0.5 * ln_gamma(nu + 1.0)?).exp(), 0.0));
        }
        let ln_mag = head * r.ln() - 0.5 * ln_bessel_i(nu, 2.0 * r)?;
        Ok(C64::from_polar(ln_mag.exp(), head * theta))
    };
    let w1 = weight(r1, z1.arg())?;
    let w2 = weight(r2, z2.arg())?;
    Ok(w1.conj() * w2 * entire)
}

/// Sector state `||alpha; l>` of u(p,q) together with its kept and exact norms.
#[derive(Debug, Clone)]
pub struct UpqState {
    pub state: StateVector,
    /// `sum |amplitude|^2` over the truncated support.
    pub norm_sqr: f64,
    /// Untruncated `||alpha;l>` norm squared.
    pub exact_norm_sqr: f64,
}

/// `sum_{m} A^m B^{m-l} / (m! (m-l)!)` summed to convergence, the exact
/// norm squared of a sector state with `A = sum_{a<=p} |alpha_a|^2`,
/// `B = sum_{m>p} |alpha_m|^2`.
fn sector_norm_sqr(a: f64, b: f64, l: i64) -> f64 {
    // Reduce to l >= 0 by swapping the roles of the two blocks.
    let (a, b, l) = if l < 0 { (b, a, -l) } else { (a, b, l) };
    let l = l as u32;
    if a == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if b == 0.0 {
        return (l as f64 * a.ln() - ln_factorial(l)).exp();
    }
    let mut sum = 0.0;
    let mut m = l;
    let mut prev_max = f64::NEG_INFINITY;
    loop {
        let ln_t = m as f64 * a.ln() + (m - l) as f64 * b.ln() - ln_factorial(m)
            - ln_factorial(m - l);
        let t = ln_t.exp();
        sum += t;
        if ln_t < prev_max && t <= 1e-18 * sum {
            break;
        }
        prev_max = prev_max.max(ln_t);
        m += 1;
        if m > 100_000 {
            break;
        }
    }
    sum
}

/// Non-normalized sector state `sum_{n: l(n) = l} prod alpha_i^{n_i}/sqrt(n_i!) |n>`.
///
/// The q-block sum excluding the last mode fixes `n_N = n_p - n'_q - l`; the
/// state is the restriction of the unnormalized Glauber expansion to sector `l`.
pub fn upq_bg_cs(
    basis: &Arc<FockBasis>,
    p: usize,
    q: usize,
    l: i64,
    alpha: &[C64],
) -> Result<UpqState> {
    check_alpha(basis, alpha)?;
    if p == 0 || q == 0 || p + q != basis.modes() {
        return Err(Error::InvalidSplit {
            p,
            q,
            modes: basis.modes(),
        });
    }
    if l.unsigned_abs() > basis.cutoff() as u64 {
        return Err(Error::InfeasibleSector {
            l,
            p,
            q,
            cutoff: basis.cutoff(),
        });
    }
    let mut v = StateVector::zero(basis);
    for (k, n) in basis.states().iter().enumerate() {
        if sector_of(n, p, q)?.l != l {
            continue;
        }
        if let Some(m) = monomial(alpha, n.occupations()) {
            v.add_at(k, m);
        }
    }
    let a: f64 = alpha[..p].iter().map(|x| x.norm_sqr()).sum();
    let b: f64 = alpha[p..].iter().map(|x| x.norm_sqr()).sum();
    let exact = sector_norm_sqr(a, b, l);
    let kept = v.norm_sqr();
    v.add_loss((exact - kept).max(0.0));
    Ok(UpqState {
        state: v,
        norm_sqr: kept,
        exact_norm_sqr: exact,
    })
}

/// Reduced parameters `z_b = alpha_b alpha_N` (b <= p), `z_m = alpha_m / alpha_N`
/// (p < m < N).
pub fn upq_reduce(alpha: &[C64], p: usize) -> Result<Vec<C64>> {
    let reference = *alpha.last().ok_or(Error::ZeroModes)?;
    if reference == C64::new(0.0, 0.0) {
        return Err(Error::ZeroReference);
    }
    let n = alpha.len();
    Ok(alpha[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &a)| if i < p { a * reference } else { a / reference })
        .collect())
}

/// Full amplitudes with `alpha_N = 1` for reduced parameters `z`.
pub fn upq_expand(z: &[C64]) -> Vec<C64> {
    let mut alpha = z.to_vec();
    alpha.push(C64::new(1.0, 0.0));
    alpha
}

/// Sector state from reduced parameters: `||alpha;l> = alpha_N^{-l} ||z;l>`,
/// and this returns `||z;l>`.
pub fn upq_bg_cs_reduced(
    basis: &Arc<FockBasis>,
    p: usize,
    q: usize,
    l: i64,
    z: &[C64],
) -> Result<UpqState> {
    upq_bg_cs(basis, p, q, l, &upq_expand(z))
}

/// Which sp(N,C) coherent state the squared-amplitude cat superposes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SquaredUnderlying {
    Glauber,
    Cat { c_plus: C64, c_minus: C64 },
    Phi { phi: f64, sign: PhiSign },
}

fn underlying_state(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    which: SquaredUnderlying,
    tolerance: f64,
) -> Result<StateVector> {
    match which {
        SquaredUnderlying::Glauber => glauber_cs(basis, alpha, tolerance),
        SquaredUnderlying::Cat { c_plus, c_minus } => {
            multimode_cat(basis, alpha, CatParams::new(c_plus, c_minus), tolerance)
        }
        SquaredUnderlying::Phi { phi, sign } => phi_cat(basis, alpha, phi, sign, tolerance),
    }
}

/// `D+ |s(alpha)> + D- |s(i alpha)>`: `z_kl = alpha_k alpha_l` and
/// `-z_kl = (i alpha_k)(i alpha_l)`. The D-normalization uses the numerical
/// overlap of the two branches and must hold to 1e-9.
pub fn squared_amp_cat(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    which: SquaredUnderlying,
    d_plus: C64,
    d_minus: C64,
    tolerance: f64,
) -> Result<StateVector> {
    let (plus, minus) = squared_branches(basis, alpha, which, tolerance)?;
    let overlap = inner_product(&plus, &minus)?;
    let residual = d_plus.norm_sqr() + d_minus.norm_sqr()
        + 2.0 * (d_minus * d_plus.conj() * overlap).re
        - 1.0;
    if !(residual.abs() <= NORMALIZATION_TOLERANCE) {
        return Err(Error::Normalization { residual });
    }
    plus.scaled(d_plus).axpy(d_minus, &minus)
}

fn squared_branches(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    which: SquaredUnderlying,
    tolerance: f64,
) -> Result<(StateVector, StateVector)> {
    let rotated: Vec<C64> = alpha.iter().map(|a| a * C64::new(0.0, 1.0)).collect();
    Ok((
        underlying_state(basis, alpha, which, tolerance)?,
        underlying_state(basis, &rotated, which, tolerance)?,
    ))
}

/// Equal `D+ = D-`, real and positive, chosen to satisfy the normalization.
pub fn balanced_d(
    basis: &Arc<FockBasis>,
    alpha: &[C64],
    which: SquaredUnderlying,
    tolerance: f64,
) -> Result<C64> {
    let (plus, minus) = squared_branches(basis, alpha, which, tolerance)?;
    let overlap = inner_product(&plus, &minus)?;
    let denom = 2.0 + 2.0 * overlap.re;
    if !(denom > 0.0) {
        return Err(Error::Normalization { residual: -1.0 });
    }
    Ok(C64::new(denom.sqrt().recip(), 0.0))
}
