//! Property checks: eigenvalue residuals, factorization of `z_ij`, variance
//! equality, differential representations, resolution of unity and sector
//! structure.

mod resolution;
mod sectors;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{apply_generator, GeneratorSpec};
use crate::error::{Error, Result};
use crate::fock::{coherent_tail_bound, inner_product, FockBasis, StateVector};
use crate::specfun::{ln_factorial, ln_gamma};

pub use resolution::{
    measure_uniqueness_probe, resolve_identity, EvenOddNormalization, MomentRow,
    QuadratureGrid, ResolutionFamily, ResolutionReport, Target, UniquenessReport,
};
pub use sectors::{
    glauber_reconstruction_check, sector_orthogonality_check, sector_structure_check,
    SectorDiagonal, SectorReport,
};

/// How a check participates in the pass/fail verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// `pass` iff `residual <= tolerance + truncation_budget`.
    Asserting,
    /// The property is expected to fail; `pass` iff `residual >= tolerance`.
    NegativeControl,
    /// Reported only; never fails a run.
    ProbeOnly,
}

/// Result of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub parameters: Value,
    pub residual: f64,
    pub tolerance: f64,
    pub truncation_budget: f64,
    pub mode: CheckMode,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn asserting(
        check: &str,
        parameters: Value,
        residual: f64,
        tolerance: f64,
        truncation_budget: f64,
    ) -> Self {
        // Adding zero turns a negative zero into a positive one.
        let residual = residual + 0.0;
        VerificationReport {
            check: check.to_string(),
            parameters,
            residual,
            tolerance,
            truncation_budget,
            mode: CheckMode::Asserting,
            pass: residual <= tolerance + truncation_budget,
            notes: Vec::new(),
        }
    }

    /// `deviation` must reach at least `min_deviation`.
    pub fn negative_control(check: &str, parameters: Value, deviation: f64, min_deviation: f64) -> Self {
        // Adding zero turns a negative zero into a positive one.
        let deviation = deviation + 0.0;
        VerificationReport {
            check: check.to_string(),
            parameters,
            residual: deviation,
            tolerance: min_deviation,
            truncation_budget: 0.0,
            mode: CheckMode::NegativeControl,
            pass: deviation >= min_deviation,
            notes: Vec::new(),
        }
    }

    pub fn probe(check: &str, parameters: Value, value: f64) -> Self {
        // Adding zero turns a negative zero into a positive one.
        let value = value + 0.0;
        VerificationReport {
            check: check.to_string(),
            parameters,
            residual: value,
            tolerance: 0.0,
            truncation_budget: 0.0,
            mode: CheckMode::ProbeOnly,
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// True unless an asserting or negative-control check failed.
    pub fn counts_as_pass(&self) -> bool {
        self.mode == CheckMode::ProbeOnly || self.pass
    }
}

/// `||op psi - lambda psi||` and the weight `op` dropped at the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    pub residual: f64,
    pub op_truncation_loss: f64,
}

pub fn eigen_residual(op: &GeneratorSpec, state: &StateVector, eigenvalue: C64) -> Result<EigenResidual> {
    let image = apply_generator(op, state)?;
    let residual = image.sub(&state.scaled(eigenvalue))?.norm();
    Ok(EigenResidual {
        residual,
        op_truncation_loss: image.truncation_loss(),
    })
}

/// Analytic bound on `||O psi - lambda psi||` for a truncated Gaussian-type
/// state when `O` lowers `n_tot` by `degree`: only the shells above
/// `cutoff - degree` miss their preimage, so the residual is
/// `|lambda| ||P psi||` with `||P psi||^2 <= reach^2 tail(alpha, cutoff - degree)`.
/// `reach` bounds the modulus of the per-shell amplitude factor.
pub fn eigen_budget(alpha: &[C64], cutoff: u32, degree: u32, eigenvalue: C64, reach: f64) -> f64 {
    let from = cutoff.saturating_sub(degree);
    eigenvalue.norm() * reach * coherent_tail_bound(alpha, from).sqrt()
}

/// Outcome of recovering `alpha` from `z_ij = alpha_i alpha_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Factorization {
    /// `alpha` in the gauge where the first nonzero entry is the principal
    /// square root of its diagonal element; `-alpha` gives the same `z`.
    Factorized {
        alpha: Vec<C64>,
        max_error: f64,
        gauge: String,
    },
    /// Worst violated `z_ij z_kl = z_ik z_jl`.
    Violation {
        relation: String,
        lhs: C64,
        rhs: C64,
        deviation: f64,
    },
}

pub const FACTORIZATION_TOLERANCE: f64 = 1e-10;

pub fn factorization_check(z: &DMatrix<C64>) -> Result<Factorization> {
    let n = z.nrows();
    if n == 0 || z.ncols() != n {
        return Err(Error::Mismatch(format!(
            "z must be a non-empty square matrix, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            if (z[(i, j)] - z[(j, i)]).norm() > 1e-14 * (1.0 + z[(i, j)].norm()) {
                return Err(Error::Asymmetric(i + 1, j + 1));
            }
        }
    }
    let scale = z.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut worst = (0.0f64, (0, 0, 0, 0), C64::default(), C64::default());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let lhs = z[(i, j)] * z[(k, l)];
                    let rhs = z[(i, k)] * z[(j, l)];
                    let d = (lhs - rhs).norm() / (scale * scale);
                    if d > worst.0 {
                        worst = (d, (i, j, k, l), lhs, rhs);
                    }
                }
            }
        }
    }
    if worst.0 > FACTORIZATION_TOLERANCE {
        let (i, j, k, l) = worst.1;
        return Ok(Factorization::Violation {
            relation: format!(
                "z{}{} z{}{} = z{}{} z{}{}",
                i + 1,
                j + 1,
                k + 1,
                l + 1,
                i + 1,
                k + 1,
                j + 1,
                l + 1
            ),
            lhs: worst.2,
            rhs: worst.3,
            deviation: worst.0,
        });
    }
    let mut alpha = vec![C64::new(0.0, 0.0); n];
    if let Some(m) = (0..n).find(|&m| z[(m, m)].norm() > 0.0) {
        let am = z[(m, m)].sqrt();
        for (j, a) in alpha.iter_mut().enumerate() {
            *a = if j == m { am } else { z[(m, j)] / am };
        }
    }
    let mut max_error = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_error = max_error.max((alpha[i] * alpha[j] - z[(i, j)]).norm());
        }
    }
    Ok(Factorization::Factorized {
        alpha,
        max_error,
        gauge: "first nonzero alpha is the principal square root of its z_ii; -alpha gives the same z".into(),
    })
}

/// Analytic eigen-residual budgets for a variance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenClaim {
    /// Eigenvalue of `E(i,j)`.
    pub eigenvalue: C64,
    /// Bound on `||E psi - z psi||` for the unnormalized state.
    pub residual_e: f64,
    /// Bound on `||E^2 psi - z^2 psi||`.
    pub residual_e2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub i: usize,
    pub j: usize,
    pub var_x: f64,
    pub var_y: f64,
    pub difference: f64,
    pub budget: Option<f64>,
    pub pass: Option<bool>,
}

/// `Var X` and `Var Y` for `X = (E + E^dag)/2`, `Y = i(E - E^dag)/2`.
///
/// The state is normalized and embedded four quanta higher so `E^dag` never
/// drops amplitude. With an eigenvalue claim the difference is compared to
/// `b2 + 2|z| b1 + b1^2`, which bounds `|Re(<E^2> - <E>^2)|` when `b1`, `b2`
/// bound the normalized eigen residuals of `E` and `E^2`.
pub fn variance_equality_report(
    state: &StateVector,
    i: usize,
    j: usize,
    claim: Option<EigenClaim>,
) -> Result<VarianceReport> {
    let basis = state.basis();
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::Mismatch("variance of the zero vector".into()));
    }
    let big = FockBasis::with_guard(basis.modes(), basis.cutoff() + 4, usize::MAX)?;
    let psi = state.normalized().embed(&big)?;
    let e = GeneratorSpec::E(i, j);
    let edag = GeneratorSpec::Edag(i, j);
    let half = C64::new(0.5, 0.0);
    let x = GeneratorSpec::Sum(vec![
        GeneratorSpec::scale(half, e.clone()),
        GeneratorSpec::scale(half, edag.clone()),
    ]);
    let y = GeneratorSpec::Sum(vec![
        GeneratorSpec::scale(C64::new(0.0, 0.5), e),
        GeneratorSpec::scale(C64::new(0.0, -0.5), edag),
    ]);
    let var = |op: &GeneratorSpec| -> Result<f64> {
        let v = apply_generator(op, &psi)?;
        let mean = inner_product(&psi, &v)?.re;
        Ok(v.norm_sqr() - mean * mean)
    };
    let var_x = var(&x)?;
    let var_y = var(&y)?;
    let difference = (var_x - var_y).abs();
    let (budget, pass) = match claim {
        Some(c) => {
            let b1 = c.residual_e / norm;
            let b2 = c.residual_e2 / norm;
            let b = b2 + 2.0 * c.eigenvalue.norm() * b1 + b1 * b1;
            // Rounding in the two variances scales with their size.
            let slack = 1e-13 * (1.0 + var_x.abs() + var_y.abs());
            (Some(b), Some(difference <= b + slack))
        }
        None => (None, None),
    };
    Ok(VarianceReport {
        i,
        j,
        var_x,
        var_y,
        difference,
        budget,
        pass,
    })
}

/// Transports the differential operators `K+ = z`, `K- = 2k d/dz + z d^2/dz^2`,
/// `K3 = k + z d/dz` to the ladder through `z^n <-> sqrt(n! Gamma(2k+n)) |n>` and
/// compares with the abstract matrix elements. Also checks `[K-, K+] = 2 K3`
/// for the transported operators on degrees up to `max_degree - 2`.
pub fn analytic_rep_check(two_k: u32, max_degree: u32, tolerance: f64) -> Result<VerificationReport> {
    if two_k == 0 {
        return Err(Error::InvalidBargmannIndex(0));
    }
    if max_degree < 2 {
        return Err(Error::Mismatch("analytic_rep_check needs max_degree >= 2".into()));
    }
    let k = two_k as f64 / 2.0;
    let d = max_degree as usize;
    let weight = |n: usize| -> Result<f64> {
        Ok((0.5 * (ln_factorial(n as u32) + ln_gamma(2.0 * k + n as f64)?)).exp())
    };
    let weights: Vec<f64> = (0..=d + 1).map(weight).collect::<Result<_>>()?;

    // Coefficient vectors of length d + 2 so K+ on degree d stays representable.
    type Poly = Vec<f64>;
    let k_plus = |c: &Poly| -> Poly {
        let mut out = vec![0.0; c.len()];
        for n in 0..c.len() - 1 {
            out[n + 1] += c[n];
        }
        out
    };
    let k_minus = |c: &Poly| -> Poly {
        let mut out = vec![0.0; c.len()];
        for n in 1..c.len() {
            let nf = n as f64;
            out[n - 1] += 2.0 * k * nf * c[n] + nf * (nf - 1.0) * c[n];
        }
        out
    };
    let k3 = |c: &Poly| -> Poly { c.iter().enumerate().map(|(n, x)| (k + n as f64) * x).collect() };

    let basis = FockBasis::with_guard(1, max_degree + 1, usize::MAX)?;
    let to_state = |c: &Poly| -> StateVector {
        StateVector::from_ordinals(
            &basis,
            c.iter()
                .enumerate()
                .map(|(n, x)| (n, C64::new(x * weights[n], 0.0))),
        )
    };
    let mut worst = 0.0f64;
    let mut compare = |a: &StateVector, b: &StateVector| -> Result<()> {
        let scale = 1.0 + a.norm().max(b.norm());
        worst = worst.max(a.sub(b)?.norm() / scale);
        Ok(())
    };
    for n in 0..=d {
        let mut mono = vec![0.0; d + 2];
        mono[n] = 1.0;
        let ket = to_state(&mono);
        compare(
            &to_state(&k3(&mono)),
            &apply_generator(&GeneratorSpec::BgWeight { two_k }, &ket)?,
        )?;
        compare(
            &to_state(&k_minus(&mono)),
            &apply_generator(&GeneratorSpec::BgLower { two_k }, &ket)?,
        )?;
        compare(
            &to_state(&k_plus(&mono)),
            &apply_generator(&GeneratorSpec::BgRaise { two_k }, &ket)?,
        )?;
        if n + 2 <= d {
            let lhs: Poly = k_minus(&k_plus(&mono))
                .iter()
                .zip(k_plus(&k_minus(&mono)))
                .map(|(a, b)| a - b)
                .collect();
            let rhs: Poly = k3(&mono).iter().map(|x| 2.0 * x).collect();
            compare(&to_state(&lhs), &to_state(&rhs))?;
        }
    }
    let params = json!({ "k": k, "max_degree": max_degree });
    Ok(VerificationReport::asserting(
        "analytic_rep.bg",
        params,
        worst,
        tolerance,
        0.0,
    ))
}

/// Residuals of the two candidate differential forms of `a_j` on the
/// phi-family representation `f_phi(alpha) = e^{|alpha|^2/2} <alpha^*; phi | psi>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiTransport {
    /// `a_j <-> P_phi d/d alpha_j`, `a^dag_j <-> P_phi alpha_j`.
    pub derivative_form: f64,
    /// `a_j <-> P_phi alpha_j`, `a^dag_j <-> P_phi d/d alpha_j`.
    pub multiplication_form: f64,
}

/// Checks both assignments on every monomial of degree `< max_degree`, where
/// `P_phi` swaps `f_phi` and `f_{-phi}`.
pub fn phi_transport_check(modes: usize, max_degree: u32, phi: f64) -> Result<PhiTransport> {
    let basis = FockBasis::with_guard(modes, max_degree + 1, usize::MAX)?;
    // Polynomial coefficients of f_{s phi}[psi] indexed by basis ordinal.
    let transform = |psi: &StateVector, sign: f64| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); basis.len()];
        for (k, a) in psi.iter() {
            let n = basis.state(k);
            let parity = if n.total() % 2 == 0 { 1.0 } else { -1.0 };
            let ln_fact: f64 = n.occupations().iter().map(|&m| ln_factorial(m)).sum();
            out[k] = a * C64::from_polar((-0.5 * ln_fact).exp(), -sign * parity * phi);
        }
        out
    };
    let shift = |poly: &[C64], j: usize, up: bool| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); basis.len()];
        for (k, &c) in poly.iter().enumerate() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let mut occ = basis.state(k).occupations().to_vec();
            if up {
                occ[j - 1] += 1;
                if let Some(t) = basis.ordinal_of(&occ) {
                    out[t] += c;
                }
            } else if occ[j - 1] > 0 {
                let m = occ[j - 1] as f64;
                occ[j - 1] -= 1;
                let t = basis.ordinal_of(&occ).expect("lowered state in basis");
                out[t] += c * m;
            }
        }
        out
    };
    let dist = |a: &[C64], b: &[C64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    };
    let mut derivative_form = 0.0f64;
    let mut multiplication_form = 0.0f64;
    for k in basis.interior(max_degree.saturating_sub(1)) {
        let psi = StateVector::from_ordinals(&basis, [(k, C64::new(1.0, 0.0))]);
        let f_minus = transform(&psi, -1.0);
        for j in 1..=modes {
            let lowered = transform(&apply_generator(&GeneratorSpec::Annihilate(j), &psi)?, 1.0);
            let raised = transform(&apply_generator(&GeneratorSpec::Create(j), &psi)?, 1.0);
            let d_f = shift(&f_minus, j, false);
            let m_f = shift(&f_minus, j, true);
            derivative_form = derivative_form.max(dist(&lowered, &d_f)).max(dist(&raised, &m_f));
            multiplication_form = multiplication_form
                .max(dist(&lowered, &m_f))
                .max(dist(&raised, &d_f));
        }
    }
    Ok(PhiTransport {
        derivative_form,
        multiplication_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{glauber_cs, phi_cat, PhiSign};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn report_pass_rule() {
        let r = VerificationReport::asserting("x", json!({}), 1.5e-12, 1e-12, 1e-12);
        assert!(r.pass);
        let r = VerificationReport::asserting("x", json!({}), 3e-12, 1e-12, 1e-12);
        assert!(!r.pass);
        let r = VerificationReport::asserting("x", json!({}), f64::NAN, 1.0, 0.0);
        assert!(!r.pass);
        assert!(VerificationReport::negative_control("x", json!({}), 0.9, 0.5).pass);
        assert!(VerificationReport::probe("x", json!({}), 1e9).counts_as_pass());
    }

    #[test]
    fn glauber_eigen_within_tail() {
        let b = FockBasis::new(1, 24).unwrap();
        let alpha = [c(1.2, -0.4)];
        let v = glauber_cs(&b, &alpha, 1e-10).unwrap();
        let r = eigen_residual(&GeneratorSpec::Annihilate(1), &v, alpha[0]).unwrap();
        let budget = eigen_budget(&alpha, 24, 1, alpha[0], 1.0);
        assert!(r.residual <= budget * (1.0 + 1e-12), "{} > {}", r.residual, budget);
        // The only missing piece is the top shell.
        let top = v.amplitude(&[24]).norm();
        assert!((r.residual - alpha[0].norm() * top).abs() < 1e-15);
    }

    #[test]
    fn phi_cat_e12_eigen() {
        let b = FockBasis::new(2, 24).unwrap();
        let alpha = [c(0.7, 0.0), c(0.6, 0.0)];
        let v = phi_cat(&b, &alpha, 0.4, PhiSign::Plus, 1e-10).unwrap();
        let r = eigen_residual(&GeneratorSpec::E(1, 2), &v, c(0.42, 0.0)).unwrap();
        assert!(r.residual <= eigen_budget(&alpha, 24, 2, c(0.42, 0.0), 1.0));
    }

    #[test]
    fn factorization_examples() {
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        match factorization_check(&z).unwrap() {
            Factorization::Factorized { alpha, max_error, .. } => {
                assert!((alpha[0] - c(1.0, 0.0)).norm() < 1e-15);
                assert!((alpha[1] - c(2.0, 0.0)).norm() < 1e-15);
                assert!(max_error < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        match factorization_check(&z).unwrap() {
            Factorization::Violation { deviation, .. } => assert!((deviation - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let z = DMatrix::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        match factorization_check(&z).unwrap() {
            Factorization::Factorized { alpha, .. } => assert!((alpha[0] - c(0.0, 1.0)).norm() < 1e-15),
            other => panic!("{other:?}"),
        }
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!(matches!(factorization_check(&z), Err(Error::Asymmetric(2, 1))));
    }

    #[test]
    fn factorization_recovers_random_alpha() {
        let alpha = [c(0.3, -0.8), c(-1.1, 0.2), c(0.0, 0.0), c(0.5, 0.5)];
        let z = DMatrix::from_fn(4, 4, |i, j| alpha[i] * alpha[j]);
        match factorization_check(&z).unwrap() {
            Factorization::Factorized { alpha: got, .. } => {
                let s = if (got[0] - alpha[0]).norm() < 1e-12 { 1.0 } else { -1.0 };
                for (g, a) in got.iter().zip(&alpha) {
                    assert!((g - a * s).norm() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn variance_examples() {
        let b = FockBasis::new(1, 30).unwrap();
        let alpha = [c(0.9, 0.0)];
        let v = glauber_cs(&b, &alpha, 1e-10).unwrap();
        let z = c(0.81, 0.0);
        let claim = EigenClaim {
            eigenvalue: z,
            residual_e: eigen_budget(&alpha, 30, 2, z, 1.0),
            residual_e2: eigen_budget(&alpha, 30, 4, z * z, 1.0),
        };
        let r = variance_equality_report(&v, 1, 1, Some(claim)).unwrap();
        assert!(r.difference <= 1e-10);
        assert_eq!(r.pass, Some(true));

        let b2 = FockBasis::new(2, 6).unwrap();
        let fock = StateVector::basis_state(&b2, &[1, 0]).unwrap();
        let r = variance_equality_report(&fock, 1, 1, None).unwrap();
        assert!(r.pass.is_none());
        // <1|X^2|1> = <1|(a^2 a^dag^2 + a^dag^2 a^2)|1>/4 = (6 + 0)/4.
        assert!((r.var_x - 1.5).abs() < 1e-14);
        assert!((r.var_y - 1.5).abs() < 1e-14);
    }

    #[test]
    fn analytic_rep_matches_ladder() {
        for two_k in [1, 2, 3, 5] {
            let r = analytic_rep_check(two_k, 20, 1e-12).unwrap();
            assert!(r.pass, "2k={two_k} residual {}", r.residual);
        }
        assert!(analytic_rep_check(1, 1, 1e-12).is_err());
    }

    #[test]
    fn phi_transport_prefers_derivative_form() {
        let t = phi_transport_check(2, 8, 0.7).unwrap();
        assert!(t.derivative_form < 1e-13, "{}", t.derivative_form);
        assert!(t.multiplication_form > 0.5);
    }
}
