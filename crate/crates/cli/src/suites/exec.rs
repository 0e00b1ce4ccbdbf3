//! Suite bodies: build the basis, run the core checks, collect reports and tables.

use std::sync::Arc;

use fockforge_core::algebra::{
    casimir_su11_check, relations_suite, GeneratorSpec, RelationParams,
};
use fockforge_core::fock::{inner_product, FockBasis, StateVector};
use fockforge_core::specfun::{
    bessel_k_half_residual, bessel_wronskian_residual, bg_measure_moment, knu_integral_probe,
    ln_factorial, ln_gamma, KnuProbe,
};
use fockforge_core::states::{
    balanced_d, bg_overlap_closed_form, bg_su11_cs, glauber_cs, multimode_cat, phi_cat,
    squared_amp_cat, CatParams, SquaredUnderlying,
};
use fockforge_core::verify::{
    eigen_budget, eigen_residual, glauber_reconstruction_check, measure_uniqueness_probe,
    resolve_identity, sector_orthogonality_check, sector_structure_check,
    variance_equality_report, EigenClaim, QuadratureGrid, VerificationReport,
};
use fockforge_core::C64;
use serde_json::json;

use super::params::*;
use super::{SuiteOutcome, Table};
use crate::config::SuiteConfig;
use crate::CliError;

fn basis(suite: &SuiteConfig) -> Result<Arc<FockBasis>, CliError> {
    Ok(FockBasis::with_guard(suite.modes, suite.cutoff, usize::MAX)?)
}

fn c_json(c: C64) -> serde_json::Value {
    json!([c.re, c.im])
}

fn alpha_json(alpha: &[C64]) -> serde_json::Value {
    json!(alpha.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>())
}

pub fn relations(out: &mut SuiteOutcome, suite: &SuiteConfig, p: RelationParams) -> Result<(), CliError> {
    let b = basis(suite)?;
    out.reports.extend(relations_suite(p, &b, suite.tolerance)?);
    Ok(())
}

pub fn casimir(out: &mut SuiteOutcome, suite: &SuiteConfig, p: CasimirParams) -> Result<(), CliError> {
    let b = basis(suite)?;
    let r = casimir_su11_check(&b, p.margin)?;
    out.reports.push(VerificationReport::asserting(
        "su11.casimir",
        json!({"expected": -3.0 / 16.0, "cutoff": suite.cutoff, "margin": p.margin}),
        r,
        suite.tolerance,
        0.0,
    ));
    Ok(())
}

/// A constructed state of an sp(N,C) family with what its residual budget needs.
struct SpState {
    state: StateVector,
    alpha: Vec<C64>,
    /// Bound on `|amplitude| / |Glauber amplitude|` over the basis.
    reach: f64,
    /// True when only `E(i,j)^2`, not `E(i,j)`, has the state as an eigenvector.
    squared: bool,
}

fn build_sp_state(b: &Arc<FockBasis>, s: &StateParam, tail: f64) -> Result<SpState, CliError> {
    let alpha = s.alpha().expect("sp family").to_vec();
    let cat = |params: CatParams| -> Result<SpState, CliError> {
        Ok(SpState {
            state: multimode_cat(b, &alpha, params, tail)?,
            alpha: alpha.clone(),
            reach: params.c_plus.norm() + params.c_minus.norm(),
            squared: false,
        })
    };
    match s {
        StateParam::Glauber { .. } => Ok(SpState {
            state: glauber_cs(b, &alpha, tail)?,
            alpha: alpha.clone(),
            reach: 1.0,
            squared: false,
        }),
        StateParam::Cat { c_plus, c_minus, .. } => cat(CatParams::new(*c_plus, *c_minus)),
        StateParam::Even { .. } => cat(CatParams::even(&alpha)),
        StateParam::Odd { .. } => cat(CatParams::odd(&alpha)),
        StateParam::PhiCat { phi, sign, .. } => Ok(SpState {
            state: phi_cat(b, &alpha, *phi, *sign, tail)?,
            alpha: alpha.clone(),
            reach: 1.0,
            squared: false,
        }),
        StateParam::SquaredCat {
            underlying,
            d_plus,
            d_minus,
            ..
        } => {
            let (dp, dm) = match (d_plus, d_minus) {
                (Some(p), Some(m)) => (*p, *m),
                (None, None) => {
                    let d = balanced_d(b, &alpha, *underlying, tail)?;
                    (d, d)
                }
                _ => {
                    return Err(CliError::Config(
                        "squared_cat needs both d_plus and d_minus or neither".into(),
                    ))
                }
            };
            let inner = match underlying {
                SquaredUnderlying::Glauber => 1.0,
                SquaredUnderlying::Cat { c_plus, c_minus } => c_plus.norm() + c_minus.norm(),
                SquaredUnderlying::Phi { .. } => 1.0,
            };
            Ok(SpState {
                state: squared_amp_cat(b, &alpha, *underlying, dp, dm, tail)?,
                alpha: alpha.clone(),
                reach: (dp.norm() + dm.norm()) * inner,
                squared: true,
            })
        }
        StateParam::BgSu11 { .. } => unreachable!("not an sp family"),
    }
}

fn pairs(modes: usize) -> Vec<(usize, usize)> {
    (1..=modes)
        .flat_map(|i| (i..=modes).map(move |j| (i, j)))
        .collect()
}

pub fn eigenstates(out: &mut SuiteOutcome, suite: &SuiteConfig, p: EigenParams) -> Result<(), CliError> {
    let b = basis(suite)?;
    let tail = p.max_tail.unwrap_or(f64::INFINITY);
    for (idx, s) in p.states.iter().enumerate() {
        if let StateParam::BgSu11 {
            two_k,
            z,
            overlap_with,
        } = s
        {
            bg_checks(out, suite, &b, idx, *two_k, *z, overlap_with)?;
            continue;
        }
        let st = build_sp_state(&b, s, tail)?;
        for (i, j) in pairs(b.modes()) {
            let lambda = st.alpha[i - 1] * st.alpha[j - 1];
            let e = GeneratorSpec::E(i, j);
            let (op, eigenvalue, degree, name) = if st.squared {
                (
                    GeneratorSpec::Product(vec![e.clone(), e]),
                    lambda * lambda,
                    4,
                    format!("E({i},{j})^2"),
                )
            } else {
                (e, lambda, 2, format!("E({i},{j})"))
            };
            let r = eigen_residual(&op, &st.state, eigenvalue)?;
            let bound = eigen_budget(&st.alpha, b.cutoff(), degree, eigenvalue, st.reach);
            out.reports.push(
                VerificationReport::asserting(
                    &format!("eigen.{}", s.family()),
                    json!({
                        "state": idx,
                        "op": name,
                        "eigenvalue": c_json(eigenvalue),
                        "alpha": alpha_json(&st.alpha),
                        "tail_bound": bound,
                        "budget_factor": p.budget_factor,
                    }),
                    r.residual,
                    suite.tolerance,
                    p.budget_factor * bound,
                )
                .with_note(format!("operator dropped weight {:e}", r.op_truncation_loss)),
            );
        }
    }
    Ok(())
}

fn bg_checks(
    out: &mut SuiteOutcome,
    suite: &SuiteConfig,
    b: &Arc<FockBasis>,
    idx: usize,
    two_k: u32,
    z: C64,
    overlap_with: &[C64],
) -> Result<(), CliError> {
    let v = bg_su11_cs(b, two_k, z)?;
    let op = GeneratorSpec::BgLower { two_k };
    let r = eigen_residual(&op, &v, z)?;
    // Only the top shell lacks its partner: the residual is |z| |c_N|, and
    // |c_N|^2 plus the dropped weight is the exact tail from N.
    let top = v.amplitude(&[b.cutoff()]).norm_sqr();
    let budget = z.norm() * (v.truncation_loss() + top).sqrt();
    out.reports.push(VerificationReport::asserting(
        "eigen.bg_su11",
        json!({"state": idx, "op": "BgKm", "two_k": two_k, "z": c_json(z)}),
        r.residual,
        suite.tolerance,
        budget,
    ));
    for w in overlap_with {
        let u = bg_su11_cs(b, two_k, *w)?;
        let sum = inner_product(&v, &u)?;
        let closed = bg_overlap_closed_form(two_k, z, *w)?;
        let budget = (v.truncation_loss() * u.truncation_loss()).sqrt();
        out.reports.push(VerificationReport::asserting(
            "bg_su11.overlap",
            json!({"state": idx, "two_k": two_k, "z1": c_json(z), "z2": c_json(*w)}),
            (sum - closed).norm(),
            suite.tolerance,
            budget,
        ));
    }
    Ok(())
}

fn probe_ordinals(b: &FockBasis, spec: &ProbeSpec) -> Result<Vec<usize>, CliError> {
    match spec {
        ProbeSpec::MaxTotal { max_total } => {
            if *max_total > b.cutoff() {
                return Err(CliError::Config(format!(
                    "probe max_total {max_total} exceeds cutoff {}",
                    b.cutoff()
                )));
            }
            Ok(b.interior(*max_total).collect())
        }
        ProbeSpec::Ordinals { ordinals } => Ok(ordinals.clone()),
    }
}

pub fn resolve(
    out: &mut SuiteOutcome,
    suite: &SuiteConfig,
    grid: &QuadratureGrid,
    p: ResolveParams,
) -> Result<(), CliError> {
    let b = basis(suite)?;
    let probe = probe_ordinals(&b, &p.probe)?;
    let report = resolve_identity(&p.states, &p.measure, &b, &probe, grid, p.target)?;
    let params = json!({
        "family": report.family,
        "measure": p.measure.label(),
        "target": report.target,
        "probe_size": probe.len(),
        "worst_entry": [report.worst_entry.0, report.worst_entry.1],
    });
    let main = match &p.negative_control {
        Some(nc) => VerificationReport::negative_control(
            "resolution.gram_deviation",
            params.clone(),
            report.gram_deviation,
            nc.min_deviation,
        ),
        None => VerificationReport::asserting(
            "resolution.gram_deviation",
            params.clone(),
            report.gram_deviation,
            suite.tolerance,
            0.0,
        ),
    };
    out.reports.push(main);
    out.reports.push(VerificationReport::asserting(
        "resolution.positive_semidefinite",
        params,
        (-report.min_eigenvalue).max(0.0),
        suite.tolerance,
        0.0,
    ));
    if let Some(g) = &report.gram {
        let mut header = vec!["ordinal".to_string()];
        header.extend(probe.iter().map(|k| k.to_string()));
        let part = |f: fn(&C64) -> f64| -> Vec<Vec<String>> {
            (0..probe.len())
                .map(|r| {
                    let mut row = vec![probe[r].to_string()];
                    row.extend((0..probe.len()).map(|c| f(&g[(r, c)]).to_string()));
                    row
                })
                .collect()
        };
        out.tables.push(Table {
            file: format!("gram_{}_re.csv", out.index),
            header: header.clone(),
            rows: part(|c| c.re),
        });
        out.tables.push(Table {
            file: format!("gram_{}_im.csv", out.index),
            header,
            rows: part(|c| c.im),
        });
    }
    out.resolutions.push(report);
    Ok(())
}

pub fn sectors(out: &mut SuiteOutcome, suite: &SuiteConfig, p: SectorParams) -> Result<(), CliError> {
    let b = basis(suite)?;
    let r = sector_orthogonality_check(&b, &p.alpha, p.p, p.q, &p.l, suite.tolerance)?;
    out.reports.push(r.off_diagonal);
    for d in &r.diagonals {
        out.reports.push(
            VerificationReport::probe(
                "sector_diagonal",
                json!({"l": d.l, "norm_sqr": d.norm_sqr, "exact_norm_sqr": d.exact_norm_sqr}),
                d.distance_from_one,
            )
            .with_note("diagonal <alpha;l|alpha;l> of the unnormalized sector state; residual is |norm^2 - 1|"),
        );
    }
    out.reports.push(VerificationReport::probe(
        "sector_weighted_total",
        json!({"l": p.l, "exp_alpha_sqr": p.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().exp()}),
        r.weighted_total,
    ));
    out.reports.extend(sector_structure_check(&b, &p.alpha, p.p, p.q, &p.l, suite.tolerance)?);
    Ok(())
}

pub fn reconstruction(
    out: &mut SuiteOutcome,
    suite: &SuiteConfig,
    p: ReconstructionParams,
) -> Result<(), CliError> {
    let b = basis(suite)?;
    let c = b.cutoff() as i64;
    let ls = p.l.clone().unwrap_or_else(|| (-c..=c).collect());
    out.reports.push(glauber_reconstruction_check(
        &b,
        &p.alpha,
        p.p,
        p.q,
        &ls,
        p.omit,
        suite.tolerance,
    )?);
    Ok(())
}

pub fn uniqueness(out: &mut SuiteOutcome, _suite: &SuiteConfig, p: UniquenessParams) -> Result<(), CliError> {
    let r = measure_uniqueness_probe(&p.density_a, &p.density_b, &p.degrees, p.level)?;
    let params = json!({
        "density_a": p.density_a.label(),
        "density_b": p.density_b.label(),
        "degrees": p.degrees,
        "level": p.level,
        "mean_ratio": r.rows.iter().map(|x| x.ratio).sum::<f64>() / r.rows.len() as f64,
    });
    out.reports.push(match p.max_ratio_spread {
        Some(t) => VerificationReport::asserting("moment_ratio_spread", params, r.ratio_spread, t, 0.0),
        None => VerificationReport::probe("moment_ratio_spread", params, r.ratio_spread),
    });
    out.tables.push(Table {
        file: format!("moments_{}.csv", out.index),
        header: ["degrees", "moment_a", "moment_b", "difference", "ratio"]
            .map(String::from)
            .to_vec(),
        rows: r
            .rows
            .iter()
            .map(|row| {
                let deg: Vec<String> = row.degrees.iter().map(|d| d.to_string()).collect();
                vec![
                    deg.join(" "),
                    row.moment_a.to_string(),
                    row.moment_b.to_string(),
                    row.difference.to_string(),
                    row.ratio.to_string(),
                ]
            })
            .collect(),
    });
    Ok(())
}

/// Rows of the `K_nu(2z)` probe in grid order.
pub fn knu_table(nu: &[u32], z: &[f64]) -> Result<Vec<KnuProbe>, CliError> {
    let mut rows = Vec::with_capacity(nu.len() * z.len());
    for &n in nu {
        for &x in z {
            rows.push(knu_integral_probe(n, x)?);
        }
    }
    Ok(rows)
}

pub const KNU_HEADER: [&str; 5] = ["nu", "z", "lhs", "rhs", "ratio"];

pub fn knu_rows(rows: &[KnuProbe]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.nu.to_string(),
                r.z.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.ratio.to_string(),
            ]
        })
        .collect()
}

pub fn bessel(out: &mut SuiteOutcome, suite: &SuiteConfig, p: BesselParams) -> Result<(), CliError> {
    let rows = knu_table(&p.nu, &p.z)?;
    for r in &rows {
        out.reports.push(VerificationReport::probe(
            "knu.printed_ratio",
            json!({"nu": r.nu, "z": r.z, "lhs": r.lhs, "rhs": r.rhs}),
            r.ratio,
        ));
        out.reports.push(VerificationReport::asserting(
            "knu.classical_form",
            json!({"nu": r.nu, "z": r.z}),
            r.classical_rel_error,
            p.classical_tolerance,
            0.0,
        ));
    }
    out.tables.push(Table {
        file: format!("bessel_{}.csv", out.index),
        header: KNU_HEADER.map(String::from).to_vec(),
        rows: knu_rows(&rows),
    });
    if p.identities {
        identity_checks(out, suite)?;
    }
    Ok(())
}

fn identity_checks(out: &mut SuiteOutcome, suite: &SuiteConfig) -> Result<(), CliError> {
    let tol = suite.tolerance.max(1e-10);
    let mut worst = 0.0f64;
    for nu in [0.0, 0.5, 1.0, 2.5, 4.0] {
        for x in [0.1, 1.0, 5.0, 20.0] {
            worst = worst.max(bessel_wronskian_residual(nu, x)?);
        }
    }
    out.reports.push(VerificationReport::asserting(
        "bessel.wronskian",
        json!({"grid": "nu in {0, 0.5, 1, 2.5, 4} x in {0.1, 1, 5, 20}"}),
        worst,
        tol,
        0.0,
    ));
    let mut worst = 0.0f64;
    for x in [0.01, 0.5, 1.0, 3.0, 10.0, 50.0] {
        worst = worst.max(bessel_k_half_residual(x)?);
    }
    out.reports.push(VerificationReport::asserting(
        "bessel.k_half_closed_form",
        json!({"x": [0.01, 0.5, 1.0, 3.0, 10.0, 50.0]}),
        worst,
        tol,
        0.0,
    ));
    for two_k in [1u32, 2] {
        let mut worst = 0.0f64;
        for n in 0..=10u32 {
            let want = (ln_factorial(n) + ln_gamma(two_k as f64 + n as f64)?).exp();
            let got = bg_measure_moment(two_k, n)?;
            worst = worst.max(((got - want) / want).abs());
        }
        out.reports.push(VerificationReport::asserting(
            "bg_su11.measure_moment",
            json!({"two_k": two_k, "n_max": 10}),
            worst,
            1e-8,
            0.0,
        ));
    }
    Ok(())
}

pub fn variance(out: &mut SuiteOutcome, suite: &SuiteConfig, p: VarianceParams) -> Result<(), CliError> {
    let b = basis(suite)?;
    let ps = p.pairs.clone().unwrap_or_else(|| pairs(b.modes()));
    for (idx, s) in p.states.iter().enumerate() {
        if matches!(s, StateParam::BgSu11 { .. }) {
            return Err(CliError::Config(format!(
                "states[{idx}]: variance compares X_ij and Y_ij of E(i,j); bg_su11 is not an E(i,j) family"
            )));
        }
        let st = build_sp_state(&b, s, f64::INFINITY)?;
        for &(i, j) in &ps {
            let lambda = st.alpha[i - 1] * st.alpha[j - 1];
            let claim = (!st.squared).then(|| EigenClaim {
                eigenvalue: lambda,
                residual_e: eigen_budget(&st.alpha, b.cutoff(), 2, lambda, st.reach),
                residual_e2: eigen_budget(&st.alpha, b.cutoff(), 4, lambda * lambda, st.reach),
            });
            let v = variance_equality_report(&st.state, i, j, claim)?;
            let params = json!({
                "state": idx,
                "family": s.family(),
                "i": i,
                "j": j,
                "var_x": v.var_x,
                "var_y": v.var_y,
            });
            out.reports.push(match v.budget {
                Some(budget) => {
                    // Rounding in the two variances scales with their size.
                    let slack = suite.tolerance.max(1e-13 * (1.0 + v.var_x.abs() + v.var_y.abs()));
                    VerificationReport::asserting("variance.x_minus_y", params, v.difference, slack, budget)
                }
                None => VerificationReport::probe("variance.x_minus_y", params, v.difference)
                    .with_note("not an eigenstate of E(i,j); the equality is not claimed"),
            });
        }
    }
    Ok(())
}
