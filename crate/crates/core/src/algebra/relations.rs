//! Commutation-relation tables and their numerical verification.
//!
//! The tables are written for `H_ij = (a^dag_j a_i + a_i a^dag_j)/2`, which is
//! generator `H(j,i)`; [`ht`] does that relabelling. A probe line evaluates
//! the same table against `H(i,j)` so the convention gap stays visible.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{apply_inner, GeneratorSpec};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, StateVector};
use crate::verify::{CheckMode, VerificationReport};

use GeneratorSpec::{Create, Annihilate, Edag, E, H};

/// Which relation table to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algebra", rename_all = "snake_case", deny_unknown_fields)]
pub enum RelationParams {
    /// sp(N,C) on every mode of the basis.
    Sp,
    /// u(p,q) with `p + q` equal to the number of modes.
    UPq { p: usize, q: usize },
    /// One-mode su(1,1).
    Su11,
}

/// Short name used in report labels.
pub type AlgebraName = &'static str;

impl RelationParams {
    pub fn name(&self) -> AlgebraName {
        match self {
            RelationParams::Sp => "sp",
            RelationParams::UPq { .. } => "u_pq",
            RelationParams::Su11 => "su11",
        }
    }
}

/// `[a, b] = expected`.
#[derive(Debug, Clone)]
pub struct RelationCase {
    pub a: GeneratorSpec,
    pub b: GeneratorSpec,
    pub expected: GeneratorSpec,
}

#[derive(Debug, Clone)]
pub struct RelationLine {
    pub name: String,
    pub statement: String,
    pub mode: CheckMode,
    pub cases: Vec<RelationCase>,
}

fn ht(i: usize, j: usize) -> GeneratorSpec {
    H(j, i)
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn combo(terms: Vec<(f64, GeneratorSpec)>) -> GeneratorSpec {
    GeneratorSpec::Sum(
        terms
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, g)| GeneratorSpec::scale(c, g))
            .collect(),
    )
}

fn case(a: GeneratorSpec, b: GeneratorSpec, expected: GeneratorSpec) -> RelationCase {
    RelationCase { a, b, expected }
}

fn line(name: &str, statement: &str, mode: CheckMode, cases: Vec<RelationCase>) -> RelationLine {
    RelationLine {
        name: name.to_string(),
        statement: statement.to_string(),
        mode,
        cases,
    }
}

fn quads(range: &[usize]) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for &i in range {
        for &j in range {
            for &k in range {
                for &l in range {
                    out.push((i, j, k, l));
                }
            }
        }
    }
    out
}

fn sp_lines(n: usize) -> Vec<RelationLine> {
    let all: Vec<usize> = (1..=n).collect();
    let q = quads(&all);
    let asserting = CheckMode::Asserting;
    let l3 = |h: fn(usize, usize) -> GeneratorSpec| {
        q.iter()
            .map(|&(i, j, k, l)| {
                case(
                    E(i, j),
                    Edag(k, l),
                    combo(vec![
                        (delta(j, k), h(i, l)),
                        (delta(i, l), h(j, k)),
                        (delta(i, k), h(j, l)),
                        (delta(j, l), h(i, k)),
                    ]),
                )
            })
            .collect::<Vec<_>>()
    };
    let l4 = |h: fn(usize, usize) -> GeneratorSpec| {
        q.iter()
            .map(|&(i, j, k, l)| {
                case(
                    E(i, j),
                    h(k, l),
                    combo(vec![(delta(i, l), E(j, k)), (delta(j, l), E(i, k))]),
                )
            })
            .collect::<Vec<_>>()
    };
    let l6 = |h: fn(usize, usize) -> GeneratorSpec| {
        q.iter()
            .map(|&(i, j, k, l)| {
                case(
                    h(i, j),
                    h(k, l),
                    combo(vec![(delta(i, l), h(k, j)), (-delta(j, k), h(i, l))]),
                )
            })
            .collect::<Vec<_>>()
    };
    let literal: fn(usize, usize) -> GeneratorSpec = |i, j| H(i, j);
    vec![
        line(
            "sp.EE",
            "[E_ij, E_kl] = 0",
            asserting,
            q.iter()
                .map(|&(i, j, k, l)| case(E(i, j), E(k, l), GeneratorSpec::zero()))
                .collect(),
        ),
        line(
            "sp.EdagEdag",
            "[E+_ij, E+_kl] = 0",
            asserting,
            q.iter()
                .map(|&(i, j, k, l)| case(Edag(i, j), Edag(k, l), GeneratorSpec::zero()))
                .collect(),
        ),
        line(
            "sp.EEdag",
            "[E_ij, E+_kl] = d_jk H_il + d_il H_jk + d_ik H_jl + d_jl H_ik",
            asserting,
            l3(ht),
        ),
        line(
            "sp.EH",
            "[E_ij, H_kl] = d_il E_jk + d_jl E_ik",
            asserting,
            l4(ht),
        ),
        line(
            "sp.EdagH",
            "[E+_ij, H_kl] = -d_ik E+_jl - d_jk E+_il",
            asserting,
            q.iter()
                .map(|&(i, j, k, l)| {
                    case(
                        Edag(i, j),
                        ht(k, l),
                        combo(vec![(-delta(i, k), Edag(j, l)), (-delta(j, k), Edag(i, l))]),
                    )
                })
                .collect(),
        ),
        line(
            "sp.HH",
            "[H_ij, H_kl] = d_il H_kj - d_jk H_il",
            asserting,
            l6(ht),
        ),
        line(
            "sp.EH.literal_h",
            "[E_ij, H(k,l)] = d_il E_jk + d_jl E_ik with H(k,l) = (a+_k a_l + a_l a+_k)/2",
            CheckMode::ProbeOnly,
            l4(literal),
        ),
        line(
            "sp.HH.literal_h",
            "[H(i,j), H(k,l)] = d_il H(k,j) - d_jk H(i,l) with H(i,j) = (a+_i a_j + a_j a+_i)/2",
            CheckMode::ProbeOnly,
            l6(literal),
        ),
    ]
}

/// Coefficients of `G_xy = a^dag_x a_y`.
type GlCombo = BTreeMap<(usize, usize), C64>;

fn m_combo(a: usize, b: usize) -> GlCombo {
    let mut m = GlCombo::new();
    *m.entry((a, b)).or_default() += C64::new(0.5, 0.0);
    *m.entry((b, a)).or_default() += C64::new(0.5, 0.0);
    m
}

fn m_tilde_combo(a: usize, b: usize) -> GlCombo {
    let mut m = GlCombo::new();
    *m.entry((b, a)).or_default() += C64::new(0.0, 1.0);
    *m.entry((a, b)).or_default() += C64::new(0.0, -1.0);
    m
}

fn gl_commutator(x: &GlCombo, y: &GlCombo) -> GlCombo {
    let mut out = GlCombo::new();
    for (&(a, b), &cx) in x {
        for (&(c, d), &cy) in y {
            if b == c {
                *out.entry((a, d)).or_default() += cx * cy;
            }
            if d == a {
                *out.entry((c, b)).or_default() -= cx * cy;
            }
        }
    }
    out.retain(|_, c| c.norm() > 0.0);
    out
}

fn gl_operator(c: &GlCombo) -> GeneratorSpec {
    GeneratorSpec::Sum(
        c.iter()
            .map(|(&(x, y), &v)| {
                GeneratorSpec::scale(v, GeneratorSpec::product(Create(x), Annihilate(y)))
            })
            .collect(),
    )
}

fn closure_line(name: &str, block: &[usize], tilde: bool) -> RelationLine {
    type Ctor = fn(usize, usize) -> GeneratorSpec;
    let (m, mt): (Ctor, Ctor) = if tilde {
        (GeneratorSpec::Mq, GeneratorSpec::MqTilde)
    } else {
        (GeneratorSpec::Mp, GeneratorSpec::MpTilde)
    };
    let mut cases = Vec::new();
    for &(a, b, c, d) in &quads(block) {
        let kinds: [(GeneratorSpec, GlCombo, GeneratorSpec, GlCombo); 3] = [
            (m(a, b), m_combo(a, b), m(c, d), m_combo(c, d)),
            (m(a, b), m_combo(a, b), mt(c, d), m_tilde_combo(c, d)),
            (mt(a, b), m_tilde_combo(a, b), mt(c, d), m_tilde_combo(c, d)),
        ];
        for (x, xc, y, yc) in kinds {
            let comm = gl_commutator(&xc, &yc);
            // Closure in u(n): the commutator of Hermitian generators is
            // anti-Hermitian, c_xy = -conj(c_yx).
            let skew = comm
                .iter()
                .map(|(&(i, j), &v)| (v + comm.get(&(j, i)).copied().unwrap_or_default().conj()).norm())
                .fold(0.0, f64::max);
            assert!(skew < 1e-15, "gl expansion is not anti-Hermitian");
            cases.push(case(x, y, gl_operator(&comm)));
        }
    }
    let statement = if tilde {
        "[M, M], [M, M~], [M~, M~] close on u(q)"
    } else {
        "[M, M], [M, M~], [M~, M~] close on u(p)"
    };
    line(name, statement, CheckMode::Asserting, cases)
}

fn upq_lines(p: usize, q: usize) -> Vec<RelationLine> {
    let pb: Vec<usize> = (1..=p).collect();
    let qb: Vec<usize> = (p + 1..=p + q).collect();
    let mixed: Vec<(usize, usize)> = pb.iter().flat_map(|&a| qb.iter().map(move |&m| (a, m))).collect();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for b in [&pb, &qb] {
        for &k in b.iter() {
            for &l in b.iter() {
                blocks.push((k, l));
            }
        }
    }
    let asserting = CheckMode::Asserting;
    let pairs = |f: &dyn Fn((usize, usize), (usize, usize)) -> RelationCase| {
        mixed
            .iter()
            .flat_map(|&x| mixed.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect::<Vec<_>>()
    };
    let mixed_block = |f: &dyn Fn((usize, usize), (usize, usize)) -> RelationCase| {
        mixed
            .iter()
            .flat_map(|&x| blocks.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect::<Vec<_>>()
    };
    let l = GeneratorSpec::L { p, q };
    let mut commuting: Vec<GeneratorSpec> = Vec::new();
    for &(a, m) in &mixed {
        commuting.push(E(a, m));
        commuting.push(Edag(a, m));
    }
    for &(k, kk) in &blocks {
        commuting.push(ht(k, kk));
        if k <= p {
            commuting.push(GeneratorSpec::Mp(k, kk));
            commuting.push(GeneratorSpec::MpTilde(k, kk));
        } else {
            commuting.push(GeneratorSpec::Mq(k, kk));
            commuting.push(GeneratorSpec::MqTilde(k, kk));
        }
    }
    vec![
        line(
            "u_pq.EE",
            "[E_am, E_bn] = 0",
            asserting,
            pairs(&|(a, m), (b, n)| case(E(a, m), E(b, n), GeneratorSpec::zero())),
        ),
        line(
            "u_pq.EdagEdag",
            "[E+_am, E+_bn] = 0",
            asserting,
            pairs(&|(a, m), (b, n)| case(Edag(a, m), Edag(b, n), GeneratorSpec::zero())),
        ),
        line(
            "u_pq.EEdag",
            "[E_am, E+_bn] = d_mn H_ab + d_ab H_mn",
            asserting,
            pairs(&|(a, m), (b, n)| {
                case(
                    E(a, m),
                    Edag(b, n),
                    combo(vec![(delta(m, n), ht(a, b)), (delta(a, b), ht(m, n))]),
                )
            }),
        ),
        line(
            "u_pq.EH",
            "[E_am, H_kl] = d_al E_mk + d_ml E_ak for block-diagonal H",
            asserting,
            mixed_block(&|(a, m), (k, ll)| {
                case(
                    E(a, m),
                    ht(k, ll),
                    combo(vec![(delta(a, ll), E(m, k)), (delta(m, ll), E(a, k))]),
                )
            }),
        ),
        line(
            "u_pq.EdagH",
            "[E+_am, H_kl] = -d_ak E+_ml - d_mk E+_al for block-diagonal H",
            asserting,
            mixed_block(&|(a, m), (k, ll)| {
                case(
                    Edag(a, m),
                    ht(k, ll),
                    combo(vec![(-delta(a, k), Edag(m, ll)), (-delta(m, k), Edag(a, ll))]),
                )
            }),
        ),
        line(
            "u_pq.HH",
            "[H_ij, H_kl] = d_il H_kj - d_jk H_il for block-diagonal H",
            asserting,
            blocks
                .iter()
                .flat_map(|&x| blocks.iter().map(move |&y| (x, y)))
                .map(|((i, j), (k, ll))| {
                    case(
                        ht(i, j),
                        ht(k, ll),
                        combo(vec![(delta(i, ll), ht(k, j)), (-delta(j, k), ht(i, ll))]),
                    )
                })
                .collect(),
        ),
        closure_line("u_pq.Mp_closure", &pb, false),
        closure_line("u_pq.Mq_closure", &qb, true),
        line(
            "u_pq.L_central",
            "[L, X] = 0 for every u(p,q) generator X",
            asserting,
            commuting
                .into_iter()
                .map(|x| case(l.clone(), x, GeneratorSpec::zero()))
                .collect(),
        ),
    ]
}

fn su11_lines() -> Vec<RelationLine> {
    use GeneratorSpec::{K1, K2, K3};
    let kp = GeneratorSpec::Sum(vec![K1, GeneratorSpec::scale(C64::new(0.0, 1.0), K2)]);
    let km = GeneratorSpec::Sum(vec![K1, GeneratorSpec::scale(C64::new(0.0, -1.0), K2)]);
    let a = CheckMode::Asserting;
    vec![
        line("su11.K3Kp", "[K3, K+] = K+", a, vec![case(K3, kp.clone(), kp.clone())]),
        line(
            "su11.K3Km",
            "[K3, K-] = -K-",
            a,
            vec![case(K3, km.clone(), GeneratorSpec::scale(-1.0, km.clone()))],
        ),
        line(
            "su11.KmKp",
            "[K-, K+] = 2 K3",
            a,
            vec![case(km, kp, GeneratorSpec::scale(2.0, K3))],
        ),
    ]
}

/// The relation table for `params` on `modes` modes.
pub fn relation_lines(params: RelationParams, modes: usize) -> Result<Vec<RelationLine>> {
    match params {
        RelationParams::Sp => {
            if modes == 0 {
                return Err(Error::ZeroModes);
            }
            Ok(sp_lines(modes))
        }
        RelationParams::UPq { p, q } => {
            if p == 0 || q == 0 || p + q != modes {
                return Err(Error::InvalidSplit { p, q, modes });
            }
            Ok(upq_lines(p, q))
        }
        RelationParams::Su11 => {
            if modes != 1 {
                return Err(Error::OneModeOnly("su(1,1) relations".into()));
            }
            Ok(su11_lines())
        }
    }
}

fn check_margin(basis: &FockBasis, margin: u32) -> Result<()> {
    if margin > basis.cutoff() {
        return Err(Error::MarginTooLarge {
            margin,
            cutoff: basis.cutoff(),
        });
    }
    Ok(())
}

/// Largest `||([A,B] - X) e_n||` over basis states with `n_tot <= cutoff - margin`.
pub fn commutator_residual(
    a: &GeneratorSpec,
    b: &GeneratorSpec,
    expected: &GeneratorSpec,
    basis: &Arc<FockBasis>,
    margin: u32,
) -> Result<f64> {
    check_margin(basis, margin)?;
    for g in [a, b, expected] {
        g.validate(basis.modes())?;
    }
    let range = basis.interior(basis.cutoff() - margin);
    let worst = range
        .into_par_iter()
        .map(|k| {
            let e = StateVector::from_ordinals(basis, [(k, C64::new(1.0, 0.0))]);
            let ab = apply_inner(a, &apply_inner(b, &e));
            let ba = apply_inner(b, &apply_inner(a, &e));
            let x = apply_inner(expected, &e);
            ab.sub(&ba)
                .and_then(|d| d.sub(&x))
                .map(|r| r.norm())
                .expect("same basis")
        })
        .collect::<Vec<f64>>();
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Margin that keeps every product of two quadratic generators inside the basis.
pub const RELATION_MARGIN: u32 = 4;

/// Checks every line of the table and reports the worst residual per line.
pub fn relations_suite(
    params: RelationParams,
    basis: &Arc<FockBasis>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    check_margin(basis, RELATION_MARGIN)?;
    let lines = relation_lines(params, basis.modes())?;
    let mut reports = Vec::with_capacity(lines.len());
    for l in lines {
        let mut worst = 0.0f64;
        for c in &l.cases {
            worst = worst.max(commutator_residual(
                &c.a,
                &c.b,
                &c.expected,
                basis,
                RELATION_MARGIN,
            )?);
        }
        let parameters = json!({
            "algebra": params.name(),
            "statement": l.statement,
            "cases": l.cases.len(),
            "modes": basis.modes(),
            "cutoff": basis.cutoff(),
            "margin": RELATION_MARGIN,
        });
        let report = match l.mode {
            CheckMode::ProbeOnly => VerificationReport::probe(&l.name, parameters, worst),
            _ => VerificationReport::asserting(&l.name, parameters, worst, tolerance, 0.0),
        };
        reports.push(report);
    }
    Ok(reports)
}

/// Largest deviation of `K3^2 - K1^2 - K2^2` from `-3/16` on interior states.
pub fn casimir_su11_check(basis: &Arc<FockBasis>, margin: u32) -> Result<f64> {
    use GeneratorSpec::{K1, K2, K3};
    let sq = |g: GeneratorSpec| GeneratorSpec::Product(vec![g.clone(), g]);
    let casimir = GeneratorSpec::Sum(vec![
        sq(K3),
        GeneratorSpec::scale(-1.0, sq(K1)),
        GeneratorSpec::scale(-1.0, sq(K2)),
        GeneratorSpec::scale(3.0 / 16.0, GeneratorSpec::Identity),
    ]);
    check_margin(basis, margin)?;
    casimir.validate(basis.modes())?;
    let range = basis.interior(basis.cutoff() - margin);
    let worst = range
        .into_par_iter()
        .map(|k| {
            let e = StateVector::from_ordinals(basis, [(k, C64::new(1.0, 0.0))]);
            apply_inner(&casimir, &e).norm()
        })
        .collect::<Vec<f64>>();
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sp_table_holds_with_transposed_h() {
        let b = FockBasis::new(2, 8).unwrap();
        let reports = relations_suite(RelationParams::Sp, &b, 1e-12).unwrap();
        assert_eq!(reports.len(), 8);
        for r in &reports {
            if r.mode == CheckMode::Asserting {
                assert!(r.pass, "{} residual {}", r.check, r.residual);
            }
        }
        // The literal reading of H breaks the E-H and H-H lines.
        let literal: Vec<_> = reports.iter().filter(|r| r.mode == CheckMode::ProbeOnly).collect();
        assert!(literal.iter().all(|r| r.residual > 0.1));
    }

    #[test]
    fn upq_and_su11_tables() {
        let b = FockBasis::new(3, 7).unwrap();
        for r in relations_suite(RelationParams::UPq { p: 2, q: 1 }, &b, 1e-12).unwrap() {
            assert!(r.pass, "{} residual {}", r.check, r.residual);
        }
        let b1 = FockBasis::new(1, 20).unwrap();
        let reports = relations_suite(RelationParams::Su11, &b1, 1e-12).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn wrong_expectation_is_caught() {
        let b = FockBasis::new(1, 10).unwrap();
        let r = commutator_residual(
            &GeneratorSpec::Annihilate(1),
            &GeneratorSpec::Create(1),
            &GeneratorSpec::scale(2.0, GeneratorSpec::Identity),
            &b,
            2,
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-14, "{r}");
        let ok = commutator_residual(
            &GeneratorSpec::Annihilate(1),
            &GeneratorSpec::Create(1),
            &GeneratorSpec::Identity,
            &b,
            2,
        )
        .unwrap();
        assert!(ok < 1e-13, "{ok}");
    }

    #[test]
    fn margin_and_split_errors() {
        let b = FockBasis::new(2, 3).unwrap();
        assert!(matches!(
            relations_suite(RelationParams::Sp, &b, 1e-12),
            Err(Error::MarginTooLarge { .. })
        ));
        let b = FockBasis::new(2, 6).unwrap();
        assert!(relations_suite(RelationParams::UPq { p: 2, q: 1 }, &b, 1e-12).is_err());
        assert!(relations_suite(RelationParams::Su11, &b, 1e-12).is_err());
    }

    #[test]
    fn casimir_is_constant() {
        let b = FockBasis::new(1, 30).unwrap();
        assert!(casimir_su11_check(&b, 4).unwrap() < 1e-12);
        assert!(casimir_su11_check(&b, 31).is_err());
    }
}
