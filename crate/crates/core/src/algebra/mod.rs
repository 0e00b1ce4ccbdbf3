//! Boson-quadratic generators of sp(N,C), u(p,q) and one-mode su(1,1), and
//! their sparse action on truncated states.
//!
//! Generators are applied as compositions of ladder actions
//! `a|n> = sqrt(n)|n-1>`, `a^dag|n> = sqrt(n+1)|n+1>`. A raising step that would
//! leave the basis drops the amplitude and adds its weight to the result's
//! truncation-loss accumulator.

mod parse;
mod relations;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, MultiIndex, StateVector};

pub use parse::parse_generator;
pub use relations::{
    casimir_su11_check, commutator_residual, relation_lines, relations_suite, AlgebraName,
    RelationCase, RelationLine, RelationParams, RELATION_MARGIN,
};

/// Symbolic boson-quadratic operator. Mode indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Identity,
    Annihilate(usize),
    Create(usize),
    /// `a_i a_j`; `E(i,j)` and `E(j,i)` are the same operator.
    E(usize, usize),
    /// `a^dag_i a^dag_j`.
    Edag(usize, usize),
    /// `(a^dag_i a_j + a_j a^dag_i) / 2`.
    H(usize, usize),
    /// `(a^2 + a^dag^2) / 4` on a one-mode basis.
    K1,
    /// `i (a^2 - a^dag^2) / 4`.
    K2,
    /// `(2 a^dag a + 1) / 4`.
    K3,
    /// `K1 - i K2 = a^2 / 2`.
    Kminus,
    /// `K1 + i K2 = a^dag^2 / 2`.
    Kplus,
    /// `(H_ab + H_ba - delta_ab) / 2`, a generator of u(p) when both indices are in `1..=p`.
    Mp(usize, usize),
    /// `i (H_ba - H_ab)`.
    MpTilde(usize, usize),
    /// Same form as `Mp` on the indices `p+1..=N`.
    Mq(usize, usize),
    MqTilde(usize, usize),
    /// `sum_{a<=p} M_aa - sum_{m>p} M_mm`, diagonal with eigenvalue `l`.
    L { p: usize, q: usize },
    /// Abstract discrete-series lowering operator of Bargmann index `k = two_k/2`:
    /// `K_-|n> = sqrt(n (2k + n - 1)) |n-1>`.
    BgLower { two_k: u32 },
    /// `K_+|n> = sqrt((n+1)(2k+n)) |n+1>`.
    BgRaise { two_k: u32 },
    /// `K_3|n> = (k + n)|n>`.
    BgWeight { two_k: u32 },
    Scale(C64, Box<GeneratorSpec>),
    Sum(Vec<GeneratorSpec>),
    /// Operator product, applied right to left.
    Product(Vec<GeneratorSpec>),
}

impl GeneratorSpec {
    pub fn zero() -> Self {
        GeneratorSpec::Sum(Vec::new())
    }

    pub fn scale(c: impl Into<C64>, g: GeneratorSpec) -> Self {
        GeneratorSpec::Scale(c.into(), Box::new(g))
    }

    pub fn product(a: GeneratorSpec, b: GeneratorSpec) -> Self {
        GeneratorSpec::Product(vec![a, b])
    }

    /// Symmetric index order for `E`/`Edag`, recursively.
    pub fn canonical(&self) -> GeneratorSpec {
        use GeneratorSpec::*;
        match self {
            E(i, j) => E(*i.min(j), *i.max(j)),
            Edag(i, j) => Edag(*i.min(j), *i.max(j)),
            Scale(c, g) => Scale(*c, Box::new(g.canonical())),
            Sum(v) => Sum(v.iter().map(|g| g.canonical()).collect()),
            Product(v) => Product(v.iter().map(|g| g.canonical()).collect()),
            other => other.clone(),
        }
    }

    pub fn adjoint(&self) -> GeneratorSpec {
        use GeneratorSpec::*;
        match self {
            Annihilate(i) => Create(*i),
            Create(i) => Annihilate(*i),
            E(i, j) => Edag(*i, *j),
            Edag(i, j) => E(*i, *j),
            H(i, j) => H(*j, *i),
            Kminus => Kplus,
            Kplus => Kminus,
            BgLower { two_k } => BgRaise { two_k: *two_k },
            BgRaise { two_k } => BgLower { two_k: *two_k },
            Scale(c, g) => Scale(c.conj(), Box::new(g.adjoint())),
            Sum(v) => Sum(v.iter().map(|g| g.adjoint()).collect()),
            Product(v) => Product(v.iter().rev().map(|g| g.adjoint()).collect()),
            Identity | K1 | K2 | K3 | Mp(..) | MpTilde(..) | Mq(..) | MqTilde(..) | L { .. }
            | BgWeight { .. } => self.clone(),
        }
    }

    /// Checks every mode index against `modes` and the one-mode restriction.
    pub fn validate(&self, modes: usize) -> Result<()> {
        use GeneratorSpec::*;
        let check = |i: usize| {
            if i == 0 || i > modes {
                Err(Error::InvalidMode { index: i, modes })
            } else {
                Ok(())
            }
        };
        match self {
            Identity => Ok(()),
            Annihilate(i) | Create(i) => check(*i),
            E(i, j) | Edag(i, j) | H(i, j) | Mp(i, j) | MpTilde(i, j) | Mq(i, j)
            | MqTilde(i, j) => {
                check(*i)?;
                check(*j)
            }
            K1 | K2 | K3 | Kminus | Kplus => {
                if modes == 1 {
                    Ok(())
                } else {
                    Err(Error::OneModeOnly(self.to_string()))
                }
            }
            BgLower { two_k } | BgRaise { two_k } | BgWeight { two_k } => {
                if *two_k == 0 {
                    Err(Error::InvalidBargmannIndex(0))
                } else if modes != 1 {
                    Err(Error::OneModeOnly(self.to_string()))
                } else {
                    Ok(())
                }
            }
            L { p, q } => {
                if p + q == modes {
                    Ok(())
                } else {
                    Err(Error::InvalidSplit {
                        p: *p,
                        q: *q,
                        modes,
                    })
                }
            }
            Scale(_, g) => g.validate(modes),
            Sum(v) | Product(v) => v.iter().try_for_each(|g| g.validate(modes)),
        }
    }

    /// Largest number of quanta the operator can add to a state.
    pub fn max_raise(&self) -> u32 {
        use GeneratorSpec::*;
        match self {
            Create(_) | BgRaise { .. } => 1,
            Edag(..) | K1 | K2 | Kplus => 2,
            Scale(_, g) => g.max_raise(),
            Sum(v) => v.iter().map(|g| g.max_raise()).max().unwrap_or(0),
            Product(v) => v.iter().map(|g| g.max_raise()).sum(),
            _ => 0,
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratorSpec::*;
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[GeneratorSpec]| {
            write!(f, "{name}(")?;
            for (k, g) in v.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{g}")?;
            }
            write!(f, ")")
        };
        match self {
            Identity => write!(f, "I"),
            Annihilate(i) => write!(f, "a({i})"),
            Create(i) => write!(f, "adag({i})"),
            E(i, j) => write!(f, "E({i},{j})"),
            Edag(i, j) => write!(f, "Edag({i},{j})"),
            H(i, j) => write!(f, "H({i},{j})"),
            K1 => write!(f, "K1"),
            K2 => write!(f, "K2"),
            K3 => write!(f, "K3"),
            Kminus => write!(f, "Km"),
            Kplus => write!(f, "Kp"),
            Mp(i, j) => write!(f, "Mp({i},{j})"),
            MpTilde(i, j) => write!(f, "Mp_tilde({i},{j})"),
            Mq(i, j) => write!(f, "Mq({i},{j})"),
            MqTilde(i, j) => write!(f, "Mq_tilde({i},{j})"),
            L { p, q } => write!(f, "L({p},{q})"),
            BgLower { two_k } => write!(f, "BgKm({two_k})"),
            BgRaise { two_k } => write!(f, "BgKp({two_k})"),
            BgWeight { two_k } => write!(f, "BgK3({two_k})"),
            Scale(c, g) => write!(f, "Scale({:?},{:?},{g})", c.re, c.im),
            Sum(v) => list(f, "Sum", v),
            Product(v) => list(f, "Product", v),
        }
    }
}

// Elementary actions on sparse states. The output's loss accumulator holds only
// the weight dropped by that action.

fn shifted(n: &MultiIndex, mode: usize, delta: i32) -> Vec<u32> {
    let mut occ = n.occupations().to_vec();
    occ[mode - 1] = (occ[mode - 1] as i64 + delta as i64) as u32;
    occ
}

fn lower(v: &StateVector, mode: usize) -> StateVector {
    let basis = v.basis();
    let mut out = StateVector::zero(basis);
    for (k, a) in v.iter() {
        let n = basis.state(k);
        let m = n.get(mode);
        if m == 0 {
            continue;
        }
        let target = basis
            .ordinal_of(&shifted(n, mode, -1))
            .expect("lowering stays inside the basis");
        out.add_at(target, a * (m as f64).sqrt());
    }
    out
}

fn raise(v: &StateVector, mode: usize) -> StateVector {
    let basis = v.basis();
    let mut out = StateVector::zero(basis);
    for (k, a) in v.iter() {
        let n = basis.state(k);
        let m = n.get(mode);
        let amp = a * ((m + 1) as f64).sqrt();
        if n.total() >= basis.cutoff() {
            out.add_loss(amp.norm_sqr());
            continue;
        }
        let target = basis
            .ordinal_of(&shifted(n, mode, 1))
            .expect("raised state below cutoff is in the basis");
        out.add_at(target, amp);
    }
    out
}

fn diagonal<F: Fn(&MultiIndex) -> C64>(v: &StateVector, f: F) -> StateVector {
    let basis = v.basis();
    let mut out = StateVector::zero(basis);
    for (k, a) in v.iter() {
        out.add_at(k, a * f(basis.state(k)));
    }
    out
}

fn hop(v: &StateVector, create: usize, annihilate: usize) -> StateVector {
    raise(&lower(v, annihilate), create)
}

fn combine(terms: Vec<(C64, StateVector)>, basis: &Arc<FockBasis>) -> StateVector {
    let mut out = StateVector::zero(basis);
    for (c, t) in terms {
        out = out.axpy(c, &t).expect("terms share a basis");
    }
    out
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn apply_inner(spec: &GeneratorSpec, v: &StateVector) -> StateVector {
    use GeneratorSpec::*;
    let basis = v.basis();
    match spec {
        Identity => StateVector::from_ordinals(basis, v.iter()),
        Annihilate(i) => lower(v, *i),
        Create(i) => raise(v, *i),
        E(i, j) => lower(&lower(v, *j), *i),
        Edag(i, j) => raise(&raise(v, *j), *i),
        H(i, j) if i == j => diagonal(v, |n| re(n.get(*i) as f64 + 0.5)),
        // a_j a^dag_i = a^dag_i a_j for i != j; lowering first keeps the
        // boundary shell exact.
        H(i, j) => hop(v, *i, *j),
        K1 => combine(
            vec![(re(0.25), lower(&lower(v, 1), 1)), (re(0.25), raise(&raise(v, 1), 1))],
            basis,
        ),
        K2 => combine(
            vec![
                (C64::new(0.0, 0.25), lower(&lower(v, 1), 1)),
                (C64::new(0.0, -0.25), raise(&raise(v, 1), 1)),
            ],
            basis,
        ),
        K3 => diagonal(v, |n| re((2.0 * n.get(1) as f64 + 1.0) / 4.0)),
        Kminus => lower(&lower(v, 1), 1).scaled(re(0.5)),
        Kplus => raise(&raise(v, 1), 1).scaled(re(0.5)),
        Mp(i, j) | Mq(i, j) if i == j => diagonal(v, |n| re(n.get(*i) as f64)),
        Mp(i, j) | Mq(i, j) => combine(
            vec![(re(0.5), hop(v, *i, *j)), (re(0.5), hop(v, *j, *i))],
            basis,
        ),
        MpTilde(i, j) | MqTilde(i, j) if i == j => StateVector::zero(basis),
        MpTilde(i, j) | MqTilde(i, j) => combine(
            vec![
                (C64::new(0.0, 1.0), hop(v, *j, *i)),
                (C64::new(0.0, -1.0), hop(v, *i, *j)),
            ],
            basis,
        ),
        L { p, .. } => diagonal(v, |n| {
            let occ = n.occupations();
            let np: i64 = occ[..*p].iter().map(|&x| x as i64).sum();
            let nq: i64 = occ[*p..].iter().map(|&x| x as i64).sum();
            re((np - nq) as f64)
        }),
        BgLower { two_k } => {
            let tk = *two_k as f64;
            let mut out = StateVector::zero(basis);
                    for (k, a) in v.iter() {
                let n = basis.state(k).get(1);
                if n == 0 {
                    continue;
                }
                let nf = n as f64;
                let target = basis.ordinal_of(&[n - 1]).expect("in basis");
                out.add_at(target, a * (nf * (tk + nf - 1.0)).sqrt());
            }
            out
        }
        BgRaise { two_k } => {
            let tk = *two_k as f64;
            let mut out = StateVector::zero(basis);
                    for (k, a) in v.iter() {
                let n = basis.state(k).get(1);
                let nf = n as f64;
                let amp = a * ((nf + 1.0) * (tk + nf)).sqrt();
                match basis.ordinal_of(&[n + 1]) {
                    Some(target) => out.add_at(target, amp),
                    None => out.add_loss(amp.norm_sqr()),
                }
            }
            out
        }
        BgWeight { two_k } => diagonal(v, |n| re(*two_k as f64 / 2.0 + n.get(1) as f64)),
        Scale(c, g) => apply_inner(g, v).scaled(*c),
        Sum(terms) => {
            let mut out = StateVector::zero(basis);
            for t in terms {
                out = out.axpy(re(1.0), &apply_inner(t, v)).expect("same basis");
            }
            out
        }
        Product(factors) => {
            let mut cur = v.clone();
            let mut dropped = 0.0;
            for g in factors.iter().rev() {
                cur = apply_inner(g, &cur);
                dropped += cur.truncation_loss();
            }
            let mut out = StateVector::from_ordinals(basis, cur.iter());
            out.add_loss(dropped);
            out
        }
    }
}

/// Image of `v` under `spec`. The result's truncation loss counts only the
/// weight dropped by this application.
pub fn apply_generator(spec: &GeneratorSpec, v: &StateVector) -> Result<StateVector> {
    spec.validate(v.basis().modes())?;
    let fresh = StateVector::from_ordinals(v.basis(), v.iter());
    Ok(apply_inner(spec, &fresh))
}

/// Dense matrix of `spec` on the basis, columns indexed by ordinal.
pub fn materialize(spec: &GeneratorSpec, basis: &Arc<FockBasis>) -> Result<DMatrix<C64>> {
    spec.validate(basis.modes())?;
    let n = basis.len();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for col in 0..n {
        let e = StateVector::from_ordinals(basis, [(col, re(1.0))]);
        for (row, a) in apply_inner(spec, &e).iter() {
            m[(row, col)] = a;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner_product;
    use GeneratorSpec::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn ladder_examples() {
        let b = FockBasis::new(2, 6).unwrap();
        let vac = StateVector::basis_state(&b, &[0, 0]).unwrap();
        assert!(apply_generator(&Annihilate(1), &vac).unwrap().is_zero());

        let v = StateVector::basis_state(&b, &[2, 3]).unwrap();
        let w = apply_generator(&E(1, 2), &v).unwrap();
        assert_eq!(w.nnz(), 1);
        assert!(close(w.amplitude(&[1, 2]), re(6f64.sqrt()), 1e-15));

        let b1 = FockBasis::new(1, 10).unwrap();
        for n in 0..=10u32 {
            let v = StateVector::basis_state(&b1, &[n]).unwrap();
            let w = apply_generator(&K3, &v).unwrap();
            assert_eq!(w.amplitude(&[n]), re(n as f64 / 2.0 + 0.25));
        }
    }

    #[test]
    fn create_drops_and_accounts() {
        let b = FockBasis::new(1, 3).unwrap();
        let v = StateVector::basis_state(&b, &[3]).unwrap();
        let w = apply_generator(&Create(1), &v).unwrap();
        assert!(w.is_zero());
        assert!((w.truncation_loss() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_indices_rejected() {
        let b = FockBasis::new(2, 4).unwrap();
        let v = StateVector::basis_state(&b, &[0, 0]).unwrap();
        assert!(matches!(
            apply_generator(&E(1, 3), &v),
            Err(Error::InvalidMode { index: 3, .. })
        ));
        assert!(apply_generator(&Annihilate(0), &v).is_err());
        assert!(apply_generator(&K1, &v).is_err());
        assert!(apply_generator(&L { p: 2, q: 1 }, &v).is_err());
    }

    #[test]
    fn e_symmetric_and_parity_preserving() {
        let b = FockBasis::new(3, 8).unwrap();
        for k in b.interior(8) {
            let v = StateVector::from_ordinals(&b, [(k, re(1.0))]);
            let n = b.state(k);
            let x = apply_generator(&E(1, 3), &v).unwrap();
            let y = apply_generator(&E(3, 1), &v).unwrap();
            assert_eq!(x.iter().collect::<Vec<_>>(), y.iter().collect::<Vec<_>>());
            for (j, _) in x.iter() {
                assert_eq!(b.state(j).total() + 2, n.total());
            }
        }
        assert_eq!(E(3, 1).canonical(), E(1, 3));
    }

    #[test]
    fn l_is_exactly_diagonal() {
        let b = FockBasis::new(3, 6).unwrap();
        for (k, n) in b.states().iter().enumerate() {
            let v = StateVector::from_ordinals(&b, [(k, re(1.0))]);
            let w = apply_generator(&L { p: 2, q: 1 }, &v).unwrap();
            let l = crate::fock::sector_of(n, 2, 1).unwrap().l as f64;
            assert_eq!(w.amplitude_at(k), re(l));
            assert!(w.nnz() <= 1);
        }
    }

    #[test]
    fn adjointness_on_interior() {
        let b = FockBasis::new(2, 8).unwrap();
        let u = StateVector::from_ordinals(&b, (0..10).map(|k| (k, C64::new(0.3 * k as f64, 0.1))));
        let v = StateVector::from_ordinals(&b, (0..10).map(|k| (k, C64::new(1.0, -0.2 * k as f64))));
        for g in [Annihilate(1), Create(2), E(1, 2), H(1, 2), Mp(1, 2), MpTilde(1, 2)] {
            let lhs = inner_product(&u, &apply_generator(&g, &v).unwrap()).unwrap();
            let rhs = inner_product(&apply_generator(&g.adjoint(), &u).unwrap(), &v).unwrap();
            assert!(close(lhs, rhs, 1e-13), "{g}");
        }
    }

    #[test]
    fn edag_then_e_is_normal_ordered_polynomial() {
        // a^2 a^dag^2 = n^2 + 3n + 2 on |n>; E_12 E^dag_12 = (n1+1)(n2+1).
        let b = FockBasis::new(2, 10).unwrap();
        for k in b.interior(6) {
            let n = b.state(k).clone();
            let v = StateVector::from_ordinals(&b, [(k, re(1.0))]);
            let w = apply_generator(&Product(vec![E(1, 1), Edag(1, 1)]), &v).unwrap();
            let n1 = n.get(1) as f64;
            assert!(close(w.amplitude_at(k), re((n1 + 1.0) * (n1 + 2.0)), 1e-12));
            let w = apply_generator(&Product(vec![E(1, 2), Edag(1, 2)]), &v).unwrap();
            let n2 = n.get(2) as f64;
            assert!(close(w.amplitude_at(k), re((n1 + 1.0) * (n2 + 1.0)), 1e-12));
        }
    }

    #[test]
    fn k_minus_matches_k1_k2() {
        let b = FockBasis::new(1, 12).unwrap();
        let km = Sum(vec![K1, GeneratorSpec::scale(C64::new(0.0, -1.0), K2)]);
        let kp = Sum(vec![K1, GeneratorSpec::scale(C64::new(0.0, 1.0), K2)]);
        let a = materialize(&km, &b).unwrap();
        let c = materialize(&Kminus, &b).unwrap();
        assert!((a - c).norm() < 1e-14);
        let a = materialize(&kp, &b).unwrap();
        let c = materialize(&Kplus, &b).unwrap();
        assert!((a - c).norm() < 1e-14);
    }

    #[test]
    fn materialized_matches_sparse() {
        let b = FockBasis::new(2, 5).unwrap();
        let g = Sum(vec![H(1, 2), GeneratorSpec::scale(2.0, E(1, 1))]);
        let m = materialize(&g, &b).unwrap();
        let v = StateVector::from_ordinals(&b, [(3, C64::new(1.0, 2.0)), (7, re(-1.0))]);
        let w = apply_generator(&g, &v).unwrap();
        for row in 0..b.len() {
            let dense = m[(row, 3)] * C64::new(1.0, 2.0) - m[(row, 7)];
            assert!(close(dense, w.amplitude_at(row), 1e-14));
        }
    }
}
