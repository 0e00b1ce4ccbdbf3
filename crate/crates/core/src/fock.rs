//! Truncated N-mode Fock spaces and sparse state vectors.
//!
//! A [`FockBasis`] holds every occupation tuple with total quanta
//! `n_tot <= cutoff`, ordered by total degree and then by descending
//! occupation of the earlier modes: for two modes and cutoff 2 the order is
//! `(0,0) (1,0) (0,1) (2,0) (1,1) (0,2)`.
//!
//! [`StateVector`] stores only nonzero amplitudes, keyed by basis ordinal, and
//! carries the probability weight that operators have pushed above the cutoff.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ln_factorial;

/// Largest basis built without an explicit override.
pub const DEFAULT_MEMORY_GUARD: usize = 1_000_000;

/// Occupation numbers `(n_1, ..., n_N)` of a number state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(occupations: Vec<u32>) -> Self {
        MultiIndex(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.total())
    }

    /// Occupation of 1-based mode `i`.
    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode - 1]
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Parity of `n_tot` together with the u(p,q) sector eigenvalue
/// `l = (n_1 + ... + n_p) - (n_{p+1} + ... + n_N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorLabel {
    pub parity: Parity,
    pub l: i64,
    pub p: usize,
    pub q: usize,
}

pub fn sector_of(n: &MultiIndex, p: usize, q: usize) -> Result<SectorLabel> {
    if p + q != n.modes() {
        return Err(Error::InvalidSplit {
            p,
            q,
            modes: n.modes(),
        });
    }
    let occ = n.occupations();
    let np: i64 = occ[..p].iter().map(|&x| x as i64).sum();
    let nq: i64 = occ[p..].iter().map(|&x| x as i64).sum();
    Ok(SectorLabel {
        parity: n.parity(),
        l: np - nq,
        p,
        q,
    })
}

/// `binomial(cutoff + modes, modes)`, saturating.
pub fn basis_size(modes: usize, cutoff: u32) -> u128 {
    let n = cutoff as u128 + modes as u128;
    let k = modes.min(cutoff as usize) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Debug)]
pub struct FockBasis {
    modes: usize,
    cutoff: u32,
    states: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.cutoff == other.cutoff
    }
}

/// Serialized form of a basis: it is fully determined by `(modes, cutoff)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub modes: usize,
    pub cutoff: u32,
}

impl FockBasis {
    pub fn new(modes: usize, cutoff: u32) -> Result<Arc<FockBasis>> {
        Self::with_guard(modes, cutoff, DEFAULT_MEMORY_GUARD)
    }

    pub fn with_guard(modes: usize, cutoff: u32, guard: usize) -> Result<Arc<FockBasis>> {
        if modes == 0 {
            return Err(Error::ZeroModes);
        }
        let size = basis_size(modes, cutoff);
        // Each state stores `modes` occupations, so a huge mode count is caught too.
        if size > guard as u128 || modes > guard {
            return Err(Error::MemoryGuard {
                modes,
                cutoff,
                size,
                guard,
            });
        }
        let mut states = Vec::with_capacity(size as usize);
        let mut scratch = vec![0u32; modes];
        for degree in 0..=cutoff {
            fill_degree(&mut scratch, 0, degree, &mut states);
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(k, m)| (m.clone(), k))
            .collect();
        Ok(Arc::new(FockBasis {
            modes,
            cutoff,
            states,
            index,
        }))
    }

    pub fn from_spec(spec: BasisSpec) -> Result<Arc<FockBasis>> {
        Self::new(spec.modes, spec.cutoff)
    }

    pub fn spec(&self) -> BasisSpec {
        BasisSpec {
            modes: self.modes,
            cutoff: self.cutoff,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[MultiIndex] {
        &self.states
    }

    pub fn state(&self, ordinal: usize) -> &MultiIndex {
        &self.states[ordinal]
    }

    pub fn ordinal(&self, n: &MultiIndex) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn ordinal_of(&self, occupations: &[u32]) -> Option<usize> {
        // HashMap lookup needs an owned key of the same type.
        self.index.get(&MultiIndex(occupations.to_vec())).copied()
    }

    /// Ordinals with `n_tot <= max_total`; they form a prefix of the basis.
    pub fn interior(&self, max_total: u32) -> std::ops::Range<usize> {
        let end = if max_total >= self.cutoff {
            self.len()
        } else {
            basis_size(self.modes, max_total) as usize
        };
        0..end
    }
}

impl fmt::Display for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FockBasis(modes={}, cutoff={})", self.modes, self.cutoff)
    }
}

fn fill_degree(scratch: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos == scratch.len() - 1 {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        scratch[pos] = first;
        fill_degree(scratch, pos + 1, remaining - first, out);
    }
    scratch[pos] = 0;
}

/// Sparse complex amplitudes over a shared basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: BTreeMap<usize, C64>,
    truncation_loss: f64,
}

impl StateVector {
    pub fn zero(basis: &Arc<FockBasis>) -> Self {
        StateVector {
            basis: Arc::clone(basis),
            amplitudes: BTreeMap::new(),
            truncation_loss: 0.0,
        }
    }

    pub fn basis_state(basis: &Arc<FockBasis>, occupations: &[u32]) -> Result<Self> {
        let k = basis
            .ordinal_of(occupations)
            .ok_or_else(|| Error::NotInBasis(occupations.to_vec()))?;
        let mut v = Self::zero(basis);
        v.amplitudes.insert(k, C64::new(1.0, 0.0));
        Ok(v)
    }

    pub fn from_ordinals<I>(basis: &Arc<FockBasis>, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, C64)>,
    {
        let mut v = Self::zero(basis);
        for (k, a) in entries {
            assert!(k < basis.len(), "ordinal {k} outside basis");
            v.add_at(k, a);
        }
        v
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub(crate) fn add_loss(&mut self, weight: f64) {
        self.truncation_loss += weight;
    }

    pub fn nnz(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude_at(&self, ordinal: usize) -> C64 {
        self.amplitudes.get(&ordinal).copied().unwrap_or_default()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> C64 {
        self.basis
            .ordinal_of(occupations)
            .map(|k| self.amplitude_at(k))
            .unwrap_or_default()
    }

    /// Nonzero entries in basis order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.amplitudes.iter().map(|(&k, &a)| (k, a))
    }

    pub fn add_at(&mut self, ordinal: usize, amp: C64) {
        if amp == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.amplitudes.entry(ordinal).or_default();
        *slot += amp;
        if *slot == C64::new(0.0, 0.0) {
            self.amplitudes.remove(&ordinal);
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: C64) -> StateVector {
        let mut out = Self::zero(&self.basis);
        for (k, a) in self.iter() {
            out.add_at(k, c * a);
        }
        out.truncation_loss = self.truncation_loss * c.norm_sqr();
        out
    }

    /// `self + c * other`; losses add.
    pub fn axpy(&self, c: C64, other: &StateVector) -> Result<StateVector> {
        check_same(&self.basis, &other.basis)?;
        let mut out = self.clone();
        for (k, a) in other.iter() {
            out.add_at(k, c * a);
        }
        out.truncation_loss += other.truncation_loss * c.norm_sqr();
        Ok(out)
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    /// Drop all entries outside `keep`, leaving the loss accumulator untouched.
    pub fn restricted<F: Fn(&MultiIndex) -> bool>(&self, keep: F) -> StateVector {
        let mut out = Self::zero(&self.basis);
        for (k, a) in self.iter() {
            if keep(self.basis.state(k)) {
                out.amplitudes.insert(k, a);
            }
        }
        out.truncation_loss = self.truncation_loss;
        out
    }

    /// Re-express the state on a basis with the same modes and a cutoff at
    /// least as large.
    pub fn embed(&self, target: &Arc<FockBasis>) -> Result<StateVector> {
        if target.modes() != self.basis.modes() || target.cutoff() < self.basis.cutoff() {
            return Err(Error::BasisMismatch {
                left: self.basis.to_string(),
                right: target.to_string(),
            });
        }
        let mut out = Self::zero(target);
        for (k, a) in self.iter() {
            // Ordering is a prefix-stable enumeration, so ordinals carry over.
            out.amplitudes.insert(k, a);
        }
        out.truncation_loss = self.truncation_loss;
        Ok(out)
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            basis: self.basis.spec(),
            amplitudes: self
                .iter()
                .map(|(k, a)| AmplitudeRecord {
                    occupations: self.basis.state(k).occupations().to_vec(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn from_record(record: &StateRecord) -> Result<StateVector> {
        let basis = FockBasis::from_spec(record.basis)?;
        let mut v = Self::zero(&basis);
        for r in &record.amplitudes {
            let k = basis
                .ordinal_of(&r.occupations)
                .ok_or_else(|| Error::NotInBasis(r.occupations.clone()))?;
            if !(r.re.is_finite() && r.im.is_finite()) {
                return Err(Error::Json(format!(
                    "non-finite amplitude at {:?}",
                    r.occupations
                )));
            }
            if v.amplitudes.contains_key(&k) {
                return Err(Error::Json(format!(
                    "duplicate occupations {:?}",
                    r.occupations
                )));
            }
            v.add_at(k, C64::new(r.re, r.im));
        }
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("state record serializes")
    }

    pub fn from_json(text: &str) -> Result<StateVector> {
        let record: StateRecord =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_record(&record)
    }
}

/// JSON form of a state: `{"basis": {"modes", "cutoff"}, "amplitudes": [{"occupations", "re", "im"}]}`.
///
/// `serde_json` prints the shortest decimal that round-trips, so amplitudes
/// survive a write/read cycle bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub basis: BasisSpec,
    pub amplitudes: Vec<AmplitudeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeRecord {
    pub occupations: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

pub(crate) fn check_same(a: &Arc<FockBasis>, b: &Arc<FockBasis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::BasisMismatch {
            left: a.to_string(),
            right: b.to_string(),
        })
    }
}

/// `sum conj(u_n) v_n`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<C64> {
    check_same(&u.basis, &v.basis)?;
    let (small, large, flip) = if u.nnz() <= v.nnz() {
        (u, v, false)
    } else {
        (v, u, true)
    };
    let mut acc = C64::new(0.0, 0.0);
    for (k, a) in small.iter() {
        if let Some(&b) = large.amplitudes.get(&k) {
            acc += if flip { b.conj() * a } else { a.conj() * b };
        }
    }
    Ok(acc)
}

/// Poisson probability `e^{-lambda} lambda^n / n!`.
pub(crate) fn poisson_pmf(lambda: f64, n: u32) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp()
}

/// `P(N > cutoff)` for `N ~ Poisson(lambda)`.
pub(crate) fn poisson_tail(lambda: f64, cutoff: u32) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    if (cutoff as f64) < lambda {
        let head: f64 = (0..=cutoff).map(|n| poisson_pmf(lambda, n)).sum();
        return (1.0 - head).max(0.0);
    }
    let mut n = cutoff + 1;
    let mut term = poisson_pmf(lambda, n);
    let mut sum = 0.0;
    while term > 0.0 {
        sum += term;
        n += 1;
        term *= lambda / n as f64;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

/// Probability weight of the multimode Glauber state `|alpha>` that lies
/// above `n_tot = cutoff`. The total quanta of `|alpha>` are Poisson with mean
/// `|alpha|^2`, so the multimode tail reduces to a one-dimensional sum.
pub fn coherent_tail_bound(alpha: &[C64], cutoff: u32) -> f64 {
    let lambda: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    poisson_tail(lambda, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(modes: usize, cutoff: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let total = (cutoff as usize + 1).pow(modes as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = Vec::with_capacity(modes);
            for _ in 0..modes {
                v.push((c % (cutoff as usize + 1)) as u32);
                c /= cutoff as usize + 1;
            }
            if v.iter().sum::<u32>() <= cutoff {
                out.push(v);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn small_bases_match_listing() {
        let b = FockBasis::new(1, 3).unwrap();
        let got: Vec<_> = b.states().iter().map(|m| m.occupations().to_vec()).collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![2], vec![3]]);

        let b = FockBasis::new(2, 2).unwrap();
        let got: Vec<_> = b.states().iter().map(|m| m.occupations().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for modes in 1..=4 {
            for cutoff in 0..=8 {
                let b = FockBasis::new(modes, cutoff).unwrap();
                let mut got: Vec<_> =
                    b.states().iter().map(|m| m.occupations().to_vec()).collect();
                assert_eq!(got.len() as u128, basis_size(modes, cutoff));
                got.sort();
                assert_eq!(got, brute_force(modes, cutoff), "N={modes} cutoff={cutoff}");
            }
        }
        assert_eq!(brute_force(3, 10).len(), 286);
        assert_eq!(FockBasis::new(3, 10).unwrap().len(), 286);
    }

    #[test]
    fn interior_is_a_prefix() {
        let b = FockBasis::new(3, 7).unwrap();
        let r = b.interior(4);
        assert!(b.states()[..r.end].iter().all(|m| m.total() <= 4));
        assert!(b.states()[r.end..].iter().all(|m| m.total() > 4));
    }

    #[test]
    fn rejects_zero_modes_and_guard() {
        assert_eq!(FockBasis::new(0, 3).unwrap_err(), Error::ZeroModes);
        assert!(matches!(
            FockBasis::new(6, 60).unwrap_err(),
            Error::MemoryGuard { .. }
        ));
        assert!(FockBasis::with_guard(2, 3, 5).is_err());
        // One state, but too many modes to store.
        assert!(matches!(
            FockBasis::new(usize::MAX, 0).unwrap_err(),
            Error::MemoryGuard { .. }
        ));
    }

    #[test]
    fn orthonormal_basis_states() {
        let b = FockBasis::new(2, 3).unwrap();
        let v00 = StateVector::basis_state(&b, &[0, 0]).unwrap();
        let v10 = StateVector::basis_state(&b, &[1, 0]).unwrap();
        let v01 = StateVector::basis_state(&b, &[0, 1]).unwrap();
        assert_eq!(inner_product(&v00, &v00).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(inner_product(&v10, &v01).unwrap(), C64::new(0.0, 0.0));
        assert!(StateVector::basis_state(&b, &[4, 0]).is_err());
    }

    #[test]
    fn basis_mismatch_is_an_error() {
        let a = FockBasis::new(2, 3).unwrap();
        let b = FockBasis::new(2, 4).unwrap();
        let u = StateVector::basis_state(&a, &[0, 0]).unwrap();
        let v = StateVector::basis_state(&b, &[0, 0]).unwrap();
        assert!(matches!(
            inner_product(&u, &v),
            Err(Error::BasisMismatch { .. })
        ));
        // Equal (modes, cutoff) built separately are the same space.
        let a2 = FockBasis::new(2, 3).unwrap();
        let w = StateVector::basis_state(&a2, &[0, 0]).unwrap();
        assert_eq!(inner_product(&u, &w).unwrap().re, 1.0);
    }

    #[test]
    fn sector_examples() {
        let s = sector_of(&MultiIndex::new(vec![2, 1]), 1, 1).unwrap();
        assert_eq!((s.parity, s.l), (Parity::Odd, 1));
        let s = sector_of(&MultiIndex::new(vec![0, 0, 0]), 2, 1).unwrap();
        assert_eq!((s.parity, s.l), (Parity::Even, 0));
        let s = sector_of(&MultiIndex::new(vec![3, 0, 2]), 1, 2).unwrap();
        assert_eq!((s.parity, s.l), (Parity::Odd, 1));
        assert!(sector_of(&MultiIndex::new(vec![1, 1]), 2, 1).is_err());
    }

    #[test]
    fn tail_examples() {
        assert_eq!(coherent_tail_bound(&[C64::new(0.0, 0.0)], 5), 0.0);
        let t = coherent_tail_bound(&[C64::new(1.0, 0.0)], 0);
        assert!((t - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!(coherent_tail_bound(&[C64::new(1.0, 0.0)], 20) < 1e-18);
        // brute-force Poisson tail, alpha=(1), cutoff 0: 1 - e^{-1} = 0.63212...
        assert!((t - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn tail_is_monotone() {
        let alpha = [C64::new(0.9, -0.4), C64::new(0.3, 1.1)];
        let mut prev = 1.0;
        for c in 0..40 {
            let t = coherent_tail_bound(&alpha, c);
            assert!(t <= prev, "cutoff {c}");
            prev = t;
        }
    }

    #[test]
    fn json_round_trip_is_bit_faithful() {
        let b = FockBasis::new(2, 3).unwrap();
        let v = StateVector::from_ordinals(
            &b,
            [
                (0, C64::new(0.1, 1.0 / 3.0)),
                (4, C64::new(-2.0f64.sqrt(), f64::MIN_POSITIVE)),
                (9, C64::new(std::f64::consts::PI, -1e-300)),
            ],
        );
        let back = StateVector::from_json(&v.to_json()).unwrap();
        for (k, a) in v.iter() {
            let b = back.amplitude_at(k);
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(back.nnz(), v.nnz());
    }

    #[test]
    fn json_rejects_foreign_occupations() {
        let text = r#"{"basis":{"modes":1,"cutoff":2},"amplitudes":[{"occupations":[3],"re":1.0,"im":0.0}]}"#;
        assert!(StateVector::from_json(text).is_err());
        let text = r#"{"basis":{"modes":2,"cutoff":2},"amplitudes":[{"occupations":[1],"re":1.0,"im":0.0}]}"#;
        assert!(StateVector::from_json(text).is_err());
    }
}
