//! Isomorphy classes of finite-support order processes.
//!
//! Two processes are isomorphic when one is a relabeling of the other. The
//! class map [`Canonicalizer::g`] picks a canonical representative whose
//! support is `{0, .., s-1}`: among all relabelings onto that segment, the
//! one whose sorted `(j, k, t)` triple list is lexicographically least.
//!
//! Classes form an abelian, non-idempotent semigroup under
//! [`Canonicalizer::add`]: the join of representatives with disjoint
//! supports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::measures::PhiEstimate;
use crate::process::OrderProcess;
use crate::relation::{Element, Pair};

/// Largest support canonicalized by default.
pub const DEFAULT_MAX_SUPPORT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("support of size {size} exceeds the canonicalization bound {bound}")]
    SupportTooLarge { size: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("element {0} is mapped twice or hit twice")]
    NotInjective(Element),
    #[error("images do not cover the moved elements")]
    NotSurjective,
}

/// A bijection of the naturals moving finitely many elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Permutation {
    moved: BTreeMap<Element, Element>,
}

impl Permutation {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a permutation from `(from, to)` pairs. Fixed points may be
    /// omitted; the moved elements must be permuted among themselves.
    pub fn from_images<I>(images: I) -> Result<Self, PermutationError>
    where
        I: IntoIterator<Item = (Element, Element)>,
    {
        let mut moved = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (a, b) in images {
            if moved.insert(a, b).is_some() {
                return Err(PermutationError::NotInjective(a));
            }
            if !targets.insert(b) {
                return Err(PermutationError::NotInjective(b));
            }
        }
        let sources: BTreeSet<Element> = moved.keys().copied().collect();
        if sources != targets {
            return Err(PermutationError::NotSurjective);
        }
        moved.retain(|a, b| a != b);
        Ok(Permutation { moved })
    }

    /// Swaps `a` and `b`.
    pub fn transposition(a: Element, b: Element) -> Self {
        Self::from_images([(a, b), (b, a)]).expect("a transposition is a bijection")
    }

    /// Uniformly random permutation of the given elements.
    pub fn random<R: Rng + ?Sized>(elements: &[Element], rng: &mut R) -> Self {
        let mut targets = elements.to_vec();
        targets.shuffle(rng);
        Self::from_images(elements.iter().copied().zip(targets))
            .expect("shuffle of distinct elements")
    }

    pub fn apply(&self, m: Element) -> Element {
        self.moved.get(&m).copied().unwrap_or(m)
    }

    pub fn is_identity(&self) -> bool {
        self.moved.is_empty()
    }

    /// Timepointwise action on a process: `(j, k)` becomes `(σj, σk)`.
    pub fn act(&self, z: &OrderProcess) -> OrderProcess {
        z.relabel(|m| self.apply(m))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moved.is_empty() {
            return f.write_str("id");
        }
        let parts: Vec<String> = self
            .moved
            .iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// The canonical representative of an isomorphy class.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoClass {
    rep: OrderProcess,
}

impl IsoClass {
    /// The class of the constant process `D`.
    pub fn neutral() -> Self {
        IsoClass {
            rep: OrderProcess::empty(),
        }
    }

    /// Canonical representative, supported on `{0, .., s-1}`.
    pub fn rep(&self) -> &OrderProcess {
        &self.rep
    }

    /// Size of the support of the representative.
    pub fn support_size(&self) -> usize {
        self.rep.support().len()
    }
}

impl fmt::Display for IsoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

/// Brute-force canonical labeling with a bound on the support size.
#[derive(Clone, Copy, Debug)]
pub struct Canonicalizer {
    max_support: usize,
}

impl Default for Canonicalizer {
    fn default() -> Self {
        Canonicalizer {
            max_support: DEFAULT_MAX_SUPPORT,
        }
    }
}

impl Canonicalizer {
    pub fn with_bound(max_support: usize) -> Self {
        Canonicalizer { max_support }
    }

    pub fn max_support(&self) -> usize {
        self.max_support
    }

    /// The isomorphy class of `z`.
    pub fn g(&self, z: &OrderProcess) -> Result<IsoClass, CanonError> {
        let support: Vec<Element> = z.support().into_iter().collect();
        let s = support.len();
        if s > self.max_support {
            return Err(CanonError::SupportTooLarge {
                size: s,
                bound: self.max_support,
            });
        }
        let idx = |v: Element| support.binary_search(&v).expect("in support");
        let mut w = vec![f64::INFINITY; s * s];
        for ((j, k), t) in z.iter() {
            w[idx(j) * s + idx(k)] = t;
        }

        let mut search = LabelSearch {
            s,
            w: &w,
            best: None,
            best_order: Vec::new(),
        };
        let all: Vec<usize> = (0..s).collect();
        let blocks = if s == 0 { Vec::new() } else { vec![all] };
        search.descend(&mut Vec::with_capacity(s), blocks, &mut Vec::new());

        let mut label = vec![0 as Element; s];
        for (l, &v) in search.best_order.iter().enumerate() {
            label[v] = l as Element;
        }
        let rep = z.relabel(|m| label[idx(m)]);
        Ok(IsoClass { rep })
    }

    /// Sum of classes: join of disjointly supported representatives.
    pub fn add(&self, a: &IsoClass, b: &IsoClass) -> Result<IsoClass, CanonError> {
        let size = a.support_size() + b.support_size();
        if size > self.max_support {
            return Err(CanonError::SupportTooLarge {
                size,
                bound: self.max_support,
            });
        }
        let offset = a.support_size() as Element;
        let shifted = b.rep.relabel(|m| m + offset);
        // no path can cross between the two components, so the union is closed
        let mut times: BTreeMap<Pair, f64> = a.rep.times().clone();
        times.extend(shifted.iter());
        self.g(&OrderProcess::from_valid_unchecked(times))
    }
}

/// Shorthand for [`Canonicalizer::g`] with the default bound.
pub fn g(z: &OrderProcess) -> Result<IsoClass, CanonError> {
    Canonicalizer::default().g(z)
}

/// Shorthand for [`Canonicalizer::add`] with the default bound.
pub fn add(a: &IsoClass, b: &IsoClass) -> Result<IsoClass, CanonError> {
    Canonicalizer::default().add(a, b)
}

// Row-major lexicographic minimisation of the dense time matrix (absent pairs
// as +inf, diagonal skipped). For equal pair counts this order coincides with
// the lexicographic order of sorted (j, k, t) triple lists. Labels are handed
// out in order; once vertex `v` takes label `r`, its row is only minimal if
// every block of still-unlabeled vertices is sorted by `v`'s times, so blocks
// are refined accordingly and only the tied candidates are branched on.
struct LabelSearch<'a> {
    s: usize,
    w: &'a [f64],
    best: Option<Vec<f64>>,
    best_order: Vec<usize>,
}

impl LabelSearch<'_> {
    fn descend(&mut self, order: &mut Vec<usize>, blocks: Vec<Vec<usize>>, prefix: &mut Vec<f64>) {
        if blocks.is_empty() {
            if self.best.as_ref().is_none_or(|b| lex_less(prefix, b)) {
                self.best = Some(prefix.clone());
                self.best_order = order.clone();
            }
            return;
        }

        let mut rows: Vec<(usize, Vec<f64>, Vec<Vec<usize>>)> = blocks[0]
            .iter()
            .map(|&v| {
                let (row, refined) = self.row_for(v, order, &blocks);
                (v, row, refined)
            })
            .collect();
        let min_row = rows
            .iter()
            .map(|(_, r, _)| r)
            .min_by(|a, b| lex_cmp(a, b))
            .expect("nonempty block")
            .clone();
        rows.retain(|(_, r, _)| lex_cmp(r, &min_row).is_eq());

        let mark = prefix.len();
        prefix.extend_from_slice(&min_row);
        if let Some(best) = &self.best {
            if lex_cmp(prefix, &best[..prefix.len()]).is_gt() {
                prefix.truncate(mark);
                return;
            }
        }
        for (v, _, refined) in rows {
            order.push(v);
            self.descend(order, refined, prefix);
            order.pop();
        }
        prefix.truncate(mark);
    }

    fn row_for(
        &self,
        v: usize,
        order: &[usize],
        blocks: &[Vec<usize>],
    ) -> (Vec<f64>, Vec<Vec<usize>>) {
        let s = self.s;
        let t = |x: usize| self.w[v * s + x];
        let mut row: Vec<f64> = order.iter().map(|&x| t(x)).collect();
        let mut refined = Vec::with_capacity(blocks.len() + 1);
        for (bi, block) in blocks.iter().enumerate() {
            let mut members: Vec<usize> = if bi == 0 {
                block.iter().copied().filter(|&x| x != v).collect()
            } else {
                block.clone()
            };
            members.sort_by(|&a, &b| t(a).total_cmp(&t(b)).then(a.cmp(&b)));
            row.extend(members.iter().map(|&x| t(x)));
            let mut start = 0;
            for i in 1..=members.len() {
                if i == members.len() || t(members[i]).total_cmp(&t(members[start])).is_ne() {
                    refined.push(members[start..i].to_vec());
                    start = i;
                }
            }
        }
        (row, refined)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    lex_cmp(a, b).is_lt()
}

/// Outcome of [`factorizes_over_g`].
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport {
    pub passed: bool,
    /// Largest `|φ(σz) - φ(z)|` over all tested pairs.
    pub worst_gap: f64,
    /// `(sample index, permutation index)` of the first failing pair.
    pub witness: Option<(usize, usize)>,
}

/// Tests whether `phi` is invariant under relabeling: `φ(σ·z) = φ(z)` for
/// every sample and permutation. Exact evaluators must agree exactly;
/// Monte Carlo ones within four combined standard errors.
pub fn factorizes_over_g<F, E>(
    phi: F,
    samples: &[OrderProcess],
    perms: &[Permutation],
) -> Result<FactorizationReport, E>
where
    F: Fn(&OrderProcess) -> Result<PhiEstimate, E>,
{
    let mut report = FactorizationReport {
        passed: true,
        worst_gap: 0.0,
        witness: None,
    };
    for (si, z) in samples.iter().enumerate() {
        let base = phi(z)?;
        for (pi, sigma) in perms.iter().enumerate() {
            let moved = phi(&sigma.act(z))?;
            let gap = (moved.value - base.value).abs();
            let tol = 4.0 * base.combined_stderr(&moved);
            report.worst_gap = report.worst_gap.max(gap);
            if gap > tol && report.passed {
                report.passed = false;
                report.witness = Some((si, pi));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(triples: &[(Element, Element, f64)]) -> OrderProcess {
        OrderProcess::from_triples(triples.iter().copied()).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g(&z(&[(7, 3, 0.5)])).unwrap().rep(), &z(&[(0, 1, 0.5)]));
        assert_eq!(g(&OrderProcess::empty()).unwrap(), IsoClass::neutral());
    }

    #[test]
    fn g_prefers_small_rows_first() {
        // 5 -> 9 at 2.0, 9 -> 5 at 1.0: the earlier edge leads the canonical list
        let c = g(&z(&[(5, 9, 2.0), (9, 5, 1.0)])).unwrap();
        assert_eq!(c.rep(), &z(&[(0, 1, 1.0), (1, 0, 2.0)]));
    }

    #[test]
    fn add_doubles() {
        let a = g(&z(&[(0, 1, 1.0)])).unwrap();
        let sum = add(&a, &a).unwrap();
        assert_eq!(sum.rep(), &z(&[(0, 1, 1.0), (2, 3, 1.0)]));
        assert_eq!(add(&a, &IsoClass::neutral()).unwrap(), a);
    }

    #[test]
    fn bound_is_enforced() {
        let chain: Vec<_> = (0..4).map(|i| (i, i + 1, 1.0)).collect();
        let big = OrderProcess::closure(chain.iter().map(|&(j, k, t)| ((j, k), t))).unwrap();
        let small = Canonicalizer::with_bound(4);
        assert_eq!(
            small.g(&big).unwrap_err(),
            CanonError::SupportTooLarge { size: 5, bound: 4 }
        );
        let pair = small.g(&z(&[(0, 1, 1.0)])).unwrap();
        let triple = small
            .g(&z(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]))
            .unwrap();
        assert!(small.add(&pair, &triple).is_err());
    }

    #[test]
    fn symmetric_structures_terminate() {
        let all: Vec<_> = (0..7u32)
            .flat_map(|j| (0..7u32).filter(move |&k| k != j).map(move |k| (j, k, 1.0)))
            .collect();
        let c = g(&z(&all)).unwrap();
        assert_eq!(c.rep(), &z(&all));
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::from_images([(1, 2), (2, 1)]).is_ok());
        assert_eq!(
            Permutation::from_images([(1, 2), (3, 2)]).unwrap_err(),
            PermutationError::NotInjective(2)
        );
        assert_eq!(
            Permutation::from_images([(1, 2)]).unwrap_err(),
            PermutationError::NotSurjective
        );
        let t = Permutation::transposition(1, 2);
        assert_eq!(t.act(&z(&[(1, 3, 0.5)])), z(&[(2, 3, 0.5)]));
        assert!(Permutation::from_images([(4, 4)]).unwrap().is_identity());
    }

    #[test]
    fn factorization_identity_always_passes() {
        let samples = vec![z(&[(1, 2, 0.5)])];
        let dirac = z(&[(1, 2, 0.5)]);
        let phi = |x: &OrderProcess| -> Result<PhiEstimate, ()> {
            Ok(PhiEstimate::exact(if dirac.in_q(x) { 1.0 } else { 0.0 }))
        };
        let r = factorizes_over_g(phi, &samples, &[Permutation::identity()]).unwrap();
        assert!(r.passed);
        let r = factorizes_over_g(phi, &samples, &[Permutation::transposition(1, 2)]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.witness, Some((0, 0)));
        assert_eq!(r.worst_gap, 1.0);
    }
}
