//! Order processes in the switching-time encoding.
//!
//! An order process is an increasing, left-continuous family `Y(t)` of
//! partial orders with `Y(0) = D`. With finite support it is fully described
//! by the instant at which each pair switches on: pair `(j, k)` belongs to
//! `Y(t)` iff its switching time is strictly below `t`. Pairs that never
//! switch are simply absent from the map.
//!
//! Transitivity of every `Y(t)` is equivalent to the max-triangle
//! constraint `f(j,l) <= max(f(j,k), f(k,l))` on the map, which
//! [`OrderProcess::new`] enforces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::relation::{Element, Pair, PartialOrder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error("pair ({0},{0}) lies on the diagonal")]
    DiagonalPair(Element),
    #[error("switching time {t} of pair ({j},{k}) is not a finite nonnegative number")]
    InvalidTime { j: Element, k: Element, t: f64 },
    #[error("max-triangle constraint violated for ({j},{k},{l})")]
    ConstraintViolation { j: Element, k: Element, l: Element },
}

/// A finite-support order process, stored as its switching-time map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrderProcess {
    times: BTreeMap<Pair, f64>,
}

impl OrderProcess {
    /// The constant process `D`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates a switching-time map.
    ///
    /// Rejects diagonal keys and non-finite or negative times, then checks
    /// the max-triangle constraint. The reported triple is the
    /// lexicographically first `(j,k,l)` with `(j,k)` and `(k,l)` present
    /// whose bound fails.
    pub fn new(times: BTreeMap<Pair, f64>) -> Result<Self, ProcessError> {
        let mut clean = BTreeMap::new();
        for ((j, k), t) in times {
            if j == k {
                return Err(ProcessError::DiagonalPair(j));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(ProcessError::InvalidTime { j, k, t });
            }
            // -0.0 would otherwise sort below 0.0 in canonical forms
            clean.insert((j, k), t + 0.0);
        }
        let z = OrderProcess { times: clean };
        z.check_triangle()?;
        Ok(z)
    }

    /// Convenience constructor from `(j, k, t)` triples.
    pub fn from_triples<I>(triples: I) -> Result<Self, ProcessError>
    where
        I: IntoIterator<Item = (Element, Element, f64)>,
    {
        Self::new(triples.into_iter().map(|(j, k, t)| ((j, k), t)).collect())
    }

    /// The smallest valid process containing the given raw switching times:
    /// each pair gets the minimax (bottleneck) path value over the raw edges.
    /// Repeated edges keep their earliest time.
    pub fn closure<I>(raw: I) -> Result<Self, ProcessError>
    where
        I: IntoIterator<Item = (Pair, f64)>,
    {
        let mut edges: BTreeMap<Pair, f64> = BTreeMap::new();
        for ((j, k), t) in raw {
            if j == k {
                return Err(ProcessError::DiagonalPair(j));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(ProcessError::InvalidTime { j, k, t });
            }
            let e = edges.entry((j, k)).or_insert(f64::INFINITY);
            *e = e.min(t + 0.0);
        }
        Ok(OrderProcess {
            times: minimax_closure(&edges),
        })
    }

    pub(crate) fn from_valid_unchecked(times: BTreeMap<Pair, f64>) -> Self {
        let z = OrderProcess { times };
        debug_assert!(z.check_triangle().is_ok());
        z
    }

    fn check_triangle(&self) -> Result<(), ProcessError> {
        for (&(j, k), &a) in &self.times {
            for (&(_, l), &b) in self.times.range((k, Element::MIN)..=(k, Element::MAX)) {
                if l == j {
                    continue;
                }
                match self.times.get(&(j, l)) {
                    Some(&c) if c <= a.max(b) => {}
                    _ => return Err(ProcessError::ConstraintViolation { j, k, l }),
                }
            }
        }
        Ok(())
    }

    /// Switching time of `(j, k)`, `None` meaning the pair never switches on.
    pub fn time(&self, j: Element, k: Element) -> Option<f64> {
        self.times.get(&(j, k)).copied()
    }

    /// Present pairs with their switching times, sorted by pair.
    pub fn iter(&self) -> impl Iterator<Item = (Pair, f64)> + '_ {
        self.times.iter().map(|(&p, &t)| (p, t))
    }

    pub fn times(&self) -> &BTreeMap<Pair, f64> {
        &self.times
    }

    /// Number of present pairs.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True for the constant process `D`.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The relation `Y(t) = {(j,k) : f(j,k) < t}`.
    pub fn eval(&self, t: f64) -> PartialOrder {
        PartialOrder::from_closed_unchecked(
            self.times
                .iter()
                .filter(|&(_, &s)| s < t)
                .map(|(&p, _)| p)
                .collect(),
        )
    }

    /// Pointwise join, computed in the encoding as a minimax path closure
    /// over the merged edge set with edge weight `min(f_y, f_z)`.
    pub fn join(&self, other: &OrderProcess) -> OrderProcess {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut merged = self.times.clone();
        for (&p, &t) in &other.times {
            let e = merged.entry(p).or_insert(t);
            *e = e.min(t);
        }
        OrderProcess {
            times: minimax_closure(&merged),
        }
    }

    /// `self <= other`: every pair of `self` switches on in `other` no later.
    pub fn leq(&self, other: &OrderProcess) -> bool {
        self.times
            .iter()
            .all(|(p, &t)| other.times.get(p).is_some_and(|&s| s <= t))
    }

    /// Membership of `self` in `Q_z = {Y : z <= Y}`.
    pub fn in_q(&self, z: &OrderProcess) -> bool {
        z.leq(self)
    }

    /// Delays every switching time by `eps`. The result is below `self`.
    pub fn shift_minus(&self, eps: f64) -> OrderProcess {
        assert!(eps > 0.0, "shift needs a positive eps, got {eps}");
        OrderProcess {
            times: self.times.iter().map(|(&p, &t)| (p, t + eps)).collect(),
        }
    }

    /// Advances every switching time by `eps`, clamping at zero.
    pub fn shift_plus(&self, eps: f64) -> OrderProcess {
        assert!(eps > 0.0, "shift needs a positive eps, got {eps}");
        OrderProcess {
            times: self
                .times
                .iter()
                .map(|(&p, &t)| (p, (t - eps).max(0.0)))
                .collect(),
        }
    }

    /// Elements incident to a present pair.
    pub fn support(&self) -> BTreeSet<Element> {
        self.times.keys().flat_map(|&(j, k)| [j, k]).collect()
    }

    /// Renames every element through `f`, which must be injective on the
    /// support.
    pub fn relabel<F>(&self, f: F) -> OrderProcess
    where
        F: Fn(Element) -> Element,
    {
        let times: BTreeMap<Pair, f64> = self
            .times
            .iter()
            .map(|(&(j, k), &t)| ((f(j), f(k)), t))
            .collect();
        assert_eq!(times.len(), self.times.len(), "relabeling is not injective");
        OrderProcess { times }
    }

    /// Distinct switching times in increasing order.
    pub fn switching_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.times.values().copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

impl fmt::Display for OrderProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, ((j, k), t)) in self.times.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({j},{k})->{t}")?;
        }
        f.write_str("}")
    }
}

/// Minimax path closure of a raw edge map, restricted to simple paths
/// between distinct endpoints. Floyd-Warshall over the incident vertices.
pub(crate) fn minimax_closure(edges: &BTreeMap<Pair, f64>) -> BTreeMap<Pair, f64> {
    let verts: Vec<Element> = edges
        .keys()
        .flat_map(|&(j, k)| [j, k])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = verts.len();
    let idx = |v: Element| verts.binary_search(&v).expect("vertex in support");
    let mut d = vec![f64::INFINITY; n * n];
    for (&(j, k), &t) in edges {
        d[idx(j) * n + idx(k)] = t;
    }
    minimax_dense(&mut d, n);
    let mut out = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let t = d[a * n + b];
            if a != b && t.is_finite() {
                out.insert((verts[a], verts[b]), t);
            }
        }
    }
    out
}

/// In-place minimax closure of a dense `n x n` weight matrix. Diagonal
/// entries are ignored by callers.
pub(crate) fn minimax_dense(d: &mut [f64], n: usize) {
    for m in 0..n {
        for a in 0..n {
            let am = d[a * n + m];
            if a == m || am == f64::INFINITY {
                continue;
            }
            for b in 0..n {
                let via = am.max(d[m * n + b]);
                if via < d[a * n + b] {
                    d[a * n + b] = via;
                }
            }
        }
    }
}

/// Evaluation times at which step functions built from `times` can change:
/// every distinct time `t` together with `t - delta` and `t + delta`, and
/// zero. `delta` is a quarter of the smallest positive gap (or `0.25` when
/// there is at most one distinct time).
pub fn time_grid<I>(times: I) -> Vec<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut ts: Vec<f64> = times.into_iter().filter(|t| t.is_finite()).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let delta = ts
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let delta = if delta.is_finite() { delta / 4.0 } else { 0.25 };
    let mut grid = vec![0.0];
    for &t in &ts {
        if t - delta >= 0.0 {
            grid.push(t - delta);
        }
        grid.push(t);
        grid.push(t + delta);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(triples: &[(Element, Element, f64)]) -> OrderProcess {
        OrderProcess::from_triples(triples.iter().copied()).unwrap()
    }

    #[test]
    fn validate_examples() {
        z(&[(1, 2, 0.5)]);
        z(&[(1, 2, 0.5), (2, 3, 0.7), (1, 3, 0.7)]);
        let err = OrderProcess::from_triples([(1, 2, 0.5), (2, 3, 0.7)]).unwrap_err();
        assert_eq!(err, ProcessError::ConstraintViolation { j: 1, k: 2, l: 3 });
        // bound is too late
        let err = OrderProcess::from_triples([(1, 2, 0.5), (2, 3, 0.7), (1, 3, 0.8)]).unwrap_err();
        assert_eq!(err, ProcessError::ConstraintViolation { j: 1, k: 2, l: 3 });
    }

    #[test]
    fn validate_rejects_bad_entries() {
        assert_eq!(
            OrderProcess::from_triples([(4, 4, 1.0)]).unwrap_err(),
            ProcessError::DiagonalPair(4)
        );
        for t in [-1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                OrderProcess::from_triples([(1, 2, t)]),
                Err(ProcessError::InvalidTime { .. })
            ));
        }
    }

    #[test]
    fn two_cycles_need_both_directions_bounded() {
        // (1,2),(2,1) present: triples (1,2,1) and (2,1,2) have l == j, so vacuous
        z(&[(1, 2, 0.3), (2, 1, 0.9)]);
    }

    #[test]
    fn eval_uses_strict_threshold() {
        let y = z(&[(1, 2, 1.0)]);
        assert!(y.eval(1.0).is_empty());
        assert_eq!(y.eval(1.5).pairs().collect::<Vec<_>>(), vec![(1, 2)]);
        assert!(y.eval(0.0).is_empty());
        assert!(z(&[(1, 2, 0.0)]).eval(0.0).is_empty());
        assert!(!z(&[(1, 2, 0.0)]).eval(1e-300).is_empty());
    }

    #[test]
    fn join_examples() {
        let y = z(&[(1, 2, 1.0)]);
        let w = z(&[(2, 3, 2.0)]);
        assert_eq!(y.join(&OrderProcess::empty()), y);
        assert_eq!(y.join(&y), y);
        assert_eq!(y.join(&w), z(&[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 2.0)]));
    }

    #[test]
    fn join_takes_the_best_path() {
        let y = z(&[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]);
        let w = z(&[(1, 3, 3.0), (3, 4, 0.5), (1, 4, 3.0)]);
        let j = y.join(&w);
        assert_eq!(j.time(1, 4), Some(1.0));
        assert_eq!(j.time(2, 4), Some(1.0));
        assert_eq!(j.time(4, 1), None);
    }

    #[test]
    fn leq_and_in_q_examples() {
        let empty = OrderProcess::empty();
        assert!(empty.leq(&z(&[(1, 2, 3.0)])));
        assert!(z(&[(1, 2, 2.0)]).leq(&z(&[(1, 2, 1.0)])));
        assert!(!z(&[(1, 2, 1.0)]).leq(&z(&[(1, 2, 2.0)])));

        assert!(z(&[(5, 6, 1.0)]).in_q(&empty));
        assert!(z(&[(1, 2, 0.4), (3, 4, 9.0)]).in_q(&z(&[(1, 2, 0.5)])));
        assert!(!z(&[(1, 2, 0.6)]).in_q(&z(&[(1, 2, 0.5)])));
    }

    #[test]
    fn shift_examples() {
        let y = z(&[(1, 2, 1.0)]);
        assert_eq!(y.shift_minus(0.25), z(&[(1, 2, 1.25)]));
        assert_eq!(
            OrderProcess::empty().shift_minus(0.3),
            OrderProcess::empty()
        );
        assert!(y.shift_minus(0.3).leq(&y));
        assert_eq!(y.shift_plus(0.25), z(&[(1, 2, 0.75)]));
        assert_eq!(y.shift_plus(2.0), z(&[(1, 2, 0.0)]));
        assert_eq!(y.shift_plus(0.25).shift_minus(0.25), y);
        // early pairs get pushed back to eps: the round trip loses them on [0, eps]
        let early = z(&[(1, 2, 0.1)]);
        let back = early.shift_plus(0.25).shift_minus(0.25);
        assert_eq!(back, z(&[(1, 2, 0.25)]));
        assert!(back.leq(&early) && back != early);
    }

    #[test]
    fn support_examples() {
        assert!(OrderProcess::empty().support().is_empty());
        let y = z(&[(1, 2, 0.5), (7, 1, 3.0), (7, 2, 3.0)]);
        assert_eq!(y.support(), [1, 2, 7].into());
    }

    #[test]
    fn closure_matches_loader_example() {
        let c = OrderProcess::closure([((1, 2), 0.5), ((2, 3), 0.7)]).unwrap();
        assert_eq!(c, z(&[(1, 2, 0.5), (2, 3, 0.7), (1, 3, 0.7)]));
        let dup = OrderProcess::closure([((1, 2), 0.5), ((1, 2), 0.2)]).unwrap();
        assert_eq!(dup, z(&[(1, 2, 0.2)]));
    }

    #[test]
    fn grid_brackets_every_time() {
        let g = time_grid([1.0, 2.0, 2.0]);
        assert_eq!(g, vec![0.0, 0.75, 1.0, 1.25, 1.75, 2.0, 2.25]);
        assert_eq!(time_grid([]), vec![0.0]);
        assert_eq!(time_grid([0.0]), vec![0.0, 0.25]);
    }
}
