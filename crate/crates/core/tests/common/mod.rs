//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use orderproc::{Element, OrderProcess, PartialOrder, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn z(triples: &[(Element, Element, f64)]) -> OrderProcess {
    OrderProcess::from_triples(triples.iter().copied()).unwrap()
}

/// Dyadic time `k/16` with `k < 64`: sums and shifts by other dyadics stay
/// exact.
pub fn dyadic<R: Rng>(r: &mut R) -> f64 {
    r.random_range(0..64u32) as f64 / 16.0
}

/// Random valid process on at most `max_support` of the labels
/// `0..labels`, built as the minimax closure of random raw edges.
pub fn random_process<R: Rng>(r: &mut R, max_support: usize, labels: u32) -> OrderProcess {
    let mut pool: Vec<Element> = (0..labels).collect();
    pool.shuffle(r);
    let s = r.random_range(0..=max_support.min(labels as usize));
    let verts = &pool[..s];
    let mut raw = Vec::new();
    if s >= 2 {
        let edges = r.random_range(1..=s * (s - 1));
        for _ in 0..edges {
            let j = verts[r.random_range(0..s)];
            let k = verts[r.random_range(0..s)];
            if j != k {
                raw.push(((j, k), dyadic(r)));
            }
        }
    }
    OrderProcess::closure(raw).unwrap()
}

/// Random process whose times all lie in `[0, 1)`, on the window `0..n`.
pub fn random_unit_process<R: Rng>(r: &mut R, max_support: usize, n: u32) -> OrderProcess {
    let y = random_process(r, max_support, n);
    let times = y.iter().map(|(p, t)| (p, t / 4.0)).collect();
    OrderProcess::new(times).unwrap()
}

/// A random process below `h`: a random subset of its pairs, delayed by
/// random dyadic amounts and closed up again.
pub fn below<R: Rng>(r: &mut R, h: &OrderProcess) -> OrderProcess {
    let mut raw = Vec::new();
    for (p, t) in h.iter() {
        if r.random_bool(0.6) {
            raw.push((p, t + dyadic(r) / 4.0));
        }
    }
    let y = OrderProcess::closure(raw).unwrap();
    // closing delayed pairs of h only yields pairs of h, no earlier than in h
    assert!(y.leq(h));
    y
}

/// Every distinct time together with points a quarter gap on either side.
pub fn oracle_grid(procs: &[&OrderProcess]) -> (Vec<f64>, Vec<f64>, f64) {
    let mut ts: Vec<f64> = procs
        .iter()
        .flat_map(|p| p.iter().map(|(_, t)| t))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut delta = ts.windows(2).map(|w| w[1] - w[0]).fold(1.0f64, f64::min) / 4.0;
    if delta <= 0.0 {
        delta = 0.25;
    }
    let mut grid = vec![0.0];
    for &t in &ts {
        grid.extend([t - delta, t, t + delta].into_iter().filter(|&x| x >= 0.0));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    (ts, grid, delta)
}

/// Join computed pointwise at the relation level and read back into a
/// switching-time map.
pub fn grid_join(y: &OrderProcess, z: &OrderProcess) -> BTreeMap<(Element, Element), f64> {
    let (ts, _, delta) = oracle_grid(&[y, z]);
    let mut out = BTreeMap::new();
    for &t in &ts {
        let rel = y.eval(t + delta).join(&z.eval(t + delta));
        for p in rel.pairs() {
            out.entry(p).or_insert(t);
        }
    }
    out
}

/// Lexicographically least sorted `(j, k, t)` list over all relabelings of
/// the support onto `0..s`, by exhaustive enumeration.
pub fn brute_canonical(z: &OrderProcess) -> OrderProcess {
    let support: Vec<Element> = z.support().into_iter().collect();
    let s = support.len();
    let mut best: Option<Vec<(Element, Element, f64)>> = None;
    for perm in permutations(s) {
        let label = |m: Element| perm[support.binary_search(&m).unwrap()] as Element;
        let mut list: Vec<(Element, Element, f64)> = z
            .iter()
            .map(|((j, k), t)| (label(j), label(k), t))
            .collect();
        list.sort_by_key(|x| (x.0, x.1));
        let less = match &best {
            None => true,
            Some(b) => cmp_triples(&list, b) == Ordering::Less,
        };
        if less {
            best = Some(list);
        }
    }
    OrderProcess::from_triples(best.unwrap_or_default()).unwrap()
}

fn cmp_triples(a: &[(Element, Element, f64)], b: &[(Element, Element, f64)]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// Whether some bijection of supports maps one time map onto the other.
pub fn brute_isomorphic(a: &OrderProcess, b: &OrderProcess) -> bool {
    let sa: Vec<Element> = a.support().into_iter().collect();
    let sb: Vec<Element> = b.support().into_iter().collect();
    if sa.len() != sb.len() || a.len() != b.len() {
        return false;
    }
    permutations(sa.len()).into_iter().any(|perm| {
        let f = |m: Element| sb[perm[sa.binary_search(&m).unwrap()]];
        a.iter().all(|((j, k), t)| b.time(f(j), f(k)) == Some(t))
    })
}

/// A random permutation of the support of `z` (possibly onto fresh labels
/// drawn from `0..labels`).
pub fn random_relabeling<R: Rng>(r: &mut R, z: &OrderProcess, labels: u32) -> OrderProcess {
    let support: BTreeSet<Element> = z.support();
    let mut pool: Vec<Element> = (0..labels).collect();
    pool.extend(support.iter().copied());
    pool.sort();
    pool.dedup();
    pool.shuffle(r);
    let map: BTreeMap<Element, Element> = support.iter().copied().zip(pool).collect();
    z.relabel(|m| map[&m])
}

pub fn random_window_perm<R: Rng>(r: &mut R, n: u32) -> Permutation {
    let window: Vec<Element> = (0..n).collect();
    Permutation::random(&window, r)
}

/// Closed-form `φ` of the full completion model with uniform(lo, hi)
/// durations, written out independently of the library: the product over
/// support elements of the CDF at the earliest incident switching time.
pub fn uniform_full_phi(z: &OrderProcess, lo: f64, hi: f64) -> f64 {
    let mut bound: BTreeMap<Element, f64> = BTreeMap::new();
    for ((j, k), t) in z.iter() {
        for m in [j, k] {
            let b = bound.entry(m).or_insert(f64::INFINITY);
            *b = b.min(t);
        }
    }
    bound
        .values()
        .map(|&b| ((b - lo) / (hi - lo)).clamp(0.0, 1.0))
        .product()
}

pub fn rel(pairs: &[(Element, Element)]) -> PartialOrder {
    PartialOrder::closure(pairs.iter().copied())
}
