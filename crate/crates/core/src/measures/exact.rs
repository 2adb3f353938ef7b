use std::collections::BTreeMap;

use super::{BaseRelation, Durations, MeasureError, MeasureModel, ModelKind, PhiEstimate};
use crate::process::OrderProcess;
use crate::relation::Element;

/// Largest number of bucket assignments enumerated for the edge-minimax
/// closed form.
pub const MAX_ENUMERATION: u64 = 5_000_000;

/// Closed-form `φ(z)`.
///
/// Supported: Dirac models, completion models on the full relation,
/// edge-minimax models on small windows, and mixtures of these.
pub fn phi_exact(model: &MeasureModel, z: &OrderProcess) -> Result<PhiEstimate, MeasureError> {
    if z.is_empty() {
        return Ok(PhiEstimate::exact(1.0));
    }
    phi_value(model, z).map(PhiEstimate::exact)
}

fn phi_value(model: &MeasureModel, z: &OrderProcess) -> Result<f64, MeasureError> {
    match model.kind() {
        ModelKind::Dirac(y) => Ok(if y.in_q(z) { 1.0 } else { 0.0 }),
        ModelKind::Completion(c) => {
            if c.base != BaseRelation::Full {
                return Err(MeasureError::NoClosedForm("completion models on a DAG"));
            }
            check_window(model.window(), z)?;
            Ok(completion_full(&c.durations, z))
        }
        ModelKind::EdgeMinimax { durations } => {
            check_window(model.window(), z)?;
            edge_minimax(model.window() as usize, durations, z)
        }
        ModelKind::Mixture(parts) => {
            let mut total = 0.0;
            for (w, m) in parts {
                total += w * phi_value(m, z)?;
            }
            Ok(total)
        }
    }
}

fn check_window(window: u32, z: &OrderProcess) -> Result<(), MeasureError> {
    match z.support().into_iter().find(|&m| m >= window) {
        Some(element) => Err(MeasureError::SupportOutOfWindow { element, window }),
        None => Ok(()),
    }
}

// Y ∈ Q_z iff max(C_j, C_k) <= z(j,k) for each pair of z, i.e. iff every
// C_m is at most the earliest time of a pair of z touching m. The factors
// are multiplied in increasing order so the rounding does not depend on
// labels.
fn completion_full(durations: &Durations, z: &OrderProcess) -> f64 {
    let mut bound: BTreeMap<Element, f64> = BTreeMap::new();
    for ((j, k), t) in z.iter() {
        for m in [j, k] {
            let b = bound.entry(m).or_insert(t);
            *b = b.min(t);
        }
    }
    let mut factors: Vec<f64> = bound.values().map(|&b| durations.cdf(b)).collect();
    factors.sort_by(f64::total_cmp);
    factors.into_iter().product()
}

// Each raw edge time falls into one of m+1 buckets cut at the distinct
// switching times of z. Pair (j,k) with threshold τ_i is reached by time τ_i
// iff some path uses only edges in buckets <= i. Edges are independent, so φ
// is a polynomial in the bucket probabilities; the integer coefficients are
// counted by enumeration and the polynomial is summed in a label-free order.
fn edge_minimax(n: usize, durations: &Durations, z: &OrderProcess) -> Result<f64, MeasureError> {
    let thresholds = z.switching_times();
    let buckets = thresholds.len() + 1;
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
        .collect();
    let total = (buckets as u64).checked_pow(edges.len() as u32);
    if total.is_none_or(|t| t > MAX_ENUMERATION) {
        return Err(MeasureError::NoClosedForm(
            "edge-minimax models beyond the enumeration bound",
        ));
    }

    let mut probs = Vec::with_capacity(buckets);
    let mut prev = 0.0;
    for &t in &thresholds {
        let f = durations.cdf(t);
        probs.push(f - prev);
        prev = f;
    }
    probs.push(1.0 - prev);

    let demands: Vec<(usize, usize, usize)> = z
        .iter()
        .map(|((j, k), t)| {
            let level = thresholds.partition_point(|&s| s < t);
            (j as usize, k as usize, level)
        })
        .collect();

    let mut assign = vec![0usize; edges.len()];
    let mut counts = vec![0u32; buckets];
    counts[0] = edges.len() as u32;
    let mut hits: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    let mut adj = vec![false; n * n];
    loop {
        if demands_met(n, &edges, &assign, &demands, &mut adj) {
            *hits.entry(counts.clone()).or_default() += 1;
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == edges.len() {
                return Ok(sum_polynomial(&hits, &probs));
            }
            counts[assign[i]] -= 1;
            assign[i] += 1;
            if assign[i] < buckets {
                counts[assign[i]] += 1;
                break;
            }
            assign[i] = 0;
            counts[0] += 1;
            i += 1;
        }
    }
}

fn demands_met(
    n: usize,
    edges: &[(usize, usize)],
    assign: &[usize],
    demands: &[(usize, usize, usize)],
    adj: &mut [bool],
) -> bool {
    demands.iter().all(|&(src, dst, level)| {
        adj.fill(false);
        for (&(j, k), &b) in edges.iter().zip(assign) {
            if b <= level {
                adj[j * n + k] = true;
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![src];
        seen[src] = true;
        while let Some(v) = stack.pop() {
            if v == dst {
                return true;
            }
            for w in 0..n {
                if adj[v * n + w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    })
}

fn sum_polynomial(hits: &BTreeMap<Vec<u32>, u64>, probs: &[f64]) -> f64 {
    hits.iter()
        .map(|(counts, &c)| {
            let weight: f64 = counts
                .iter()
                .zip(probs)
                .map(|(&e, &p)| p.powi(e as i32))
                .product();
            c as f64 * weight
        })
        .sum()
}
