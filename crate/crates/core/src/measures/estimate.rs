use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::Dense;
use super::{MeasureModel, PhiEstimate};
use crate::process::OrderProcess;

/// Stream count used by [`estimate_phi`]. Fixed so that results do not
/// depend on the machine's core count.
pub const DEFAULT_STREAMS: u64 = 8;

/// Monte Carlo estimate of `φ(z)` from `n` samples.
pub fn estimate_phi(model: &MeasureModel, z: &OrderProcess, n: u64, seed: u64) -> PhiEstimate {
    estimate_phi_streams(model, z, n, seed, DEFAULT_STREAMS)
}

/// Like [`estimate_phi`] with an explicit stream count. Stream `i` draws
/// from the ChaCha stream `i` of the generator keyed by `seed` and takes
/// `n / streams` samples, the first `n % streams` streams taking one more.
/// The result is a function of `(model, z, n, seed, streams)` only.
pub fn estimate_phi_streams(
    model: &MeasureModel,
    z: &OrderProcess,
    n: u64,
    seed: u64,
    streams: u64,
) -> PhiEstimate {
    assert!(n >= 1, "need at least one sample");
    let streams = streams.clamp(1, n);
    if z.is_empty() {
        return PhiEstimate::from_counts(n, n);
    }
    let hits: u64 = (0..streams)
        .into_par_iter()
        .map(|s| {
            let count = n / streams + u64::from(s < n % streams);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let mut buf = Dense::new(model.window() as usize);
            (0..count)
                .filter(|_| {
                    model.sample_dense(&mut rng, &mut buf);
                    buf.in_q(z)
                })
                .count() as u64
        })
        .sum();
    PhiEstimate::from_counts(hits, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_is_certain() {
        let z0 = OrderProcess::from_triples([(0, 1, 0.5)]).unwrap();
        let m = MeasureModel::dirac(3, z0.clone()).unwrap();
        let e = estimate_phi(&m, &z0, 1000, 1);
        assert_eq!((e.value, e.stderr, e.n), (1.0, 0.0, 1000));
        let later = OrderProcess::from_triples([(0, 1, 0.75)]).unwrap();
        assert_eq!(estimate_phi(&m, &later, 10, 1).value, 1.0);
        let earlier = OrderProcess::from_triples([(0, 1, 0.25)]).unwrap();
        assert_eq!(estimate_phi(&m, &earlier, 10, 1).value, 0.0);
    }

    #[test]
    fn empty_test_process_always_hits() {
        let m = MeasureModel::edge_minimax(4, 1.0).unwrap();
        let e = estimate_phi(&m, &OrderProcess::empty(), 17, 3);
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn deterministic_given_seed_and_streams() {
        let m = MeasureModel::uniform_full(4, 0.0, 1.0).unwrap();
        let z = OrderProcess::from_triples([(0, 1, 0.5)]).unwrap();
        let a = estimate_phi_streams(&m, &z, 5000, 9, 3);
        let b = estimate_phi_streams(&m, &z, 5000, 9, 3);
        assert_eq!(a, b);
        let c = estimate_phi_streams(&m, &z, 5000, 10, 3);
        assert_ne!(a.value, c.value);
        // more streams than samples is clamped
        assert_eq!(estimate_phi_streams(&m, &z, 2, 9, 8).n, 2);
    }

    #[test]
    fn uniform_full_estimate_is_calibrated() {
        let m = MeasureModel::uniform_full(3, 0.0, 1.0).unwrap();
        let z = OrderProcess::from_triples([(1, 2, 0.5)]).unwrap();
        let e = estimate_phi(&m, &z, 100_000, 42);
        assert!((e.value - 0.25).abs() <= 4.0 * e.stderr, "{e:?}");
    }
}
