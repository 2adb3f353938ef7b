use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};

use super::MeasureError;
use crate::process::{minimax_dense, OrderProcess};
use crate::relation::{Element, Pair, PartialOrder};

/// Distribution of job durations or raw edge times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Durations {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
}

impl Durations {
    fn validate(&self) -> Result<(), MeasureError> {
        match *self {
            Durations::Uniform { lo, hi } if lo >= 0.0 && lo < hi && hi.is_finite() => Ok(()),
            Durations::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            other => Err(MeasureError::InvalidModel(format!(
                "bad distribution {other:?}"
            ))),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Durations::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Durations::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Lipschitz constant of the CDF.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Durations::Uniform { lo, hi } => 1.0 / (hi - lo),
            Durations::Exponential { rate } => rate,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Durations::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
            Durations::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
        }
    }
}

/// Precedence structure of the jobs in a completion model.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseRelation {
    /// Every ordered pair of the window.
    Full,
    /// A precedence DAG, stored transitively closed.
    Dag(PartialOrder),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionModel {
    pub durations: Durations,
    pub base: BaseRelation,
    /// Relabel every sample by a uniformly random window permutation.
    pub permute: bool,
    // jobs in precedence order together with their (transitive) predecessors
    schedule: Vec<(usize, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Dirac(OrderProcess),
    Completion(CompletionModel),
    /// i.i.d. raw times on every ordered window pair, closed under minimax
    /// paths.
    EdgeMinimax {
        durations: Durations,
    },
    Mixture(Vec<(f64, MeasureModel)>),
}

/// A probability model on order processes over the window `{0, .., N-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureModel {
    window: u32,
    kind: ModelKind,
}

impl MeasureModel {
    pub fn dirac(window: u32, z: OrderProcess) -> Result<Self, MeasureError> {
        check_window(window)?;
        if let Some(&m) = z.support().iter().find(|&&m| m >= window) {
            return Err(MeasureError::SupportOutOfWindow { element: m, window });
        }
        Ok(MeasureModel {
            window,
            kind: ModelKind::Dirac(z),
        })
    }

    pub fn completion(
        window: u32,
        durations: Durations,
        base: BaseRelation,
        permute: bool,
    ) -> Result<Self, MeasureError> {
        check_window(window)?;
        durations.validate()?;
        let schedule = match &base {
            BaseRelation::Full => Vec::new(),
            BaseRelation::Dag(rel) => dag_schedule(window, rel)?,
        };
        Ok(MeasureModel {
            window,
            kind: ModelKind::Completion(CompletionModel {
                durations,
                base,
                permute,
                schedule,
            }),
        })
    }

    /// Completion model on the full relation with i.i.d. uniform durations.
    pub fn uniform_full(window: u32, lo: f64, hi: f64) -> Result<Self, MeasureError> {
        Self::completion(
            window,
            Durations::Uniform { lo, hi },
            BaseRelation::Full,
            false,
        )
    }

    pub fn edge_minimax(window: u32, rate: f64) -> Result<Self, MeasureError> {
        Self::edge_minimax_with(window, Durations::Exponential { rate })
    }

    pub fn edge_minimax_with(window: u32, durations: Durations) -> Result<Self, MeasureError> {
        check_window(window)?;
        durations.validate()?;
        Ok(MeasureModel {
            window,
            kind: ModelKind::EdgeMinimax { durations },
        })
    }

    /// Finite mixture. Weights must be positive and sum to one; all
    /// components must share a window.
    pub fn mixture(components: Vec<(f64, MeasureModel)>) -> Result<Self, MeasureError> {
        let Some(window) = components.first().map(|(_, m)| m.window) else {
            return Err(MeasureError::InvalidModel("empty mixture".into()));
        };
        if components.iter().any(|(w, _)| !(*w > 0.0 && w.is_finite())) {
            return Err(MeasureError::InvalidModel(
                "mixture weights must be positive".into(),
            ));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::InvalidModel(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        if components.iter().any(|(_, m)| m.window != window) {
            return Err(MeasureError::InvalidModel(
                "mixture components have different windows".into(),
            ));
        }
        Ok(MeasureModel {
            window,
            kind: ModelKind::Mixture(components),
        })
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Deterministic sample for `seed`.
    pub fn sample(&self, seed: u64) -> OrderProcess {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> OrderProcess {
        let mut buf = Dense::new(self.window as usize);
        self.sample_dense(rng, &mut buf);
        buf.to_process()
    }

    pub(crate) fn sample_dense<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Dense) {
        let n = self.window as usize;
        out.clear();
        match &self.kind {
            ModelKind::Dirac(z) => {
                for ((j, k), t) in z.iter() {
                    out.set(j as usize, k as usize, t);
                }
            }
            ModelKind::Completion(c) => sample_completion(c, n, rng, out),
            ModelKind::EdgeMinimax { durations } => {
                for j in 0..n {
                    for k in 0..n {
                        if j != k {
                            out.set(j, k, durations.draw(rng));
                        }
                    }
                }
                minimax_dense(&mut out.t, n);
            }
            ModelKind::Mixture(parts) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &parts[parts.len() - 1].1;
                for (w, m) in parts {
                    acc += w;
                    if u < acc {
                        chosen = m;
                        break;
                    }
                }
                chosen.sample_dense(rng, out);
            }
        }
    }

    /// Lipschitz modulus of `ε ↦ φ(z shifted by ε)` when one is known:
    /// `|support(z)|` times the duration CDF's Lipschitz constant for the
    /// full completion model, the largest component modulus for mixtures.
    pub fn continuity_modulus(&self, z: &OrderProcess) -> Option<f64> {
        match &self.kind {
            ModelKind::Completion(c) if c.base == BaseRelation::Full => {
                Some(z.support().len() as f64 * c.durations.lipschitz())
            }
            ModelKind::Mixture(parts) => parts
                .iter()
                .map(|(_, m)| m.continuity_modulus(z))
                .try_fold(0.0f64, |acc, m| m.map(|m| acc.max(m))),
            _ => None,
        }
    }
}

fn check_window(window: u32) -> Result<(), MeasureError> {
    if window == 0 {
        return Err(MeasureError::InvalidModel(
            "window must be at least 1".into(),
        ));
    }
    Ok(())
}

fn dag_schedule(window: u32, rel: &PartialOrder) -> Result<Vec<(usize, Vec<usize>)>, MeasureError> {
    if let Some(m) = rel.support().into_iter().find(|&m| m >= window) {
        return Err(MeasureError::SupportOutOfWindow { element: m, window });
    }
    if let Some((j, k)) = rel.pairs().find(|&(j, k)| rel.contains(k, j)) {
        return Err(MeasureError::InvalidModel(format!(
            "precedence relation has a cycle through {j} and {k}"
        )));
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); window as usize];
    for (j, k) in rel.pairs() {
        preds[k as usize].push(j as usize);
    }
    // in a closed DAG a job has strictly more ancestors than each ancestor
    let mut schedule: Vec<(usize, Vec<usize>)> = preds.into_iter().enumerate().collect();
    schedule.sort_by_key(|(m, p)| (p.len(), *m));
    Ok(schedule)
}

fn sample_completion<R: Rng + ?Sized>(c: &CompletionModel, n: usize, rng: &mut R, out: &mut Dense) {
    let durations: Vec<f64> = (0..n).map(|_| c.durations.draw(rng)).collect();
    let label: Vec<usize> = if c.permute {
        let mut l: Vec<usize> = (0..n).collect();
        l.shuffle(rng);
        l
    } else {
        (0..n).collect()
    };
    match &c.base {
        BaseRelation::Full => {
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        out.set(label[j], label[k], durations[j].max(durations[k]));
                    }
                }
            }
        }
        BaseRelation::Dag(rel) => {
            let mut done = vec![0.0; n];
            for (m, preds) in &c.schedule {
                let start = preds.iter().map(|&p| done[p]).fold(0.0, f64::max);
                done[*m] = start + durations[*m];
            }
            for (j, k) in rel.pairs() {
                let (j, k) = (j as usize, k as usize);
                out.set(label[j], label[k], done[j].max(done[k]));
            }
        }
    }
}

/// Dense switching-time matrix; `+inf` marks absent pairs.
#[derive(Clone, Debug)]
pub(crate) struct Dense {
    n: usize,
    t: Vec<f64>,
}

impl Dense {
    pub(crate) fn new(n: usize) -> Self {
        Dense {
            n,
            t: vec![f64::INFINITY; n * n],
        }
    }

    fn clear(&mut self) {
        self.t.fill(f64::INFINITY);
    }

    fn set(&mut self, j: usize, k: usize, t: f64) {
        self.t[j * self.n + k] = t;
    }

    /// `self ∈ Q_z`.
    pub(crate) fn in_q(&self, z: &OrderProcess) -> bool {
        z.iter().all(|((j, k), t)| {
            let (j, k) = (j as usize, k as usize);
            j < self.n && k < self.n && self.t[j * self.n + k] <= t
        })
    }

    pub(crate) fn to_process(&self) -> OrderProcess {
        let n = self.n;
        let mut times: BTreeMap<Pair, f64> = BTreeMap::new();
        for j in 0..n {
            for k in 0..n {
                let t = self.t[j * n + k];
                if j != k && t.is_finite() {
                    times.insert((j as Element, k as Element), t);
                }
            }
        }
        OrderProcess::from_valid_unchecked(times)
    }
}
