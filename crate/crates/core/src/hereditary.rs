//! Left-hereditary sub-semigroups generated by finitely many processes.
//!
//! For a finite generator set `G` the smallest join-closed, downward-closed
//! family containing `G` is `{Z : Z <= ⋁G}`, so membership reduces to one
//! order comparison against [`HereditaryFamily::h`].

use thiserror::Error;

use crate::process::{time_grid, OrderProcess};
use crate::relation::PartialOrder;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HereditaryError {
    #[error("process is not a member of the family")]
    NotAMember,
    #[error("eps must be positive, got {0}")]
    InvalidEps(f64),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HereditaryFamily {
    generators: Vec<OrderProcess>,
    top: OrderProcess,
}

impl HereditaryFamily {
    pub fn new(generators: Vec<OrderProcess>) -> Self {
        let top = generators
            .iter()
            .fold(OrderProcess::empty(), |acc, g| acc.join(g));
        HereditaryFamily { generators, top }
    }

    pub fn generators(&self) -> &[OrderProcess] {
        &self.generators
    }

    /// Join of the whole family, which is the join of the generators.
    pub fn h(&self) -> &OrderProcess {
        &self.top
    }

    pub fn member(&self, z: &OrderProcess) -> bool {
        z.leq(&self.top)
    }

    /// Finite family of members covering `z` up to a delay of `eps`.
    ///
    /// For each pair of `z` switching at `t0`, the witness is the step
    /// process that is `D` on `[0, t0+eps]` and equals `h(t0+eps)` after it.
    /// Each witness lies below `h`, and
    /// `z(t) <= ⋁ witness(t + eps)` holds for every `t`.
    pub fn cover_witnesses(
        &self,
        z: &OrderProcess,
        eps: f64,
    ) -> Result<Vec<OrderProcess>, HereditaryError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(HereditaryError::InvalidEps(eps));
        }
        if !self.member(z) {
            return Err(HereditaryError::NotAMember);
        }
        let witnesses = z
            .iter()
            .map(|(_, t0)| {
                let at = t0 + eps;
                let snapshot = self.top.eval(at);
                let times = snapshot.pairs().map(|p| (p, at)).collect();
                // a transitive relation switched on all at once is valid
                OrderProcess::from_valid_unchecked(times)
            })
            .collect();
        Ok(witnesses)
    }
}

/// Checks `z(t) <= ⋁ w(t + eps)` over the witnesses at every point of the
/// verification grid built from the switching times of `z`, `family` and
/// the witnesses.
pub fn covering_holds(
    z: &OrderProcess,
    family: &HereditaryFamily,
    witnesses: &[OrderProcess],
    eps: f64,
) -> bool {
    let times = z
        .switching_times()
        .into_iter()
        .chain(family.generators().iter().flat_map(|g| g.switching_times()))
        .chain(family.h().switching_times())
        .chain(witnesses.iter().flat_map(|w| w.switching_times()));
    time_grid(times).into_iter().all(|t| {
        let cover = witnesses.iter().fold(PartialOrder::diagonal(), |acc, w| {
            acc.join(&w.eval(t + eps))
        });
        z.eval(t).leq(&cover)
    })
}
