//! Property checkers for distribution functions `φ(Z) = μ(Q_Z)`.
//!
//! Every checker takes anything implementing [`Phi`]: an [`Evaluator`] bound
//! to a model, or a plain closure. Tolerances follow one convention. Exact
//! evaluators compare exactly or within [`EXACT_TOL`] where rounding order
//! differs between the two sides; Monte Carlo evaluators allow four
//! propagated standard errors, and `6·stderr·m` for `m x m` matrices.

use std::fmt;

use nalgebra::DMatrix;

use super::{estimate_phi, phi_exact, MeasureError, MeasureModel, PhiEstimate, EXACT_TOL};
use crate::process::OrderProcess;

/// Default bound on the number of processes in a positive-definiteness test.
pub const DEFAULT_PD_BOUND: usize = 8;

/// Something that evaluates `φ`.
pub trait Phi {
    fn phi(&self, z: &OrderProcess) -> Result<PhiEstimate, MeasureError>;
}

impl<F> Phi for F
where
    F: Fn(&OrderProcess) -> Result<PhiEstimate, MeasureError>,
{
    fn phi(&self, z: &OrderProcess) -> Result<PhiEstimate, MeasureError> {
        self(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { n: u64, seed: u64 },
}

/// A model paired with an evaluation mode.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    pub model: &'a MeasureModel,
    pub mode: EvalMode,
}

impl<'a> Evaluator<'a> {
    pub fn exact(model: &'a MeasureModel) -> Self {
        Evaluator {
            model,
            mode: EvalMode::Exact,
        }
    }

    pub fn monte_carlo(model: &'a MeasureModel, n: u64, seed: u64) -> Self {
        Evaluator {
            model,
            mode: EvalMode::MonteCarlo { n, seed },
        }
    }
}

impl Phi for Evaluator<'_> {
    fn phi(&self, z: &OrderProcess) -> Result<PhiEstimate, MeasureError> {
        match self.mode {
            EvalMode::Exact => phi_exact(self.model, z),
            EvalMode::MonteCarlo { n, seed } => Ok(estimate_phi(self.model, z, n, seed)),
        }
    }
}

/// Result of a single check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: &'static str,
    pub passed: bool,
    /// The checked quantity: worst violation, smallest eigenvalue, final gap.
    pub statistic: f64,
    /// Threshold the statistic was held to.
    pub tolerance: f64,
    /// Index of the first offending input, if any.
    pub witness: Option<usize>,
    pub detail: String,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} statistic={} tolerance={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.statistic,
            self.tolerance
        )?;
        if let Some(w) = self.witness {
            write!(f, " witness={w}")?;
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

fn sigma_tol(estimates: &[&PhiEstimate], sigmas: f64, exact_tol: f64) -> f64 {
    if estimates.iter().all(|e| e.exact) {
        exact_tol
    } else {
        sigmas
            * estimates
                .iter()
                .map(|e| e.stderr * e.stderr)
                .sum::<f64>()
                .sqrt()
    }
}

/// `z1 <= z2` implies `φ(z1) >= φ(z2)`.
pub fn check_monotone<P: Phi>(
    phi: &P,
    pairs: &[(OrderProcess, OrderProcess)],
) -> Result<CheckReport, MeasureError> {
    let mut report = CheckReport {
        check: "monotone",
        passed: true,
        statistic: f64::NEG_INFINITY,
        tolerance: 0.0,
        witness: None,
        detail: String::new(),
    };
    for (i, (lo, hi)) in pairs.iter().enumerate() {
        if !lo.leq(hi) {
            return Err(MeasureError::PreconditionViolation {
                index: i,
                reason: "pair is not ordered".into(),
            });
        }
        let (a, b) = (phi.phi(lo)?, phi.phi(hi)?);
        let excess = b.value - a.value;
        let tol = sigma_tol(&[&a, &b], 4.0, 0.0);
        if excess > report.statistic {
            report.statistic = excess;
            report.tolerance = tol;
        }
        if excess > tol && report.passed {
            report.passed = false;
            report.witness = Some(i);
            report.detail = format!("phi_lower={} phi_upper={}", a.value, b.value);
        }
    }
    if pairs.is_empty() {
        report.statistic = 0.0;
    }
    Ok(report)
}

/// The matrix `A[i][k] = φ(z_i ∨ z_k)` is symmetric positive semidefinite.
pub fn check_positive_definite<P: Phi>(
    phi: &P,
    zs: &[OrderProcess],
    tol: f64,
) -> Result<CheckReport, MeasureError> {
    check_positive_definite_bounded(phi, zs, tol, DEFAULT_PD_BOUND)
}

pub fn check_positive_definite_bounded<P: Phi>(
    phi: &P,
    zs: &[OrderProcess],
    tol: f64,
    bound: usize,
) -> Result<CheckReport, MeasureError> {
    let m = zs.len();
    if m == 0 || m > bound {
        return Err(MeasureError::PreconditionViolation {
            index: m,
            reason: format!("need between 1 and {bound} processes, got {m}"),
        });
    }
    let mut est = Vec::with_capacity(m * m);
    for a in zs {
        for b in zs {
            est.push(phi.phi(&a.join(b))?);
        }
    }
    let exact = est.iter().all(|e| e.exact);
    let max_se = est.iter().map(|e| e.stderr).fold(0.0, f64::max);
    let tolerance = if exact {
        tol
    } else {
        tol.max(6.0 * max_se * m as f64)
    };

    let a = DMatrix::from_fn(m, m, |i, k| est[i * m + k].value);
    let asym = (0..m)
        .flat_map(|i| (0..m).map(move |k| (i, k)))
        .map(|(i, k)| (a[(i, k)] - a[(k, i)]).abs())
        .fold(0.0, f64::max);
    let sym = (&a + a.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    Ok(CheckReport {
        check: "positive-definite",
        passed: asym <= tolerance && min_eig >= -tolerance,
        statistic: min_eig,
        tolerance,
        witness: None,
        detail: format!("size={m} asymmetry={asym}"),
    })
}

/// Product rule over disjoint supports: `φ(z1 ∨ z2) = φ(z1)·φ(z2)`. A
/// failure certifies that the measure is not extreme among exchangeable
/// ones.
pub fn check_independent<P: Phi>(
    phi: &P,
    pairs: &[(OrderProcess, OrderProcess)],
) -> Result<CheckReport, MeasureError> {
    let mut report = CheckReport {
        check: "independent",
        passed: true,
        statistic: 0.0,
        tolerance: 0.0,
        witness: None,
        detail: String::new(),
    };
    for (i, (z1, z2)) in pairs.iter().enumerate() {
        if !z1.support().is_disjoint(&z2.support()) {
            return Err(MeasureError::PreconditionViolation {
                index: i,
                reason: "supports overlap".into(),
            });
        }
        let (a, b, ab) = (phi.phi(z1)?, phi.phi(z2)?, phi.phi(&z1.join(z2))?);
        let gap = (ab.value - a.value * b.value).abs();
        let tol = if a.exact && b.exact && ab.exact {
            EXACT_TOL
        } else {
            4.0 * (ab.stderr.powi(2) + (b.value * a.stderr).powi(2) + (a.value * b.stderr).powi(2))
                .sqrt()
        };
        if gap > report.statistic {
            report.statistic = gap;
            report.tolerance = tol;
        }
        if gap > tol && report.passed {
            report.passed = false;
            report.witness = Some(i);
            report.tolerance = tol;
            report.statistic = gap;
            report.detail = format!(
                "gap={gap} joint={} product={} sigmas={}",
                ab.value,
                a.value * b.value,
                if tol > 0.0 {
                    gap / (tol / 4.0)
                } else {
                    f64::INFINITY
                }
            );
        }
    }
    Ok(report)
}

/// `φ(z shifted later by ε) → φ(z)` as `ε ↓ 0`: values along the decreasing
/// sequence must not increase, and the last gap must lie within
/// `modulus · ε_last`.
pub fn check_below_continuity<P: Phi>(
    phi: &P,
    z: &OrderProcess,
    eps_seq: &[f64],
    modulus: f64,
) -> Result<CheckReport, MeasureError> {
    for (i, &e) in eps_seq.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) || (i > 0 && e >= eps_seq[i - 1]) {
            return Err(MeasureError::PreconditionViolation {
                index: i,
                reason: "eps sequence must be positive and strictly decreasing".into(),
            });
        }
    }
    let Some(&last) = eps_seq.last() else {
        return Err(MeasureError::PreconditionViolation {
            index: 0,
            reason: "empty eps sequence".into(),
        });
    };
    let target = phi.phi(z)?;
    let mut values = Vec::with_capacity(eps_seq.len());
    for &e in eps_seq {
        values.push(phi.phi(&z.shift_minus(e))?);
    }
    let mut witness = None;
    for (i, w) in values.windows(2).enumerate() {
        if w[1].value > w[0].value + sigma_tol(&[&w[0], &w[1]], 4.0, 0.0) {
            witness = Some(i + 1);
            break;
        }
    }
    let end = values.last().expect("nonempty");
    let gap = (end.value - target.value).abs();
    let tolerance = modulus * last + sigma_tol(&[end, &target], 4.0, EXACT_TOL);
    let trail: Vec<String> = values.iter().map(|v| v.value.to_string()).collect();
    Ok(CheckReport {
        check: "below-continuity",
        passed: witness.is_none() && gap <= tolerance,
        statistic: gap,
        tolerance,
        witness,
        detail: format!("phi={} shifted=[{}]", target.value, trail.join(",")),
    })
}

/// Sup-gaps of a model sequence against a limit model.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub passed: bool,
    /// `sup_z |φ_n(z) - φ(z)|` over the test processes, one entry per model.
    pub gaps: Vec<f64>,
    pub tolerance: f64,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gaps: Vec<String> = self.gaps.iter().map(|g| g.to_string()).collect();
        write!(
            f,
            "{} converge final_gap={} tolerance={} gaps=[{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.gaps.last().copied().unwrap_or(0.0),
            self.tolerance,
            gaps.join(",")
        )
    }
}

/// Passes when the sup-gap sequence is nonincreasing (up to rounding or
/// sampling noise) and ends within `tol`.
pub fn convergence_diag(
    models: &[MeasureModel],
    limit: &MeasureModel,
    test_zs: &[OrderProcess],
    mode: EvalMode,
    tol: f64,
) -> Result<ConvergenceReport, MeasureError> {
    let limit_eval = Evaluator { model: limit, mode };
    let limits: Vec<PhiEstimate> = test_zs
        .iter()
        .map(|z| limit_eval.phi(z))
        .collect::<Result<_, _>>()?;
    let mut gaps = Vec::with_capacity(models.len());
    let mut slack = 0.0f64;
    for model in models {
        let ev = Evaluator { model, mode };
        let mut sup = 0.0f64;
        for (z, lim) in test_zs.iter().zip(&limits) {
            let e = ev.phi(z)?;
            sup = sup.max((e.value - lim.value).abs());
            slack = slack.max(sigma_tol(&[&e, lim], 4.0, EXACT_TOL));
        }
        gaps.push(sup);
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + slack);
    let settled = gaps.last().is_none_or(|&g| g <= tol);
    Ok(ConvergenceReport {
        passed: monotone && settled,
        gaps,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Element;

    fn z(triples: &[(Element, Element, f64)]) -> OrderProcess {
        OrderProcess::from_triples(triples.iter().copied()).unwrap()
    }

    fn uniform(window: u32, hi: f64) -> MeasureModel {
        MeasureModel::uniform_full(window, 0.0, hi).unwrap()
    }

    #[test]
    fn monotone_examples() {
        let m = uniform(3, 1.0);
        let ev = Evaluator::exact(&m);
        let pairs = vec![
            (OrderProcess::empty(), z(&[(1, 2, 0.5)])),
            (z(&[(1, 2, 0.6)]), z(&[(1, 2, 0.5)])),
            (z(&[(1, 2, 0.5)]).shift_minus(0.25), z(&[(1, 2, 0.5)])),
        ];
        let r = check_monotone(&ev, &pairs).unwrap();
        assert!(r.passed, "{r}");
        let bad = vec![(z(&[(1, 2, 0.5)]), z(&[(1, 2, 0.6)]))];
        assert!(matches!(
            check_monotone(&ev, &bad),
            Err(MeasureError::PreconditionViolation { index: 0, .. })
        ));
    }

    #[test]
    fn monotone_flags_an_increasing_phi() {
        let liar = |x: &OrderProcess| Ok(PhiEstimate::exact(x.len() as f64 / 10.0));
        let r = check_monotone(&liar, &[(OrderProcess::empty(), z(&[(1, 2, 0.5)]))]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.witness, Some(0));
    }

    #[test]
    fn pd_examples() {
        let m = uniform(3, 1.0);
        let ev = Evaluator::exact(&m);
        let r = check_positive_definite(&ev, &[OrderProcess::empty()], 1e-9).unwrap();
        assert!(r.passed);
        assert!((r.statistic - 1.0).abs() < 1e-12);
        let r = check_positive_definite(&ev, &[OrderProcess::empty(), z(&[(1, 2, 0.5)])], 1e-9)
            .unwrap();
        // eigenvalues of [[1, .25], [.25, .25]]
        let (tr, det) = (1.25f64, 0.25 - 0.0625);
        let want = tr / 2.0 - (tr * tr / 4.0 - det).sqrt();
        assert!(r.passed && (r.statistic - want).abs() < 1e-12, "{r}");
        assert!(check_positive_definite(&ev, &[], 1e-9).is_err());
    }

    #[test]
    fn pd_rejects_a_non_pd_function() {
        // φ(D) = 1 but φ(z) = 1.5 > 1: det of [[1,1.5],[1.5,1.5]] < 0
        let bad = |x: &OrderProcess| Ok(PhiEstimate::exact(if x.is_empty() { 1.0 } else { 1.5 }));
        let r = check_positive_definite(&bad, &[OrderProcess::empty(), z(&[(1, 2, 0.5)])], 1e-9)
            .unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn independence_examples() {
        let z1 = z(&[(1, 2, 0.5)]);
        let z2 = z(&[(3, 4, 0.5)]);
        let m = uniform(5, 1.0);
        let r = check_independent(&Evaluator::exact(&m), &[(z1.clone(), z2.clone())]).unwrap();
        assert!(r.passed, "{r}");
        let r = check_independent(
            &Evaluator::exact(&m),
            &[(z1.clone(), OrderProcess::empty())],
        )
        .unwrap();
        assert!(r.passed);

        let mix =
            MeasureModel::mixture(vec![(0.5, uniform(5, 1.0)), (0.5, uniform(5, 2.0))]).unwrap();
        let r = check_independent(&Evaluator::exact(&mix), &[(z1.clone(), z2.clone())]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.statistic, 0.0087890625);
        assert_eq!(r.witness, Some(0));

        let overlap = (z1.clone(), z(&[(2, 3, 0.5)]));
        assert!(matches!(
            check_independent(&Evaluator::exact(&m), &[overlap]),
            Err(MeasureError::PreconditionViolation { .. })
        ));
    }

    #[test]
    fn below_continuity_examples() {
        let m = uniform(3, 1.0);
        let target = z(&[(1, 2, 0.5)]);
        let r = check_below_continuity(&Evaluator::exact(&m), &target, &[0.1], 2.0).unwrap();
        assert!(r.passed, "{r}");
        assert!((r.statistic - 0.11).abs() < 1e-12);

        let r = check_below_continuity(
            &Evaluator::exact(&m),
            &OrderProcess::empty(),
            &[0.5, 0.1],
            0.0,
        )
        .unwrap();
        assert!(r.passed && r.statistic == 0.0);

        let dirac = MeasureModel::dirac(3, target.clone()).unwrap();
        let r =
            check_below_continuity(&Evaluator::exact(&dirac), &target, &[0.5, 0.25, 0.125], 0.0)
                .unwrap();
        assert!(r.passed && r.statistic == 0.0);

        assert!(check_below_continuity(&Evaluator::exact(&m), &target, &[0.1, 0.2], 2.0).is_err());
    }

    #[test]
    fn below_continuity_flags_a_jump() {
        // a distribution function with an atom at the threshold
        let jumpy = |x: &OrderProcess| {
            let t = x.time(1, 2).unwrap_or(f64::INFINITY);
            Ok(PhiEstimate::exact(if t > 0.5 { 1.0 } else { 0.5 }))
        };
        let r = check_below_continuity(&jumpy, &z(&[(1, 2, 0.5)]), &[0.1, 0.01], 2.0).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn convergence_examples() {
        let target = z(&[(1, 2, 0.5)]);
        let models: Vec<_> = (1..=10).map(|n| uniform(3, 1.0 + 1.0 / n as f64)).collect();
        let limit = uniform(3, 1.0);
        let r = convergence_diag(&models, &limit, &[target], EvalMode::Exact, 0.05).unwrap();
        assert!(r.passed, "{r}");
        for (n, g) in (1..=10).zip(&r.gaps) {
            let want = 0.25 - (0.5 / (1.0 + 1.0 / n as f64)).powi(2);
            assert!((g - want).abs() < 1e-12);
        }
        let same = vec![limit.clone(); 3];
        let r =
            convergence_diag(&same, &limit, &[z(&[(1, 2, 0.5)])], EvalMode::Exact, 0.0).unwrap();
        assert!(r.passed && r.gaps.iter().all(|&g| g == 0.0));
        let r = convergence_diag(
            &models,
            &limit,
            &[OrderProcess::empty()],
            EvalMode::Exact,
            0.0,
        )
        .unwrap();
        assert!(r.passed && r.gaps.iter().all(|&g| g == 0.0));
    }
}
