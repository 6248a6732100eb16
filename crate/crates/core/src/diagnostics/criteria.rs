use serde::{Deserialize, Serialize};

use crate::principle::satisfies;
use crate::space::{draw, ExplanationSpace, PhenomenonSpace};
use crate::system::{infer, Partial, Phenomenon, ReasoningSystem, ToleranceConfig};

use super::{per_sample, DiagnosticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criterion {
    Coherence,
    Soundness,
    Completeness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailingSample<P> {
    pub index: usize,
    pub phenomenon: P,
    pub reason: String,
}

/// Verdict of one criterion over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport<P> {
    pub criterion: Criterion,
    /// True exactly when `failing_samples` is empty.
    pub pass: bool,
    pub n_samples: usize,
    /// Coherence: largest defined round-trip delta. Soundness: most Hard
    /// violations on one sample. Completeness: `None`.
    pub worst_case: Option<f64>,
    pub failing_samples: Vec<FailingSample<P>>,
    /// Round-trips whose reconstruction is not admissible. Reported only;
    /// never fails a criterion.
    pub inadmissible_roundtrips: usize,
}

impl<P> CriterionReport<P> {
    fn assemble(
        criterion: Criterion,
        n_samples: usize,
        worst_case: Option<f64>,
        failing_samples: Vec<FailingSample<P>>,
        inadmissible_roundtrips: usize,
    ) -> Self {
        Self {
            criterion,
            pass: failing_samples.is_empty(),
            n_samples,
            worst_case,
            failing_samples,
            inadmissible_roundtrips,
        }
    }

    pub fn failing_indices(&self) -> Vec<usize> {
        self.failing_samples.iter().map(|f| f.index).collect()
    }

    /// The same report with every phenomenon passed through `f`.
    pub fn map_phenomena<Q>(self, mut f: impl FnMut(&P) -> Q) -> CriterionReport<Q> {
        CriterionReport {
            criterion: self.criterion,
            pass: self.pass,
            n_samples: self.n_samples,
            worst_case: self.worst_case,
            failing_samples: self.failing_samples.into_iter().map(|s| s.map_phenomenon(&mut f)).collect(),
            inadmissible_roundtrips: self.inadmissible_roundtrips,
        }
    }
}

impl<P> FailingSample<P> {
    pub fn map_phenomenon<Q>(self, f: impl FnOnce(&P) -> Q) -> FailingSample<Q> {
        FailingSample {
            index: self.index,
            phenomenon: f(&self.phenomenon),
            reason: self.reason,
        }
    }
}

fn max_opt(acc: Option<f64>, v: Option<f64>) -> Option<f64> {
    match (acc, v) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn samples<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
) -> Result<Vec<Phenomenon<S>>, DiagnosticsError> {
    if n == 0 {
        return Err(DiagnosticsError::NoSamples);
    }
    Ok(draw(system.phenomena(), seed, n))
}

type FixedPointSample<P> =
    Result<(Option<f64>, Option<f64>, Option<FailingSample<P>>), DiagnosticsError>;
type SampleResult<P> = Result<(Option<f64>, Option<FailingSample<P>>, bool), DiagnosticsError>;

fn collect<P>(
    criterion: Criterion,
    n_samples: usize,
    results: Vec<SampleResult<P>>,
) -> Result<CriterionReport<P>, DiagnosticsError> {
    let mut worst = None;
    let mut failing = Vec::new();
    let mut inadmissible = 0;
    for r in results {
        let (value, failure, bad_roundtrip) = r?;
        worst = max_opt(worst, value);
        failing.extend(failure);
        inadmissible += usize::from(bad_roundtrip);
    }
    Ok(CriterionReport::assemble(criterion, n_samples, worst, failing, inadmissible))
}

/// `g(f(p))` within `coherence_tol` of `p` for every drawn `p`.
pub fn check_coherence<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<CriterionReport<Phenomenon<S>>, DiagnosticsError> {
    let ps = samples(system, seed, n)?;
    let space = system.phenomena();
    let results = per_sample(system, &ps, |index, p| -> SampleResult<Phenomenon<S>> {
        let fail = |reason: String| FailingSample {
            index,
            phenomenon: p.clone(),
            reason,
        };
        let roundtrip = infer(system, p)?.and_then(|e| system.generation(&e));
        Ok(match roundtrip {
            Partial::Undefined(why) => (None, Some(fail(why.to_string())), false),
            Partial::Defined(q) => {
                let delta = space.distance(p, &q);
                let bad_roundtrip = !space.admissible(&q);
                let failure = (!(delta <= tol.coherence_tol)).then(|| {
                    fail(format!("roundtrip delta {delta} exceeds {}", tol.coherence_tol))
                });
                (Some(delta), failure, bad_roundtrip)
            }
        })
    });
    collect(Criterion::Coherence, ps.len(), results)
}

/// Every defined `f(p)` satisfies all Hard principles. Undefined inferences
/// are left to completeness.
pub fn check_soundness<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
) -> Result<CriterionReport<Phenomenon<S>>, DiagnosticsError> {
    let ps = samples(system, seed, n)?;
    let results = per_sample(system, &ps, |index, p| -> SampleResult<Phenomenon<S>> {
        let Partial::Defined(e) = infer(system, p)? else {
            return Ok((None, None, false));
        };
        let report = satisfies(system.principles(), &e, Some(p))?;
        let violated: Vec<&str> = report.hard_violations().map(|v| v.id.as_str()).collect();
        let failure = (!violated.is_empty()).then(|| FailingSample {
            index,
            phenomenon: p.clone(),
            reason: format!("violates {}", violated.join(", ")),
        });
        Ok((Some(violated.len() as f64), failure, false))
    });
    collect(Criterion::Soundness, ps.len(), results)
}

/// `f(p)` is defined, satisfies every Hard principle and leaves no coverage gap.
pub fn check_completeness<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
) -> Result<CriterionReport<Phenomenon<S>>, DiagnosticsError> {
    let ps = samples(system, seed, n)?;
    let results = per_sample(system, &ps, |index, p| -> SampleResult<Phenomenon<S>> {
        let fail = |reason: String| FailingSample {
            index,
            phenomenon: p.clone(),
            reason,
        };
        let e = match infer(system, p)? {
            Partial::Defined(e) => e,
            Partial::Undefined(why) => return Ok((None, Some(fail(why.to_string())), false)),
        };
        let report = satisfies(system.principles(), &e, Some(p))?;
        let violated: Vec<&str> = report.hard_violations().map(|v| v.id.as_str()).collect();
        if !violated.is_empty() {
            return Ok((None, Some(fail(format!("violates {}", violated.join(", ")))), false));
        }
        Ok((None, system.coverage_gap(p, &e).map(fail), false))
    });
    collect(Criterion::Completeness, ps.len(), results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport<P> {
    pub pass: bool,
    pub n_samples: usize,
    /// Largest `distance(p, g(f(p)))`.
    pub worst_phenomenon_residual: Option<f64>,
    /// Largest `distance(e, f(g(e)))` with `e = f(p)`.
    pub worst_explanation_residual: Option<f64>,
    pub failing_samples: Vec<FailingSample<P>>,
}

impl<P> FixedPointReport<P> {
    pub fn map_phenomena<Q>(self, mut f: impl FnMut(&P) -> Q) -> FixedPointReport<Q> {
        FixedPointReport {
            pass: self.pass,
            n_samples: self.n_samples,
            worst_phenomenon_residual: self.worst_phenomenon_residual,
            worst_explanation_residual: self.worst_explanation_residual,
            failing_samples: self.failing_samples.into_iter().map(|s| s.map_phenomenon(&mut f)).collect(),
        }
    }
}

/// Both fixed-point residuals, wherever the maps are defined.
pub fn check_fixed_point<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<FixedPointReport<Phenomenon<S>>, DiagnosticsError> {
    let ps = samples(system, seed, n)?;
    let limit = tol.fixedpoint_tol;
    let results = per_sample(system, &ps, |index, p| -> FixedPointSample<Phenomenon<S>> {
        let Partial::Defined(e) = infer(system, p)? else {
            return Ok((None, None, None));
        };
        let reconstructed = system.generation(&e);
        let p_residual = match &reconstructed {
            Partial::Defined(q) => Some(system.phenomena().distance(p, q)),
            Partial::Undefined(_) => None,
        };
        let e_residual = reconstructed
            .and_then(|q| system.inference(&q))
            .defined()
            .map(|e2| system.explanations().distance(&e, &e2));
        let mut reasons = Vec::new();
        if let Some(r) = p_residual.filter(|r| !(*r <= limit)) {
            reasons.push(format!("phenomenon residual {r}"));
        }
        if let Some(r) = e_residual.filter(|r| !(*r <= limit)) {
            reasons.push(format!("explanation residual {r}"));
        }
        let failure = (!reasons.is_empty()).then(|| FailingSample {
            index,
            phenomenon: p.clone(),
            reason: format!("{} exceeds {limit}", reasons.join(" and ")),
        });
        Ok((p_residual, e_residual, failure))
    });
    let mut worst_p = None;
    let mut worst_e = None;
    let mut failing = Vec::new();
    for r in results {
        let (p_res, e_res, failure) = r?;
        worst_p = max_opt(worst_p, p_res);
        worst_e = max_opt(worst_e, e_res);
        failing.extend(failure);
    }
    Ok(FixedPointReport {
        pass: failing.is_empty(),
        n_samples: ps.len(),
        worst_phenomenon_residual: worst_p,
        worst_explanation_residual: worst_e,
        failing_samples: failing,
    })
}
