//! Euclidean projection onto box ∩ halfspaces.

use nalgebra::DVector;

use super::problem::{Halfspace, QpProblem};

/// Dykstra sweep budget per projection.
pub const MAX_SWEEPS: usize = 1_000;
/// Sweep-to-sweep change below which Dykstra stops.
pub const INNER_TOL: f64 = 1e-10;
/// Constraint violation still accepted as feasible after the sweep budget.
const FEASIBILITY_SLACK: f64 = 1e-8;

pub fn clamp(bounds: &[(f64, f64)], y: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        y.len(),
        y.iter().zip(bounds).map(|(&v, &(lo, hi))| v.clamp(lo, hi)),
    )
}

/// Exact projection onto `bounds ∩ {a·x ≤ b}`.
///
/// The minimiser is `clamp(y − λa)` for the smallest `λ ≥ 0` meeting the
/// halfspace; `a·clamp(y − λa)` is non-increasing in `λ`, so bisection finds it.
/// Returns `None` when no `λ` works, i.e. the halfspace misses the box.
fn onto_box_halfspace(bounds: &[(f64, f64)], h: &Halfspace, y: &DVector<f64>) -> Option<DVector<f64>> {
    let at = |lambda: f64| clamp(bounds, &(y - &h.a * lambda));
    let x0 = at(0.0);
    if h.a.dot(&x0) <= h.b {
        return Some(x0);
    }
    let mut hi = 1.0 / h.a.norm_squared().max(f64::MIN_POSITIVE);
    let mut grew = 0;
    while h.a.dot(&at(hi)) > h.b {
        hi *= 2.0;
        grew += 1;
        if grew > 2000 || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h.a.dot(&at(mid)) > h.b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(hi))
}

/// Outcome of a projection attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub x: DVector<f64>,
    pub sweeps: usize,
    /// Whether `x` satisfies every constraint to within the feasibility slack.
    pub feasible: bool,
}

/// Project `y` onto the feasible set of `problem`.
///
/// A bare box is a clamp and a box with one halfspace is solved exactly.
/// With several halfspaces, Dykstra's alternating projections cycle through
/// the blocks `box ∩ Hᵢ`, each projected exactly.
pub fn project(problem: &QpProblem, y: &DVector<f64>) -> Projection {
    let unbounded = vec![(f64::NEG_INFINITY, f64::INFINITY); y.len()];
    let bounds = problem.bounds.as_deref().unwrap_or(&unbounded);
    let done = |x: DVector<f64>, sweeps: usize, feasible: bool| Projection { x, sweeps, feasible };
    match problem.halfspaces.as_slice() {
        [] => return done(clamp(bounds, y), 0, true),
        [h] => {
            return match onto_box_halfspace(bounds, h, y) {
                Some(x) => {
                    let feasible = problem.primal_infeasibility(&x) <= FEASIBILITY_SLACK;
                    done(x, 1, feasible)
                }
                None => done(clamp(bounds, y), 1, false),
            }
        }
        _ => {}
    }
    let mut x = y.clone();
    let mut incs = vec![DVector::zeros(y.len()); problem.halfspaces.len()];
    for sweep in 1..=MAX_SWEEPS {
        let before = x.clone();
        let mut inc_change = 0.0f64;
        for (h, inc) in problem.halfspaces.iter().zip(incs.iter_mut()) {
            let w = &x + &*inc;
            let Some(z) = onto_box_halfspace(bounds, h, &w) else {
                return done(x, sweep, false);
            };
            let next_inc = &w - &z;
            inc_change = inc_change.max((&next_inc - &*inc).amax());
            *inc = next_inc;
            x = z;
        }
        let moved = (&x - &before).amax();
        if moved <= INNER_TOL && inc_change <= INNER_TOL && problem.primal_infeasibility(&x) <= INNER_TOL {
            return done(x, sweep, true);
        }
    }
    let feasible = problem.primal_infeasibility(&x) <= FEASIBILITY_SLACK;
    done(x, MAX_SWEEPS, feasible)
}

/// Cheap proof that the feasible set is empty, if one is found.
///
/// Checks opposite-facing halfspace pairs and the minimum of each `a·x` over
/// the box. Finding nothing does not prove feasibility.
pub fn infeasibility_certificate(problem: &QpProblem) -> Option<String> {
    const SLACK: f64 = 1e-9;
    let hs = &problem.halfspaces;
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (ai, aj) = (&hs[i].a, &hs[j].a);
            let (ni, nj) = (ai.norm(), aj.norm());
            if ni == 0.0 || nj == 0.0 {
                continue;
            }
            // a_j = -t a_i with t > 0 leaves room only if b_i + b_j / t >= 0.
            if ai.dot(aj) / (ni * nj) <= -1.0 + 1e-12 {
                let t = nj / ni;
                if hs[i].b + hs[j].b / t < -SLACK {
                    return Some(format!("halfspaces {i} and {j} face apart"));
                }
            }
        }
    }
    let unbounded = vec![(f64::NEG_INFINITY, f64::INFINITY); problem.dim()];
    let bounds = problem.bounds.as_deref().unwrap_or(&unbounded);
    for (i, h) in hs.iter().enumerate() {
        let mut lowest = 0.0;
        for (&a, &(lo, hi)) in h.a.iter().zip(bounds) {
            lowest += if a > 0.0 {
                a * lo
            } else if a < 0.0 {
                a * hi
            } else {
                0.0
            };
        }
        if lowest > h.b + SLACK {
            return Some(format!("halfspace {i} misses the box"));
        }
    }
    for (i, h) in hs.iter().enumerate() {
        if h.a.amax() == 0.0 && h.b < -SLACK {
            return Some(format!("halfspace {i} reads 0 <= {}", h.b));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn base(n: usize) -> QpProblem {
        QpProblem::unconstrained(DMatrix::identity(n, n), DVector::zeros(n)).unwrap()
    }

    #[test]
    fn box_only_is_a_clamp() {
        let p = base(2).with_box(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(project(&p, &v(&[2.0, -1.0])).x, v(&[1.0, 0.0]));
    }

    #[test]
    fn halfspace_projection_matches_closed_form() {
        // x + y <= 1 from (2, 2): nearest point is (0.5, 0.5).
        let p = base(2).with_halfspace(v(&[1.0, 1.0]), 1.0).unwrap();
        let r = project(&p, &v(&[2.0, 2.0]));
        assert!(r.feasible);
        assert!((&r.x - v(&[0.5, 0.5])).amax() < 1e-12);
    }

    #[test]
    fn dykstra_on_box_and_halfspace() {
        // Box [0, 1]^2 and x + y <= 1 from (1, 2): the answer is (0, 1).
        let p = base(2)
            .with_box(vec![(0.0, 1.0), (0.0, 1.0)])
            .unwrap()
            .with_halfspace(v(&[1.0, 1.0]), 1.0)
            .unwrap();
        let r = project(&p, &v(&[1.0, 2.0]));
        assert!(r.feasible);
        assert!((&r.x - v(&[0.0, 1.0])).amax() < 1e-9, "{}", r.x);
        let again = project(&p, &r.x);
        assert!((&again.x - &r.x).amax() <= 1e-10);
    }

    #[test]
    fn dykstra_on_two_halfspaces() {
        // x <= 0 and y <= 0 from (1, 1) meet at the origin.
        let p = base(2)
            .with_halfspace(v(&[1.0, 0.0]), 0.0)
            .unwrap()
            .with_halfspace(v(&[0.0, 1.0]), 0.0)
            .unwrap();
        let r = project(&p, &v(&[1.0, 1.0]));
        assert!(r.feasible);
        assert!(r.x.amax() < 1e-10);
        // x + y <= 0 and x - y <= 0 from (1, 0): the apex at the origin.
        let cone = base(2)
            .with_halfspace(v(&[1.0, 1.0]), 0.0)
            .unwrap()
            .with_halfspace(v(&[1.0, -1.0]), 0.0)
            .unwrap();
        assert!(project(&cone, &v(&[1.0, 0.0])).x.amax() < 1e-9);
    }

    #[test]
    fn certificates() {
        let p = base(1)
            .with_box(vec![(1.0, f64::INFINITY)])
            .unwrap()
            .with_halfspace(v(&[1.0]), -1.0)
            .unwrap();
        assert!(!project(&p, &v(&[0.0])).feasible);
        assert!(infeasibility_certificate(&p).is_some());

        let apart = base(2)
            .with_halfspace(v(&[1.0, 0.0]), -1.0)
            .unwrap()
            .with_halfspace(v(&[-2.0, 0.0]), -4.0)
            .unwrap();
        assert!(infeasibility_certificate(&apart).is_some());

        let fine = base(2).with_halfspace(v(&[1.0, 0.0]), 1.0).unwrap();
        assert!(infeasibility_certificate(&fine).is_none());
    }
}
