use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::blocks::{parse_blocks, write_blocks};

use super::OptError;

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const CONVEXITY_FLOOR: f64 = -1e-10;

/// `a·x ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: DVector<f64>,
    pub b: f64,
}

/// `minimize ½xᵀQx + cᵀx` subject to an optional box and halfspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    /// Per-coordinate `[lo, hi]`; infinite ends allowed.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub halfspaces: Vec<Halfspace>,
}

impl QpProblem {
    pub fn unconstrained(q: DMatrix<f64>, c: DVector<f64>) -> Result<Self, OptError> {
        let p = Self {
            q,
            c,
            bounds: None,
            halfspaces: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_box(mut self, bounds: Vec<(f64, f64)>) -> Result<Self, OptError> {
        self.bounds = Some(bounds);
        self.validate()?;
        Ok(self)
    }

    pub fn with_halfspace(mut self, a: DVector<f64>, b: f64) -> Result<Self, OptError> {
        self.halfspaces.push(Halfspace { a, b });
        self.validate()?;
        Ok(self)
    }

    /// Same geometry, different linear term.
    pub fn with_c(&self, c: DVector<f64>) -> Self {
        Self {
            c,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), OptError> {
        let n = self.c.len();
        let invalid = |m: String| Err(OptError::InvalidProblem(m));
        if n == 0 || n > MAX_DIM {
            return invalid(format!("dimension {n} outside 1..={MAX_DIM}"));
        }
        if self.q.shape() != (n, n) {
            return Err(OptError::DimensionMismatch {
                expected: n,
                found: self.q.nrows(),
            });
        }
        if self.q.iter().chain(self.c.iter()).any(|v| !v.is_finite()) {
            return invalid("Q and c must be finite".into());
        }
        for i in 0..n {
            for j in 0..i {
                if (self.q[(i, j)] - self.q[(j, i)]).abs() > SYMMETRY_TOL {
                    return invalid(format!("Q is not symmetric at ({i}, {j})"));
                }
            }
        }
        if let Some(bounds) = &self.bounds {
            if bounds.len() != n {
                return Err(OptError::DimensionMismatch {
                    expected: n,
                    found: bounds.len(),
                });
            }
            for (k, &(lo, hi)) in bounds.iter().enumerate() {
                if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                    return invalid(format!("bad bounds [{lo}, {hi}] on coordinate {k}"));
                }
            }
        }
        for (i, h) in self.halfspaces.iter().enumerate() {
            if h.a.len() != n {
                return Err(OptError::DimensionMismatch {
                    expected: n,
                    found: h.a.len(),
                });
            }
            if h.a.iter().any(|v| !v.is_finite()) || !h.b.is_finite() {
                return invalid(format!("halfspace {i} must be finite"));
            }
        }
        Ok(())
    }

    fn eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.q.clone()).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().max()
    }

    pub fn is_convex(&self) -> bool {
        self.min_eigenvalue() >= CONVEXITY_FLOOR
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x + &self.c
    }

    /// Q, box and halfspaces all equal.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.q == other.q && self.bounds == other.bounds && self.halfspaces == other.halfspaces
    }

    /// Largest violation of any constraint, 0 when feasible.
    pub fn primal_infeasibility(&self, x: &DVector<f64>) -> f64 {
        let mut worst = 0.0f64;
        if let Some(bounds) = &self.bounds {
            for (k, &(lo, hi)) in bounds.iter().enumerate() {
                worst = worst.max(lo - x[k]).max(x[k] - hi);
            }
        }
        for h in &self.halfspaces {
            worst = worst.max(h.a.dot(x) - h.b);
        }
        worst
    }

    /// Text form: sections `Q`, `c`, and when present `box` (rows `lo hi`)
    /// and `halfspaces` (rows `a_1 .. a_n b`).
    pub fn to_text(&self) -> String {
        let q = rows(&self.q);
        let c = vec![self.c.iter().copied().collect::<Vec<_>>()];
        let bounds: Option<Vec<Vec<f64>>> = self
            .bounds
            .as_ref()
            .map(|b| b.iter().map(|&(lo, hi)| vec![lo, hi]).collect());
        let halfspaces: Vec<Vec<f64>> = self
            .halfspaces
            .iter()
            .map(|h| h.a.iter().copied().chain([h.b]).collect())
            .collect();
        let mut sections = vec![("Q", q.as_slice()), ("c", c.as_slice())];
        if let Some(b) = &bounds {
            sections.push(("box", b.as_slice()));
        }
        if !halfspaces.is_empty() {
            sections.push(("halfspaces", halfspaces.as_slice()));
        }
        write_blocks(sections)
    }

    pub fn from_text(text: &str) -> Result<Self, OptError> {
        let blocks = parse_blocks(text, &["Q", "c", "box", "halfspaces"])?;
        let q_rows = blocks
            .get("Q")
            .ok_or_else(|| OptError::InvalidProblem("missing section `Q`".into()))?;
        let c_rows = blocks
            .get("c")
            .ok_or_else(|| OptError::InvalidProblem("missing section `c`".into()))?;
        let c: Vec<f64> = c_rows.iter().flatten().copied().collect();
        let n = c.len();
        if q_rows.len() != n || q_rows.iter().any(|r| r.len() != n) {
            return Err(OptError::InvalidProblem(format!("`Q` must be {n}x{n}")));
        }
        let q = DMatrix::from_row_iterator(n, n, q_rows.iter().flatten().copied());
        let bounds = match blocks.get("box") {
            None => None,
            Some(rows) => {
                if rows.iter().any(|r| r.len() != 2) {
                    return Err(OptError::InvalidProblem("`box` rows are `lo hi`".into()));
                }
                Some(rows.iter().map(|r| (r[0], r[1])).collect())
            }
        };
        let halfspaces = match blocks.get("halfspaces") {
            None => Vec::new(),
            Some(rows) => rows
                .iter()
                .map(|r| {
                    if r.len() != n + 1 {
                        return Err(OptError::InvalidProblem(format!(
                            "`halfspaces` rows need {} values",
                            n + 1
                        )));
                    }
                    Ok(Halfspace {
                        a: DVector::from_column_slice(&r[..n]),
                        b: r[n],
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        let p = Self {
            q,
            c: DVector::from_vec(c),
            bounds,
            halfspaces,
        };
        p.validate()?;
        Ok(p)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl Serialize for QpProblem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // JSON has no infinities; unbounded ends are written as null.
        let finite = |v: f64| v.is_finite().then_some(v);
        let mut s = serializer.serialize_struct("QpProblem", 4)?;
        s.serialize_field("Q", &rows(&self.q))?;
        s.serialize_field("c", self.c.as_slice())?;
        s.serialize_field(
            "box",
            &self
                .bounds
                .as_ref()
                .map(|b| b.iter().map(|&(lo, hi)| (finite(lo), finite(hi))).collect::<Vec<_>>()),
        )?;
        s.serialize_field(
            "halfspaces",
            &self
                .halfspaces
                .iter()
                .map(|h| (h.a.as_slice(), h.b))
                .collect::<Vec<_>>(),
        )?;
        s.end()
    }
}
