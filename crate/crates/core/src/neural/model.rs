use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{parse_blocks, write_blocks};

use super::NeuralError;

/// Largest supported input dimension.
pub const MAX_INPUT_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Init {
    /// Entries uniform in `[-scale, scale]`.
    Random { scale: f64 },
    /// Encoder all zero, decoder random with scale 0.1.
    ZeroEncoder,
    /// Both maps the truncated identity.
    Identity,
}

/// `x ↦ W_dec W_enc x` with `W_enc: k×n`, `W_dec: n×k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAutoencoder {
    pub w_enc: DMatrix<f64>,
    pub w_dec: DMatrix<f64>,
    pub step: f64,
    pub norm_bound: f64,
}

/// Loss gradients with respect to both weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub enc: DMatrix<f64>,
    pub dec: DMatrix<f64>,
}

impl LinearAutoencoder {
    pub fn new(w_enc: DMatrix<f64>, w_dec: DMatrix<f64>, step: f64, norm_bound: f64) -> Result<Self, NeuralError> {
        let m = Self {
            w_enc,
            w_dec,
            step,
            norm_bound,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn init(
        n: usize,
        k: usize,
        init: Init,
        step: f64,
        norm_bound: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NeuralError> {
        let mut uniform = |rows, cols, scale: f64| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale));
        let (w_enc, w_dec) = match init {
            Init::Random { scale } => {
                let e = uniform(k, n, scale);
                (e, uniform(n, k, scale))
            }
            Init::ZeroEncoder => (DMatrix::zeros(k, n), uniform(n, k, 0.1)),
            Init::Identity => (DMatrix::identity(k, n), DMatrix::identity(n, k)),
        };
        let mut m = Self::new(w_enc, w_dec, step, norm_bound)?;
        m.clip();
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.w_enc.ncols()
    }

    pub fn code_dim(&self) -> usize {
        self.w_enc.nrows()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let (k, n) = self.w_enc.shape();
        if !(1..=MAX_INPUT_DIM).contains(&n) || k == 0 || k > n {
            return Err(NeuralError::InvalidModel(format!(
                "need 1 <= k <= n <= {MAX_INPUT_DIM}, got k = {k}, n = {n}"
            )));
        }
        if self.w_dec.shape() != (n, k) {
            return Err(NeuralError::DimensionMismatch {
                expected: n,
                found: self.w_dec.nrows(),
            });
        }
        if self.w_enc.iter().chain(self.w_dec.iter()).any(|v| !v.is_finite()) {
            return Err(NeuralError::InvalidModel("weights must be finite".into()));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(NeuralError::InvalidModel(format!("step must be positive, got {}", self.step)));
        }
        if !(self.norm_bound.is_finite() && self.norm_bound > 0.0) {
            return Err(NeuralError::InvalidModel(format!(
                "norm_bound must be positive, got {}",
                self.norm_bound
            )));
        }
        Ok(())
    }

    pub fn encode(&self, x: &DVector<f64>) -> Result<DVector<f64>, NeuralError> {
        if x.len() != self.input_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(&self.w_enc * x)
    }

    pub fn decode(&self, z: &DVector<f64>) -> Result<DVector<f64>, NeuralError> {
        if z.len() != self.code_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.code_dim(),
                found: z.len(),
            });
        }
        Ok(&self.w_dec * z)
    }

    /// `‖W_enc‖²_F + ‖W_dec‖²_F`.
    pub fn weight_energy(&self) -> f64 {
        self.w_enc.norm_squared() + self.w_dec.norm_squared()
    }

    fn check_batch(&self, batch: &[DVector<f64>]) -> Result<(), NeuralError> {
        if batch.is_empty() {
            return Err(NeuralError::EmptyBatch);
        }
        match batch.iter().find(|x| x.len() != self.input_dim()) {
            Some(x) => Err(NeuralError::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            }),
            None => Ok(()),
        }
    }

    /// `(1/m) Σ ‖W_dec W_enc x − x‖² + reg · (‖W_enc‖² + ‖W_dec‖²)`.
    pub fn loss(&self, batch: &[DVector<f64>], reg: f64) -> Result<f64, NeuralError> {
        self.check_batch(batch)?;
        let total: f64 = batch
            .iter()
            .map(|x| (&self.w_dec * (&self.w_enc * x) - x).norm_squared())
            .sum();
        Ok(total / batch.len() as f64 + reg * self.weight_energy())
    }

    pub fn gradients(&self, batch: &[DVector<f64>], reg: f64) -> Result<Gradients, NeuralError> {
        self.check_batch(batch)?;
        let scale = 2.0 / batch.len() as f64;
        let mut enc = &self.w_enc * (2.0 * reg);
        let mut dec = &self.w_dec * (2.0 * reg);
        for x in batch {
            let z = &self.w_enc * x;
            let r = &self.w_dec * &z - x;
            dec += &r * z.transpose() * scale;
            enc += self.w_dec.transpose() * &r * x.transpose() * scale;
        }
        Ok(Gradients { enc, dec })
    }

    /// Rescale each weight matrix whose Frobenius norm exceeds the bound.
    pub fn clip(&mut self) {
        for w in [&mut self.w_enc, &mut self.w_dec] {
            let norm = w.norm();
            if norm > self.norm_bound {
                *w *= self.norm_bound / norm;
            }
        }
    }

    /// One gradient step on `batch`, then clipping. On a non-finite result
    /// the model is left unchanged.
    pub fn gradient_step(&mut self, batch: &[DVector<f64>], reg: f64) -> Result<(), NeuralError> {
        let g = self.gradients(batch, reg)?;
        let w_enc = &self.w_enc - g.enc * self.step;
        let w_dec = &self.w_dec - g.dec * self.step;
        // Finite entries can still overflow the norm, which would clip to zero.
        if !(w_enc.norm().is_finite() && w_dec.norm().is_finite()) {
            return Err(NeuralError::NonFiniteUpdate);
        }
        self.w_enc = w_enc;
        self.w_dec = w_dec;
        self.clip();
        Ok(())
    }

    /// Snapshot with sections `W_enc`, `W_dec` and `params` (`step norm_bound`).
    pub fn to_text(&self) -> String {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
        let enc = rows(&self.w_enc);
        let dec = rows(&self.w_dec);
        let params = vec![vec![self.step, self.norm_bound]];
        write_blocks([
            ("W_enc", enc.as_slice()),
            ("W_dec", dec.as_slice()),
            ("params", params.as_slice()),
        ])
    }

    pub fn from_text(text: &str) -> Result<Self, NeuralError> {
        let blocks = parse_blocks(text, &["W_enc", "W_dec", "params"])?;
        let matrix = |name: &str| -> Result<DMatrix<f64>, NeuralError> {
            let rows = blocks
                .get(name)
                .ok_or_else(|| NeuralError::InvalidModel(format!("missing section `{name}`")))?;
            let cols = rows.first().map_or(0, Vec::len);
            if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
                return Err(NeuralError::InvalidModel(format!("`{name}` must be a non-empty matrix")));
            }
            Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.iter().flatten().copied()))
        };
        let params = matrix("params")?;
        if params.shape() != (1, 2) {
            return Err(NeuralError::InvalidModel("`params` is one row `step norm_bound`".into()));
        }
        Self::new(matrix("W_enc")?, matrix("W_dec")?, params[(0, 0)], params[(0, 1)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn identity_and_zero_encoders() {
        let id = LinearAutoencoder::new(DMatrix::identity(3, 3), DMatrix::identity(3, 3), 0.1, 10.0).unwrap();
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(id.encode(&x).unwrap(), x);
        let zero = LinearAutoencoder::new(DMatrix::zeros(2, 3), DMatrix::zeros(3, 2), 0.1, 10.0).unwrap();
        assert_eq!(zero.encode(&x).unwrap(), DVector::zeros(2));
        assert_eq!(zero.decode(&v(&[1.0, 1.0])).unwrap(), DVector::zeros(3));
        assert!(zero.encode(&v(&[1.0])).is_err());
    }

    #[test]
    fn rotation_preserves_norm_and_transpose_inverts() {
        let t: f64 = 0.7;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let m = LinearAutoencoder::new(rot.clone(), rot.transpose(), 0.1, 10.0).unwrap();
        let x = v(&[3.0, -4.0]);
        let z = m.encode(&x).unwrap();
        assert!((z.norm() - 5.0).abs() < 1e-12);
        assert!((m.decode(&z).unwrap() - &x).amax() < 1e-12);
    }

    #[test]
    fn stationary_point_is_left_alone() {
        let mut m = LinearAutoencoder::new(DMatrix::identity(3, 3), DMatrix::identity(3, 3), 0.5, 10.0).unwrap();
        let before = m.clone();
        m.gradient_step(&[v(&[1.0, 2.0, 3.0]), v(&[0.0, -1.0, 1.0])], 0.0).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn clipping_and_non_finite_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = LinearAutoencoder::init(4, 2, Init::Random { scale: 5.0 }, 0.01, 1.0, &mut rng).unwrap();
        assert!(m.w_enc.norm() <= 1.0 + 1e-12 && m.w_dec.norm() <= 1.0 + 1e-12);
        m.norm_bound = 1e300;
        m.step = 1e300;
        let before = m.clone();
        let big = vec![DVector::from_element(4, 1e10)];
        assert_eq!(m.gradient_step(&big, 0.0).unwrap_err(), NeuralError::NonFiniteUpdate);
        assert_eq!(m, before);
        // Entries near 1e200 are finite but their squared sum is not.
        m.step = 1e190;
        assert_eq!(m.gradient_step(&big, 0.0).unwrap_err(), NeuralError::NonFiniteUpdate);
        assert_eq!((&m.w_enc, &m.w_dec), (&before.w_enc, &before.w_dec));
        assert_eq!(m.gradient_step(&[], 0.0).unwrap_err(), NeuralError::EmptyBatch);
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = LinearAutoencoder::init(5, 3, Init::Random { scale: 0.3 }, 0.05, 2.0, &mut rng).unwrap();
        assert_eq!(LinearAutoencoder::from_text(&m.to_text()).unwrap(), m);
        assert!(LinearAutoencoder::from_text("W_enc\n1\n").is_err());
    }
}
