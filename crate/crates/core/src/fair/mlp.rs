//! One-hidden-layer tanh network with a linear output.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "MlpRepr", into = "MlpRepr")]
pub struct Mlp {
    /// `hidden x inputs`.
    w1: DMatrix<f64>,
    b1: DVector<f64>,
    w2: DVector<f64>,
    b2: f64,
}

#[derive(Serialize, Deserialize)]
struct MlpRepr {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl From<MlpRepr> for Mlp {
    fn from(r: MlpRepr) -> Self {
        let p = r.w1.first().map_or(0, Vec::len);
        Mlp {
            w1: DMatrix::from_fn(r.w1.len(), p, |i, j| r.w1[i][j]),
            b1: DVector::from_vec(r.b1),
            w2: DVector::from_vec(r.w2),
            b2: r.b2,
        }
    }
}

impl From<Mlp> for MlpRepr {
    fn from(m: Mlp) -> Self {
        MlpRepr {
            w1: (0..m.w1.nrows())
                .map(|i| m.w1.row(i).iter().copied().collect())
                .collect(),
            b1: m.b1.iter().copied().collect(),
            w2: m.w2.iter().copied().collect(),
            b2: m.b2,
        }
    }
}

/// Activations kept for the backward pass.
pub struct Forward {
    hidden: DMatrix<f64>,
    pub output: DVector<f64>,
}

impl Mlp {
    /// Weights uniform on `±1/√fan_in`, biases zero.
    pub fn init<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let s1 = 1.0 / (inputs.max(1) as f64).sqrt();
        let s2 = 1.0 / (hidden.max(1) as f64).sqrt();
        Mlp {
            w1: DMatrix::from_fn(hidden, inputs, |_, _| rng.random_range(-s1..=s1)),
            b1: DVector::zeros(hidden),
            w2: DVector::from_fn(hidden, |_, _| rng.random_range(-s2..=s2)),
            b2: 0.0,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.hidden() * (self.inputs() + 2) + 1
    }

    /// Flat parameters: `w1` row-major, `b1`, `w2`, `b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for i in 0..self.hidden() {
            p.extend(self.w1.row(i).iter());
        }
        p.extend(self.b1.iter());
        p.extend(self.w2.iter());
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter count");
        let (h, k) = (self.hidden(), self.inputs());
        for i in 0..h {
            for j in 0..k {
                self.w1[(i, j)] = p[i * k + j];
            }
        }
        let off = h * k;
        self.b1.copy_from_slice(&p[off..off + h]);
        self.w2.copy_from_slice(&p[off + h..off + 2 * h]);
        self.b2 = p[off + 2 * h];
    }

    pub fn from_params(inputs: usize, hidden: usize, p: &[f64]) -> Self {
        let mut m = Mlp {
            w1: DMatrix::zeros(hidden, inputs),
            b1: DVector::zeros(hidden),
            w2: DVector::zeros(hidden),
            b2: 0.0,
        };
        m.set_params(p);
        m
    }

    /// `x` is `rows x inputs`.
    pub fn forward(&self, x: &DMatrix<f64>) -> Forward {
        let mut hidden = x * self.w1.transpose();
        for mut row in hidden.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(self.b1.iter()) {
                *v = (*v + b).tanh();
            }
        }
        let output = (&hidden * &self.w2).add_scalar(self.b2);
        Forward { hidden, output }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        self.forward(x).output
    }

    /// Adds the gradient of a loss with `d loss / d output = g` into `grad`.
    pub fn backward(&self, x: &DMatrix<f64>, fwd: &Forward, g: &DVector<f64>, grad: &mut [f64]) {
        let (h, k) = (self.hidden(), self.inputs());
        let gw2 = fwd.hidden.transpose() * g;
        let mut dz = g * self.w2.transpose();
        dz.zip_apply(&fwd.hidden, |d, a| *d *= 1.0 - a * a);
        let gw1 = dz.transpose() * x;
        for i in 0..h {
            for j in 0..k {
                grad[i * k + j] += gw1[(i, j)];
            }
        }
        let off = h * k;
        for i in 0..h {
            grad[off + i] += dz.column(i).sum();
            grad[off + h + i] += gw2[i];
        }
        grad[off + 2 * h] += g.sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn params_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = Mlp::init(3, 4, &mut rng);
        assert_eq!(m.n_params(), 21);
        let p = m.params();
        assert_eq!(Mlp::from_params(3, 4, &p), m);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Mlp>(&json).unwrap(), m);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = Mlp::init(2, 3, &mut rng);
        let x = DMatrix::from_row_slice(4, 2, &[0.1, -0.3, 1.0, 0.5, -0.7, 0.2, 0.0, 1.1]);
        // loss = Σ output²/2, so d loss / d output = output.
        let loss = |m: &Mlp| m.predict(&x).iter().map(|v| v * v / 2.0).sum::<f64>();
        let fwd = m.forward(&x);
        let mut grad = vec![0.0; m.n_params()];
        m.backward(&x, &fwd, &fwd.output.clone(), &mut grad);
        let p = m.params();
        for i in 0..p.len() {
            let (mut hi, mut lo) = (p.clone(), p.clone());
            hi[i] += 1e-6;
            lo[i] -= 1e-6;
            let fd =
                (loss(&Mlp::from_params(2, 3, &hi)) - loss(&Mlp::from_params(2, 3, &lo))) / 2e-6;
            assert!(
                (fd - grad[i]).abs() < 1e-6,
                "param {i}: {fd} vs {}",
                grad[i]
            );
        }
    }
}
