use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::data::Samples;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Multinomial logistic regression.
    #[default]
    Softmax,
    /// One tanh hidden layer followed by a softmax output.
    Mlp,
}

/// Shape of a classifier whose parameters live in one flat vector.
///
/// Softmax layout: `W (c x d)` row-major, then `b (c)`.
/// MLP layout: `W1 (h x d)`, `b1 (h)`, `W2 (c x h)`, `b2 (c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classifier {
    pub kind: ModelKind,
    pub dim: usize,
    pub classes: usize,
    pub hidden: usize,
}

impl Classifier {
    pub fn softmax(dim: usize, classes: usize) -> Self {
        Classifier { kind: ModelKind::Softmax, dim, classes, hidden: 0 }
    }

    pub fn mlp(dim: usize, classes: usize, hidden: usize) -> Self {
        Classifier { kind: ModelKind::Mlp, dim, classes, hidden }
    }

    pub fn num_params(&self) -> usize {
        match self.kind {
            ModelKind::Softmax => self.classes * (self.dim + 1),
            ModelKind::Mlp => self.hidden * (self.dim + 1) + self.classes * (self.hidden + 1),
        }
    }

    /// Seeded initial parameters: small Gaussian weights, zero biases.
    pub fn init(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![0.0; self.num_params()];
        let mut fill = |slice: &mut [f64], std: f64| {
            for v in slice {
                *v = std * rng.sample::<f64, _>(StandardNormal);
            }
        };
        match self.kind {
            ModelKind::Softmax => {
                let (w, _) = p.split_at_mut(self.classes * self.dim);
                fill(w, 0.01);
            }
            ModelKind::Mlp => {
                let (d, h, c) = (self.dim, self.hidden, self.classes);
                fill(&mut p[..h * d], 1.0 / (d as f64).sqrt());
                let w2 = h * (d + 1);
                fill(&mut p[w2..w2 + c * h], 1.0 / (h as f64).sqrt());
            }
        }
        p
    }

    /// Class logits for one input. `hidden_out` receives the hidden
    /// activations for the MLP.
    fn forward(&self, p: &[f64], x: &[f64], hidden_out: &mut Vec<f64>, logits: &mut Vec<f64>) {
        let (d, c) = (self.dim, self.classes);
        logits.clear();
        match self.kind {
            ModelKind::Softmax => {
                let b = &p[c * d..];
                for k in 0..c {
                    logits.push(dot(&p[k * d..(k + 1) * d], x) + b[k]);
                }
            }
            ModelKind::Mlp => {
                let h = self.hidden;
                let b1 = &p[h * d..h * (d + 1)];
                let w2 = &p[h * (d + 1)..h * (d + 1) + c * h];
                let b2 = &p[h * (d + 1) + c * h..];
                hidden_out.clear();
                for j in 0..h {
                    hidden_out.push((dot(&p[j * d..(j + 1) * d], x) + b1[j]).tanh());
                }
                for k in 0..c {
                    logits.push(dot(&w2[k * h..(k + 1) * h], hidden_out) + b2[k]);
                }
            }
        }
    }

    /// Mean cross-entropy over `rows` of `data`; the gradient is written to
    /// `grad` (overwritten).
    pub fn loss_grad(&self, p: &[f64], data: &Samples, rows: &[usize], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        if rows.is_empty() {
            return 0.0;
        }
        let (d, c) = (self.dim, self.classes);
        let scale = 1.0 / rows.len() as f64;
        let mut hidden = Vec::with_capacity(self.hidden);
        let mut z = Vec::with_capacity(c);
        let mut dz = vec![0.0; c];
        let mut dh = vec![0.0; self.hidden];
        let mut loss = 0.0;

        for &i in rows {
            let x = data.row(i);
            let y = data.labels[i];
            self.forward(p, x, &mut hidden, &mut z);
            let lse = log_sum_exp(&z);
            loss += lse - z[y];
            for k in 0..c {
                dz[k] = ((z[k] - lse).exp() - f64::from(u8::from(k == y))) * scale;
            }
            match self.kind {
                ModelKind::Softmax => {
                    for k in 0..c {
                        axpy(dz[k], x, &mut grad[k * d..(k + 1) * d]);
                        grad[c * d + k] += dz[k];
                    }
                }
                ModelKind::Mlp => {
                    let h = self.hidden;
                    let w2_at = h * (d + 1);
                    let b2_at = w2_at + c * h;
                    dh.iter_mut().for_each(|v| *v = 0.0);
                    for k in 0..c {
                        axpy(dz[k], &hidden, &mut grad[w2_at + k * h..w2_at + (k + 1) * h]);
                        grad[b2_at + k] += dz[k];
                        axpy(dz[k], &p[w2_at + k * h..w2_at + (k + 1) * h], &mut dh);
                    }
                    for j in 0..h {
                        let da = dh[j] * (1.0 - hidden[j] * hidden[j]);
                        axpy(da, x, &mut grad[j * d..(j + 1) * d]);
                        grad[h * d + j] += da;
                    }
                }
            }
        }
        loss * scale
    }

    /// Mean cross-entropy over all of `data`.
    pub fn loss(&self, p: &[f64], data: &Samples) -> f64 {
        let mut hidden = Vec::new();
        let mut z = Vec::new();
        let total: f64 = (0..data.len())
            .map(|i| {
                self.forward(p, data.row(i), &mut hidden, &mut z);
                log_sum_exp(&z) - z[data.labels[i]]
            })
            .sum();
        total / data.len().max(1) as f64
    }

    /// Arg-max class; ties go to the lowest index.
    pub fn predict(&self, p: &[f64], x: &[f64]) -> usize {
        let mut hidden = Vec::new();
        let mut z = Vec::new();
        self.forward(p, x, &mut hidden, &mut z);
        let mut best = 0;
        for k in 1..z.len() {
            if z[k] > z[best] {
                best = k;
            }
        }
        best
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
