use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClientId, Histogram};

/// Label-skew pattern of a synthetic pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonIidType {
    /// Every client holds a single class.
    OneLabel,
    /// Two classes at 9:1.
    #[serde(rename = "two_labels_9_1")]
    TwoLabels,
    /// Three classes at 5:4:1, plus a few two-class clients at 5:1 or 4:1.
    #[serde(rename = "three_labels_5_4_1")]
    ThreeLabels,
}

impl NonIidType {
    pub fn labels_per_client(self) -> usize {
        match self {
            NonIidType::OneLabel => 1,
            NonIidType::TwoLabels => 2,
            NonIidType::ThreeLabels => 3,
        }
    }

    pub fn ratios(self) -> &'static [u64] {
        match self {
            NonIidType::OneLabel => &[1],
            NonIidType::TwoLabels => &[9, 1],
            NonIidType::ThreeLabels => &[5, 4, 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonIidSpec {
    #[serde(rename = "type")]
    pub kind: NonIidType,
    pub n_clients: usize,
    pub samples_per_client: u64,
    pub n_classes: usize,
    pub seed: u64,
    pub feature_dim: usize,
    /// Distance of each class mean from the origin, in noise standard deviations.
    pub class_separation: f64,
    pub test_per_class: usize,
}

impl Default for NonIidSpec {
    fn default() -> Self {
        NonIidSpec {
            kind: NonIidType::OneLabel,
            n_clients: 100,
            samples_per_client: 60,
            n_classes: 10,
            seed: 0,
            feature_dim: 16,
            class_separation: 2.0,
            test_per_class: 200,
        }
    }
}

impl NonIidSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_clients == 0 {
            return Err(Error::Config("n_clients must be positive".into()));
        }
        if self.samples_per_client == 0 {
            return Err(Error::Config("samples_per_client must be positive".into()));
        }
        if self.n_classes < self.kind.labels_per_client() {
            return Err(Error::Config(format!(
                "{:?} needs at least {} classes, got {}",
                self.kind,
                self.kind.labels_per_client(),
                self.n_classes
            )));
        }
        if self.feature_dim == 0 {
            return Err(Error::Config("feature_dim must be positive".into()));
        }
        if !(self.class_separation.is_finite() && self.class_separation >= 0.0) {
            return Err(Error::Config("class_separation must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Rows of `dim` features with integer labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Samples {
    pub fn new(dim: usize) -> Self {
        Samples { dim, features: Vec::new(), labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64], label: usize) {
        debug_assert_eq!(x.len(), self.dim);
        self.features.extend_from_slice(x);
        self.labels.push(label);
    }

    pub fn histogram(&self, classes: usize) -> Histogram {
        let mut h = vec![0; classes];
        for &y in &self.labels {
            h[y] += 1;
        }
        Histogram::new(h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClientData {
    pub id: ClientId,
    pub histogram: Histogram,
    pub samples: Samples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub classes: usize,
    pub dim: usize,
    pub class_means: Vec<Vec<f64>>,
    pub clients: Vec<ClientData>,
    pub test: Samples,
}

impl SyntheticDataset {
    pub fn pool(&self) -> Vec<(ClientId, Histogram)> {
        self.clients.iter().map(|c| (c.id.clone(), c.histogram.clone())).collect()
    }

    pub fn client(&self, id: &ClientId) -> Option<&ClientData> {
        self.clients.iter().find(|c| &c.id == id)
    }
}

/// Splits `total` in proportion to `ratios`; leftover units go to the
/// largest fractional parts, earlier entries first on ties.
pub fn largest_remainder(total: u64, ratios: &[u64]) -> Vec<u64> {
    let denom: u64 = ratios.iter().sum();
    if denom == 0 {
        return vec![0; ratios.len()];
    }
    let mut parts: Vec<u64> = ratios.iter().map(|r| total * r / denom).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(total * ratios[i] % denom));
    let short = total - parts.iter().sum::<u64>();
    for &i in order.iter().take(short as usize) {
        parts[i] += 1;
    }
    parts
}

fn distinct_offsets(rng: &mut ChaCha8Rng, classes: usize, count: usize) -> Vec<usize> {
    let mut offsets: Vec<usize> = (1..classes).collect();
    offsets.shuffle(rng);
    offsets.truncate(count);
    offsets
}

/// Label histograms of a synthetic pool.
///
/// Clients are laid out in blocks of `n_classes`; within a block client `i`
/// takes class `i mod c` as its majority label and every further label is
/// the majority shifted by a per-block offset, so each block contributes
/// the same amount to every class.
pub fn noniid_histograms(spec: &NonIidSpec) -> Result<Vec<Histogram>> {
    spec.validate()?;
    let c = spec.n_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blocks = spec.n_clients.div_ceil(c);
    let two_label_blocks = match spec.kind {
        NonIidType::ThreeLabels => {
            let mut b: Vec<usize> = (0..blocks).collect();
            b.shuffle(&mut rng);
            b.truncate(blocks / 10);
            b
        }
        _ => Vec::new(),
    };

    let mut out = Vec::with_capacity(spec.n_clients);
    for block in 0..blocks {
        let labels = spec.kind.labels_per_client();
        let offsets = distinct_offsets(&mut rng, c, labels - 1);
        let short = two_label_blocks.contains(&block);
        for i in block * c..((block + 1) * c).min(spec.n_clients) {
            let major = i % c;
            let mut h = vec![0; c];
            if short {
                let ratios: &[u64] = if rng.gen_bool(0.5) { &[5, 1] } else { &[4, 1] };
                let parts = largest_remainder(spec.samples_per_client, ratios);
                h[major] += parts[0];
                h[(major + offsets[0]) % c] += parts[1];
            } else {
                let parts = largest_remainder(spec.samples_per_client, spec.kind.ratios());
                h[major] += parts[0];
                for (k, &off) in offsets.iter().enumerate() {
                    h[(major + off) % c] += parts[k + 1];
                }
            }
            out.push(Histogram::new(h));
        }
    }
    Ok(out)
}

fn gaussian_row(rng: &mut ChaCha8Rng, mean: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)));
}

/// Random class means: independent Gaussian directions scaled to
/// `separation`.
pub fn class_means(rng: &mut ChaCha8Rng, classes: usize, dim: usize, separation: f64) -> Vec<Vec<f64>> {
    (0..classes)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            v.into_iter().map(|x| x * separation / norm).collect()
        })
        .collect()
}

/// Builds a synthetic non-iid pool and the matching dataset. Client `i`
/// gets id `i`; each client's samples realize its histogram exactly.
pub fn make_noniid_pool(spec: &NonIidSpec) -> Result<(Vec<(ClientId, Histogram)>, SyntheticDataset)> {
    let histograms = noniid_histograms(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_da7a);
    let means = class_means(&mut rng, spec.n_classes, spec.feature_dim, spec.class_separation);
    let mut row = Vec::with_capacity(spec.feature_dim);

    let mut clients = Vec::with_capacity(histograms.len());
    for (i, h) in histograms.into_iter().enumerate() {
        let mut labels: Vec<usize> =
            h.counts().iter().enumerate().flat_map(|(y, &n)| std::iter::repeat(y).take(n as usize)).collect();
        labels.shuffle(&mut rng);
        let mut samples = Samples::new(spec.feature_dim);
        for y in labels {
            gaussian_row(&mut rng, &means[y], &mut row);
            samples.push(&row, y);
        }
        clients.push(ClientData { id: ClientId::from(i), histogram: h, samples });
    }

    let mut test = Samples::new(spec.feature_dim);
    for y in 0..spec.n_classes {
        for _ in 0..spec.test_per_class {
            gaussian_row(&mut rng, &means[y], &mut row);
            test.push(&row, y);
        }
    }

    let dataset =
        SyntheticDataset { classes: spec.n_classes, dim: spec.feature_dim, class_means: means, clients, test };
    Ok((dataset.pool(), dataset))
}
