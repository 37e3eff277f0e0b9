use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{put_f64s, put_u32, Reader};
use crate::eigen::FeatureMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Target for the output unit of the true class.
pub const TARGET_ON: f64 = 0.9;
/// Target for every other output unit.
pub const TARGET_OFF: f64 = -0.9;

const MAGIC: &[u8; 8] = b"TFRSMLP1";
const INIT_RANGE: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    /// Linear units; only useful for checking the optimizer on a smooth surface.
    Identity,
}

impl Activation {
    fn apply(self, net: f64) -> f64 {
        match self {
            Activation::Tanh => net.tanh(),
            Activation::Identity => net,
        }
    }

    /// Derivative expressed through the unit's output.
    fn slope(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    /// Input, three hidden widths, output.
    pub layer_sizes: [usize; 5],
    pub learning_rate: f64,
    /// Fraction of the previous weight change carried into the next one.
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    pub target_loss: f64,
    pub activation: Activation,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            layer_sizes: [10, 32, 32, 32, 10],
            learning_rate: 0.02,
            momentum: 0.9,
            epochs: 1000,
            seed: 0,
            target_loss: 1e-3,
            activation: Activation::Tanh,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.contains(&0) {
            return Err(Error::size(format!(
                "layer sizes {:?} must all be >= 1",
                self.layer_sizes
            )));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::size(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return Err(Error::size(format!("momentum {} outside [0, 1]", self.momentum)));
        }
        if self.target_loss.is_nan() || self.target_loss < 0.0 {
            return Err(Error::size(format!("target loss {} must be >= 0", self.target_loss)));
        }
        Ok(())
    }
}

/// Fully connected layer: `weights` is `out x in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub config: MlpConfig,
    /// Class label of each output unit.
    pub classes: Vec<u32>,
}

/// Unit outputs of every layer for one input; `activations[0]` is the input.
#[derive(Clone, Debug)]
pub struct Forward {
    pub activations: Vec<Vec<f64>>,
}

impl Forward {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least the input layer")
    }
}

/// Inputs paired with explicit target vectors.
#[derive(Clone, Debug)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

/// `dE/dW` and `dE/db` laid out like [`MlpModel::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradient {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradient {
            weights: model
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
            biases: model.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Every partial derivative, weights before biases, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }
}

/// Per-epoch loss values recorded by [`MlpModel::train`].
#[derive(Clone, Debug, Default)]
pub struct TrainingLog {
    /// Loss before each applied update, plus the loss after the last one.
    pub losses: Vec<f64>,
    pub epochs_run: usize,
}

/// Momentum update applied to one parameter block:
/// `change = momentum * change - (1 - momentum) * learning_rate * grad`.
///
/// With momentum 0 this is plain gradient descent; with momentum 1 the
/// gradient is ignored and the previous change repeats.
pub fn momentum_step(change: &mut [f64], grad: &[f64], learning_rate: f64, momentum: f64) {
    for (c, g) in change.iter_mut().zip(grad) {
        *c = momentum * *c - (1.0 - momentum) * learning_rate * g;
    }
}

impl MlpModel {
    /// Random weights and biases, uniform in `[-0.5, 0.5]`, drawn from a
    /// ChaCha stream seeded with `config.seed`.
    pub fn init(config: &MlpConfig, classes: Vec<u32>) -> Result<Self> {
        config.validate()?;
        let out = config.layer_sizes[4];
        if classes.len() > out {
            return Err(Error::Label(classes[out]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                    .collect();
                let biases = (0..fan_out)
                    .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                    .collect();
                Layer {
                    weights: Matrix::from_vec(fan_out, fan_in, weights).expect("sized above"),
                    biases,
                }
            })
            .collect();
        Ok(MlpModel {
            layers,
            config: config.clone(),
            classes,
        })
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, |l| l.biases.len())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.biases.len())
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.input_size() {
            return Err(Error::size(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        let act = self.config.activation;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for layer in &self.layers {
            let prev = activations.last().expect("non-empty");
            let next = (0..layer.biases.len())
                .map(|j| act.apply(dot(layer.weights.row(j), prev) + layer.biases[j]))
                .collect();
            activations.push(next);
        }
        Ok(Forward { activations })
    }

    /// Index of the largest output unit; ties go to the lowest index.
    pub fn predict_unit(&self, x: &[f64]) -> Result<usize> {
        let f = self.forward(x)?;
        let out = f.output();
        let mut best = 0;
        for (j, &v) in out.iter().enumerate().skip(1) {
            if v > out[best] {
                best = j;
            }
        }
        Ok(best)
    }

    /// Class label of the winning output unit.
    pub fn predict(&self, x: &[f64]) -> Result<u32> {
        let unit = self.predict_unit(x)?;
        self.classes
            .get(unit)
            .copied()
            .ok_or_else(|| Error::size(format!("output unit {unit} has no class")))
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.inputs.len() != batch.targets.len() {
            return Err(Error::size(format!(
                "{} inputs but {} targets",
                batch.inputs.len(),
                batch.targets.len()
            )));
        }
        if let Some(t) = batch.targets.iter().find(|t| t.len() != self.output_size()) {
            return Err(Error::size(format!(
                "target has length {}, network has {} outputs",
                t.len(),
                self.output_size()
            )));
        }
        Ok(())
    }

    /// `E = 1/2 * sum over examples and outputs of (target - output)^2`.
    pub fn loss(&self, batch: &Batch) -> Result<f64> {
        self.check_batch(batch)?;
        let mut e = 0.0;
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let f = self.forward(x)?;
            e += f.output().iter().zip(t).map(|(y, t)| (t - y) * (t - y)).sum::<f64>();
        }
        Ok(0.5 * e)
    }

    /// Exact gradient of [`MlpModel::loss`] by backpropagation, summed over the batch.
    pub fn gradient(&self, batch: &Batch) -> Result<Gradient> {
        self.check_batch(batch)?;
        let act = self.config.activation;
        let mut grad = Gradient::zeros_like(self);
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let f = self.forward(x)?;
            let out = f.output();
            let mut delta: Vec<f64> = out.iter().zip(t).map(|(&y, &t)| (y - t) * act.slope(y)).collect();
            for l in (0..self.layers.len()).rev() {
                let input = &f.activations[l];
                let gw = &mut grad.weights[l];
                for (j, &d) in delta.iter().enumerate() {
                    for (g, &a) in gw.row_mut(j).iter_mut().zip(input) {
                        *g += d * a;
                    }
                    grad.biases[l][j] += d;
                }
                if l > 0 {
                    let back = self.layers[l].weights.tr_mul_vec(&delta);
                    delta = back.iter().zip(input).map(|(&b, &a)| b * act.slope(a)).collect();
                }
            }
        }
        Ok(grad)
    }

    /// One-hot `+-0.9` targets for the given labels.
    pub fn targets_for(&self, labels: &[u32]) -> Result<Vec<Vec<f64>>> {
        labels
            .iter()
            .map(|&label| {
                let unit = self
                    .classes
                    .iter()
                    .position(|&c| c == label)
                    .ok_or(Error::Label(label))?;
                let mut t = vec![TARGET_OFF; self.output_size()];
                t[unit] = TARGET_ON;
                Ok(t)
            })
            .collect()
    }

    /// Full-batch training from the seeded initialization.
    ///
    /// Each epoch computes the summed gradient over all rows and applies one
    /// momentum update to every weight and bias. Training stops after
    /// `config.epochs` updates or as soon as the loss reaches
    /// `config.target_loss`. Output units are assigned to classes in order of
    /// first appearance.
    pub fn train(train: &FeatureMatrix, config: &MlpConfig) -> Result<(MlpModel, TrainingLog)> {
        if train.rows() == 0 {
            return Err(Error::size("no training rows"));
        }
        if train.cols() != config.layer_sizes[0] {
            return Err(Error::size(format!(
                "features have length {}, input layer has {}",
                train.cols(),
                config.layer_sizes[0]
            )));
        }
        let mut classes = Vec::new();
        for &l in train.labels() {
            if !classes.contains(&l) {
                classes.push(l);
            }
        }
        let mut model = MlpModel::init(config, classes)?;
        let batch = Batch {
            inputs: (0..train.rows()).map(|i| train.row(i).to_vec()).collect(),
            targets: model.targets_for(train.labels())?,
        };
        let log = model.fit(&batch)?;
        Ok((model, log))
    }

    /// Runs the momentum loop from the current weights.
    pub fn fit(&mut self, batch: &Batch) -> Result<TrainingLog> {
        let (lr, mc) = (self.config.learning_rate, self.config.momentum);
        let mut change = Gradient::zeros_like(self);
        let mut log = TrainingLog::default();
        for _ in 0..self.config.epochs {
            let e = self.loss(batch)?;
            log.losses.push(e);
            if e <= self.config.target_loss {
                return Ok(log);
            }
            let g = self.gradient(batch)?;
            for (l, layer) in self.layers.iter_mut().enumerate() {
                let cw = &mut change.weights[l];
                momentum_step(cw.data_mut(), g.weights[l].data(), lr, mc);
                for (w, c) in layer.weights.data_mut().iter_mut().zip(cw.data()) {
                    *w += c;
                }
                momentum_step(&mut change.biases[l], &g.biases[l], lr, mc);
                for (b, c) in layer.biases.iter_mut().zip(&change.biases[l]) {
                    *b += c;
                }
            }
            log.epochs_run += 1;
        }
        log.losses.push(self.loss(batch)?);
        Ok(log)
    }

    /// `TFRSMLP1`, layer count and the five layer widths (`u32`), each layer's
    /// weights then biases (`f64`), then the output class labels (`u32`) and
    /// the training configuration. Little-endian throughout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        let sizes = self.config.layer_sizes;
        put_u32(&mut out, sizes.len() as u32);
        for s in sizes {
            put_u32(&mut out, s as u32);
        }
        for layer in &self.layers {
            put_f64s(&mut out, layer.weights.data());
            put_f64s(&mut out, &layer.biases);
        }
        put_u32(&mut out, self.classes.len() as u32);
        for &c in &self.classes {
            put_u32(&mut out, c);
        }
        let c = &self.config;
        put_f64s(&mut out, &[c.learning_rate, c.momentum, c.target_loss]);
        put_u32(&mut out, c.epochs as u32);
        out.extend_from_slice(&c.seed.to_le_bytes());
        put_u32(
            &mut out,
            match c.activation {
                Activation::Tanh => 0,
                Activation::Identity => 1,
            },
        );
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        let count = r.u32()?;
        if count != 5 {
            return Err(Error::Format(format!("expected 5 layer sizes, found {count}")));
        }
        let mut sizes = [0usize; 5];
        for s in sizes.iter_mut() {
            *s = r.u32()? as usize;
        }
        let mut layers = Vec::with_capacity(4);
        for w in sizes.windows(2) {
            let weights = Matrix::from_vec(w[1], w[0], r.f64s(w[0] * w[1])?)?;
            let biases = r.f64s(w[1])?;
            layers.push(Layer { weights, biases });
        }
        let n_classes = r.u32()? as usize;
        if n_classes > sizes[4] {
            return Err(Error::Format(format!("{n_classes} classes for {} outputs", sizes[4])));
        }
        let classes = r.u32s(n_classes)?;
        let learning_rate = r.f64()?;
        let momentum = r.f64()?;
        let target_loss = r.f64()?;
        let epochs = r.u32()? as usize;
        let seed = u64::from_le_bytes(r.bytes(8)?.try_into().expect("8 bytes"));
        let activation = match r.u32()? {
            0 => Activation::Tanh,
            1 => Activation::Identity,
            other => return Err(Error::Format(format!("unknown activation tag {other}"))),
        };
        r.finish()?;
        Ok(MlpModel {
            layers,
            config: MlpConfig {
                layer_sizes: sizes,
                learning_rate,
                momentum,
                epochs,
                seed,
                target_loss,
                activation,
            },
            classes,
        })
    }
}

/// Trains a network on `train` and discards the loss log.
pub fn mlp_train(train: &FeatureMatrix, config: &MlpConfig) -> Result<MlpModel> {
    MlpModel::train(train, config).map(|(model, _)| model)
}
