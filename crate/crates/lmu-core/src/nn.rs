//! Dense feed-forward classifier with softmax output and analytic
//! backpropagation, trained by mini-batch Adam with fixed hyperparameters.
//!
//! The engine only ever needs to *memorize* small labeled sets (reach 100%
//! training accuracy). Plain fixed-rate gradient descent plateaus on the
//! last handful of samples and needs thousands of epochs; Adam with a fixed
//! step converges in tens and is just as deterministic, so that is what the
//! trainer uses. Weights are
//! `f64` during training and rounded to `f32` precision before a model is
//! considered storable, so that persisting them as 32-bit reals loses
//! nothing.

use crate::error::Error;
use crate::rng::SplitMix64;
use crate::Result;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

/// Monotonic total of training epochs run in this process; build reports
/// snapshot it around tree constructions.
static EPOCHS_TRAINED: AtomicU64 = AtomicU64::new(0);

pub fn epochs_trained() -> u64 {
    EPOCHS_TRAINED.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

/// Shape and init seed of an `m`-`f[L]`-`n` network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub output_classes: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl MlpConfig {
    pub fn new(input_dim: usize, hidden_width: usize, hidden_layers: usize, output_classes: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_width,
            hidden_layers,
            output_classes,
            activation: Activation::Relu,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.hidden_width < 1 || self.hidden_layers < 1 {
            return Err(Error::InvalidDimensions(format!(
                "m={} f={} L={}",
                self.input_dim, self.hidden_width, self.hidden_layers
            )));
        }
        if self.output_classes < 2 {
            return Err(Error::InvalidDimensions(format!("n={}", self.output_classes)));
        }
        Ok(())
    }
}

/// Closed-form parameter counts: weights `m*f + (L-1)*f^2 + f*n`,
/// biases `L*f + n`.
pub fn param_count(config: &MlpConfig) -> (usize, usize) {
    let (m, f, l, n) = (
        config.input_dim,
        config.hidden_width,
        config.hidden_layers,
        config.output_classes,
    );
    (m * f + (l - 1) * f * f + f * n, l * f + n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major, `out_dim` rows of `in_dim` columns.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub config: MlpConfig,
    pub layers: Vec<Layer>,
}

/// Per-layer gradients, same shapes as the corresponding [`Layer`]s.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    fn scale(&mut self, s: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().for_each(|x| *x *= s);
            b.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            w.iter_mut().zip(ow).for_each(|(x, y)| *x += y);
            b.iter_mut().zip(ob).for_each(|(x, y)| *x += y);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()))
            .fold(0.0_f64, |m, &x| m.max(x.abs()))
    }
}

/// Reusable forward/backward buffers (one per training loop).
struct Scratch {
    /// Post-activation outputs per layer; last entry is the softmax.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(net: &Mlp) -> Self {
        Self {
            acts: net.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            deltas: net.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        }
    }
}

#[inline]
fn affine(layer: &Layer, input: &[f64], out: &mut [f64]) {
    for (row, o) in out.iter_mut().enumerate() {
        let w = &layer.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
        let mut acc = layer.biases[row];
        for (wi, xi) in w.iter().zip(input) {
            acc += wi * xi;
        }
        *o = acc;
    }
}

/// Numerically stable softmax in place.
pub fn softmax(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn init_layers(dims: &[usize], seed: u64) -> Vec<Layer> {
    let mut rng = SplitMix64::new(seed);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for win in dims.windows(2) {
        let (fan_in, fan_out) = (win[0], win[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights = (0..fan_in * fan_out)
            .map(|_| limit * rng.next_signed_unit())
            .collect();
        layers.push(Layer {
            in_dim: fan_in,
            out_dim: fan_out,
            weights,
            // Small positive constant keeps relu units alive at init and
            // keeps pre-activations off the exact kink.
            biases: vec![0.01; fan_out],
        });
    }
    layers
}

/// Deterministic scaled-uniform initialization from `config.seed`.
pub fn init_mlp(config: MlpConfig) -> Result<Mlp> {
    config.validate()?;
    let mut dims = Vec::with_capacity(config.hidden_layers + 2);
    dims.push(config.input_dim);
    dims.extend(std::iter::repeat(config.hidden_width).take(config.hidden_layers));
    dims.push(config.output_classes);
    Ok(Mlp {
        config,
        layers: init_layers(&dims, config.seed),
    })
}

/// A regressor: the same hidden stack with one linear output unit. Kept
/// apart from [`init_mlp`] because classifiers require at least two
/// classes; regressors only drive the benchmark trials.
pub fn init_regressor(
    input_dim: usize,
    hidden_width: usize,
    hidden_layers: usize,
    seed: u64,
) -> Result<Mlp> {
    if input_dim < 1 || hidden_width < 1 || hidden_layers < 1 {
        return Err(Error::InvalidDimensions(format!(
            "m={input_dim} f={hidden_width} L={hidden_layers}"
        )));
    }
    let mut dims = Vec::with_capacity(hidden_layers + 2);
    dims.push(input_dim);
    dims.extend(std::iter::repeat(hidden_width).take(hidden_layers));
    dims.push(1);
    Ok(Mlp {
        config: MlpConfig {
            input_dim,
            hidden_width,
            hidden_layers,
            output_classes: 1,
            activation: Activation::Relu,
            seed,
        },
        layers: init_layers(&dims, seed),
    })
}

impl Mlp {
    /// Softmax class distribution for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                got: input.len(),
            });
        }
        let mut scratch = Scratch::new(self);
        self.forward_into(input, &mut scratch);
        Ok(scratch.acts.last().unwrap().clone())
    }

    fn forward_into(&self, input: &[f64], scratch: &mut Scratch) {
        let n_layers = self.layers.len();
        for l in 0..n_layers {
            let (done, rest) = scratch.acts.split_at_mut(l);
            let src: &[f64] = if l == 0 { input } else { &done[l - 1] };
            let out = &mut rest[0];
            affine(&self.layers[l], src, out);
            if l + 1 < n_layers {
                out.iter_mut().for_each(|z| {
                    if *z < 0.0 {
                        *z = 0.0
                    }
                });
            } else {
                softmax(out);
            }
        }
    }

    /// Predicted class (argmax of the softmax; ties to the lowest index).
    pub fn predict(&self, input: &[f64]) -> usize {
        let mut scratch = Scratch::new(self);
        self.forward_into(input, &mut scratch);
        argmax(scratch.acts.last().unwrap())
    }

    /// Fraction of samples whose argmax prediction matches the label.
    pub fn accuracy(&self, samples: &[(Vec<f64>, usize)]) -> f64 {
        if samples.is_empty() {
            return 1.0;
        }
        let mut scratch = Scratch::new(self);
        let mut correct = 0usize;
        for (input, label) in samples {
            self.forward_into(input, &mut scratch);
            if argmax(scratch.acts.last().unwrap()) == *label {
                correct += 1;
            }
        }
        correct as f64 / samples.len() as f64
    }

    /// Sum of actually stored (weight, bias) array lengths.
    pub fn actual_param_count(&self) -> (usize, usize) {
        self.layers.iter().fold((0, 0), |(w, b), l| {
            (w + l.weights.len(), b + l.biases.len())
        })
    }

    /// Rounds every parameter to the nearest `f32`, so that 32-bit
    /// persistence is lossless afterwards.
    pub fn quantize_to_f32(&mut self) {
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = *w as f32 as f64;
            }
        }
    }

    /// Backprop of cross-entropy loss into `grads`, accumulating.
    /// Returns the predicted class for the sample.
    fn accumulate_gradient(
        &self,
        input: &[f64],
        label: usize,
        scratch: &mut Scratch,
        grads: &mut Gradients,
    ) -> usize {
        self.forward_into(input, scratch);
        let n_layers = self.layers.len();
        let probs = scratch.acts.last().unwrap();
        let predicted = argmax(probs);

        // Output delta: softmax probabilities minus the one-hot target.
        {
            let delta = &mut scratch.deltas[n_layers - 1];
            delta.copy_from_slice(&scratch.acts[n_layers - 1]);
            delta[label] -= 1.0;
        }
        self.backward_from_deltas(input, scratch, grads);
        predicted
    }

    /// Backward pass shared by the cross-entropy and squared-error paths;
    /// expects filled activations and the output-layer delta in `scratch`.
    fn backward_from_deltas(&self, input: &[f64], scratch: &mut Scratch, grads: &mut Gradients) {
        let n_layers = self.layers.len();
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            // Gradient w.r.t. this layer's parameters.
            {
                let prev: &[f64] = if l == 0 { input } else { &scratch.acts[l - 1] };
                let (gw, gb) = &mut grads.layers[l];
                let delta = &scratch.deltas[l];
                for (row, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let gw_row = &mut gw[row * layer.in_dim..(row + 1) * layer.in_dim];
                    for (g, x) in gw_row.iter_mut().zip(prev) {
                        *g += d * x;
                    }
                    gb[row] += d;
                }
            }
            if l == 0 {
                break;
            }
            // Delta for the previous (hidden) layer, masked by relu'.
            let (lower, upper) = scratch.deltas.split_at_mut(l);
            let delta = &upper[0];
            let prev_delta = &mut lower[l - 1];
            let prev_act = &scratch.acts[l - 1];
            for (i, pd) in prev_delta.iter_mut().enumerate() {
                if prev_act[i] <= 0.0 {
                    *pd = 0.0;
                    continue;
                }
                let mut acc = 0.0;
                for (row, &d) in delta.iter().enumerate() {
                    acc += d * layer.weights[row * layer.in_dim + i];
                }
                *pd = acc;
            }
        }
    }

    fn forward_linear_into(&self, input: &[f64], scratch: &mut Scratch) {
        let n_layers = self.layers.len();
        for l in 0..n_layers {
            let (done, rest) = scratch.acts.split_at_mut(l);
            let src: &[f64] = if l == 0 { input } else { &done[l - 1] };
            let out = &mut rest[0];
            affine(&self.layers[l], src, out);
            if l + 1 < n_layers {
                out.iter_mut().for_each(|z| {
                    if *z < 0.0 {
                        *z = 0.0
                    }
                });
            }
        }
    }

    /// Raw scalar output of a regressor (no softmax).
    pub fn predict_scalar(&self, input: &[f64]) -> f64 {
        let mut scratch = Scratch::new(self);
        self.forward_linear_into(input, &mut scratch);
        scratch.acts.last().unwrap()[0]
    }

    /// Plain descent step; the tests use it to push a net into saturation
    /// without Adam's step-size normalization.
    #[cfg_attr(not(test), allow(dead_code))]
    fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, g) in layer.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
    }
}

/// Adam moment accumulators, laid out like the parameter arrays.
struct AdamState {
    m: Vec<(Vec<f64>, Vec<f64>)>,
    v: Vec<(Vec<f64>, Vec<f64>)>,
    t: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    fn new(net: &Mlp) -> Self {
        let zeros = |net: &Mlp| {
            net.layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect()
        };
        Self {
            m: zeros(net),
            v: zeros(net),
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Mlp, grads: &Gradients, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for (li, layer) in net.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[li];
            let (mw, mb) = &mut self.m[li];
            let (vw, vb) = &mut self.v[li];
            let update = |params: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..params.len() {
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                    let mhat = m[i] / bc1;
                    let vhat = v[i] / bc2;
                    params[i] -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
                }
            };
            update(&mut layer.weights, gw, mw, vw);
            update(&mut layer.biases, gb, mb, vb);
        }
    }
}

/// Analytic cross-entropy gradient for a single labeled sample.
pub fn gradient(net: &Mlp, input: &[f64], label: usize) -> Result<Gradients> {
    if input.len() != net.config.input_dim {
        return Err(Error::DimensionMismatch {
            expected: net.config.input_dim,
            got: input.len(),
        });
    }
    if label >= net.config.output_classes {
        return Err(Error::LabelOutOfRange {
            label,
            classes: net.config.output_classes,
        });
    }
    let mut scratch = Scratch::new(net);
    let mut grads = Gradients::zeros_like(net);
    net.accumulate_gradient(input, label, &mut scratch, &mut grads);
    Ok(grads)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub target_accuracy: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 200,
            learning_rate: 1e-2,
            batch_size: 32,
            target_accuracy: 1.0,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs < 1 || self.batch_size < 1 {
            return Err(Error::InvalidParameter(
                "max_epochs and batch_size must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning_rate must be positive".into()));
        }
        if !(self.target_accuracy > 0.0 && self.target_accuracy <= 1.0) {
            return Err(Error::InvalidParameter(
                "target_accuracy must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub epochs_used: usize,
    pub final_train_accuracy: f64,
    pub converged: bool,
}

fn check_samples(net: &Mlp, samples: &[(Vec<f64>, usize)]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(samples.len());
    for (input, label) in samples {
        if input.len() != net.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: net.config.input_dim,
                got: input.len(),
            });
        }
        if *label >= net.config.output_classes {
            return Err(Error::LabelOutOfRange {
                label: *label,
                classes: net.config.output_classes,
            });
        }
        let bits: Vec<u64> = input.iter().map(|x| x.to_bits()).collect();
        match seen.insert(bits, *label) {
            Some(prev) if prev != *label => {
                return Err(Error::ConflictingSamples { a: prev, b: *label })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Mini-batch Adam on cross-entropy, early-stopping once the training
/// accuracy reaches `cfg.target_accuracy`. Deterministic given
/// `cfg.rng_seed` (fixed shuffle sequence).
pub fn train(net: &mut Mlp, samples: &[(Vec<f64>, usize)], cfg: &TrainConfig) -> Result<TrainReport> {
    let report = train_inner(net, samples, cfg)?;
    count_epochs(&report);
    Ok(report)
}

fn train_inner(net: &mut Mlp, samples: &[(Vec<f64>, usize)], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    check_samples(net, samples)?;

    let mut rng = SplitMix64::new(cfg.rng_seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut scratch = Scratch::new(net);
    let mut grads = Gradients::zeros_like(net);
    let mut adam = AdamState::new(net);
    let mut epochs_used = 0;
    let mut final_acc = net.accuracy(samples);
    if final_acc >= cfg.target_accuracy {
        return Ok(TrainReport {
            epochs_used: 0,
            final_train_accuracy: final_acc,
            converged: true,
        });
    }

    for epoch in 1..=cfg.max_epochs {
        epochs_used = epoch;
        rng.shuffle(&mut order);
        let mut running_correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            for (gw, gb) in &mut grads.layers {
                gw.iter_mut().for_each(|g| *g = 0.0);
                gb.iter_mut().for_each(|g| *g = 0.0);
            }
            for &idx in batch {
                let (input, label) = &samples[idx];
                let predicted = net.accumulate_gradient(input, *label, &mut scratch, &mut grads);
                if predicted == *label {
                    running_correct += 1;
                }
            }
            grads.scale(1.0 / batch.len() as f64);
            adam.step(net, &grads, cfg.learning_rate);
        }
        // Only pay for an exact evaluation when the (pre-update) running
        // estimate says the target may have been reached.
        if running_correct as f64 / samples.len() as f64 >= cfg.target_accuracy {
            final_acc = net.accuracy(samples);
            if final_acc >= cfg.target_accuracy {
                return Ok(TrainReport {
                    epochs_used,
                    final_train_accuracy: final_acc,
                    converged: true,
                });
            }
        }
    }
    final_acc = net.accuracy(samples);
    Ok(TrainReport {
        epochs_used,
        final_train_accuracy: final_acc,
        converged: final_acc >= cfg.target_accuracy,
    })
}

// Count every epoch `train` runs, including early-stopped ones.
fn count_epochs(report: &TrainReport) {
    EPOCHS_TRAINED.fetch_add(report.epochs_used as u64, Ordering::Relaxed);
}

/// Trains and then rounds parameters to `f32` precision, continuing
/// training if rounding broke the accuracy target. A model returned as
/// converged keeps its accuracy after 32-bit persistence.
pub fn train_storable(
    net: &mut Mlp,
    samples: &[(Vec<f64>, usize)],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    let mut report = train(net, samples, cfg)?;
    for _ in 0..4 {
        net.quantize_to_f32();
        let acc = net.accuracy(samples);
        if acc >= cfg.target_accuracy || !report.converged {
            report.final_train_accuracy = acc;
            report.converged = acc >= cfg.target_accuracy;
            return Ok(report);
        }
        let more = train(net, samples, cfg)?;
        report.epochs_used += more.epochs_used;
        report.final_train_accuracy = more.final_train_accuracy;
        report.converged = more.converged;
    }
    net.quantize_to_f32();
    let acc = net.accuracy(samples);
    report.final_train_accuracy = acc;
    report.converged = acc >= cfg.target_accuracy;
    Ok(report)
}

/// Mini-batch Adam on mean squared error for a regressor built with
/// [`init_regressor`]. Runs the full epoch budget (regression has no exact
/// convergence target) and reports the final root mean squared error.
pub fn train_regression(
    net: &mut Mlp,
    samples: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
) -> Result<f64> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    for (input, _) in samples {
        if input.len() != net.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: net.config.input_dim,
                got: input.len(),
            });
        }
    }
    let mut rng = SplitMix64::new(cfg.rng_seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut scratch = Scratch::new(net);
    let mut grads = Gradients::zeros_like(net);
    let mut adam = AdamState::new(net);
    for _ in 0..cfg.max_epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            for (gw, gb) in &mut grads.layers {
                gw.iter_mut().for_each(|g| *g = 0.0);
                gb.iter_mut().for_each(|g| *g = 0.0);
            }
            for &idx in batch {
                let (input, target) = &samples[idx];
                net.forward_linear_into(input, &mut scratch);
                let pred = scratch.acts.last().unwrap()[0];
                scratch.deltas.last_mut().unwrap()[0] = pred - target;
                net.backward_from_deltas(input, &mut scratch, &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam.step(net, &grads, cfg.learning_rate);
        }
    }
    EPOCHS_TRAINED.fetch_add(cfg.max_epochs as u64, Ordering::Relaxed);
    let mse = samples
        .iter()
        .map(|(input, target)| {
            let e = net.predict_scalar(input) - target;
            e * e
        })
        .sum::<f64>()
        / samples.len() as f64;
    Ok(mse.sqrt())
}
