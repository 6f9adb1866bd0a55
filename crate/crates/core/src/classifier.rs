//! Feedforward classifier: ReLU hidden layers, logistic (2 classes) or
//! softmax output, cross-entropy loss, Adam, inverted dropout and early
//! stopping on validation loss.
//!
//! Defaults not fixed by the training protocol: He-normal initialization,
//! Adam beta1 = 0.9, beta2 = 0.999, eps = 1e-8, batch size 64, patience 10,
//! 200 epochs at most.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::{self, tag};

pub const LEARNING_RATES: [f64; 6] = [0.1, 0.001, 0.0001, 0.02, 0.002, 0.003];
pub const DROPOUT_RATES: [f64; 3] = [0.1, 0.2, 0.5];
pub const HIDDEN_LAYERS: [usize; 4] = [64, 128, 256, 512];

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// One sigmoid unit; class 1 when the score is >= 0.5.
    Logistic,
    Softmax,
}

impl OutputKind {
    pub fn tag(self) -> &'static str {
        match self {
            OutputKind::Logistic => "sigmoid",
            OutputKind::Softmax => "softmax",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            dropout: 0.2,
            batch_size: 64,
            patience: 10,
            max_epochs: 200,
            validation_fraction: 0.1,
            hidden: HIDDEN_LAYERS.to_vec(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must be in (0, 1)");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch_size and max_epochs must be >= 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be >= 1");
        }
        Ok(())
    }

    pub fn canonical(&self) -> String {
        format!(
            "learning_rate={};dropout={};batch_size={};patience={};max_epochs={};validation_fraction={};hidden={};seed={}",
            self.learning_rate,
            self.dropout,
            self.batch_size,
            self.patience,
            self.max_epochs,
            self.validation_fraction,
            self.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
            self.seed
        )
    }
}

/// Feature matrix with class indices into a sorted class-name list.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledData {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub classes: Vec<String>,
}

impl LabeledData {
    /// Classes are the sorted distinct labels.
    pub fn new(x: Array2<f64>, labels: &[String]) -> Result<Self> {
        let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        Self::with_classes(x, labels, classes)
    }

    pub fn with_classes(x: Array2<f64>, labels: &[String], classes: Vec<String>) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(Error::LengthMismatch { predictions: x.nrows(), labels: labels.len() });
        }
        let y = labels
            .iter()
            .map(|l| {
                classes
                    .binary_search(l)
                    .map_err(|_| Error::Config(format!("label {l:?} not among the model classes")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledData { x, y, classes })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn subset(&self, idx: &[usize]) -> (Array2<f64>, Vec<usize>) {
        (self.x.select(Axis(0), idx), idx.iter().map(|&i| self.y[i]).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    /// `fan_in x fan_out`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub output: OutputKind,
    pub classes: Vec<String>,
    pub config: TrainConfig,
}

struct Grads {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Logistic decision rule; a score of exactly 0.5 is the positive class.
pub fn logistic_decision(score: f64) -> usize {
    usize::from(score >= 0.5)
}

impl MlpModel {
    /// He-normal weights, zero biases.
    pub fn init(input_dim: usize, classes: Vec<String>, config: TrainConfig) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::SingleClass(classes.first().cloned().unwrap_or_default()));
        }
        let output = if classes.len() == 2 { OutputKind::Logistic } else { OutputKind::Softmax };
        let out_units = if output == OutputKind::Logistic { 1 } else { classes.len() };
        let mut sizes = vec![input_dim];
        sizes.extend(&config.hidden);
        sizes.push(out_units);
        let mut rng = seed::rng(config.seed, &[tag::INIT]);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let std = (2.0 / w[0] as f64).sqrt();
                let weights = Array2::from_shape_simple_fn((w[0], w[1]), || {
                    let z: f64 = rng.sample(StandardNormal);
                    z * std
                });
                Dense { weights, bias: Array1::zeros(w[1]) }
            })
            .collect();
        Ok(MlpModel { layers, output, classes, config })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut v = vec![self.input_dim()];
        v.extend(self.layers.iter().map(|l| l.weights.ncols()));
        v
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weights.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
        }
        out
    }

    /// Forward pass returning the activations of every layer (input first)
    /// and the output logits. `masks` holds one inverted-dropout mask per
    /// hidden layer.
    fn forward(&self, x: ArrayView2<f64>, masks: Option<&[Array2<f64>]>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(x.to_owned());
        for (i, layer) in self.layers[..last].iter().enumerate() {
            let mut a = acts[i].dot(&layer.weights) + &layer.bias;
            a.mapv_inplace(relu);
            if let Some(m) = masks {
                a *= &m[i];
            }
            acts.push(a);
        }
        let out = &self.layers[last];
        let logits = acts[last].dot(&out.weights) + &out.bias;
        (acts, logits)
    }

    fn probabilities(&self, logits: &Array2<f64>) -> Array2<f64> {
        match self.output {
            OutputKind::Logistic => logits.mapv(sigmoid),
            OutputKind::Softmax => {
                let mut p = logits.clone();
                for mut row in p.rows_mut() {
                    let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    row.mapv_inplace(|z| (z - max).exp());
                    let sum = row.sum();
                    row /= sum;
                }
                p
            }
        }
    }

    /// Mean cross-entropy of logits against class indices.
    fn loss_from_logits(&self, logits: &Array2<f64>, y: &[usize]) -> f64 {
        let n = y.len() as f64;
        let total: f64 = match self.output {
            OutputKind::Logistic => logits
                .column(0)
                .iter()
                .zip(y)
                .map(|(&z, &t)| z.max(0.0) - z * t as f64 + (-z.abs()).exp().ln_1p())
                .sum(),
            OutputKind::Softmax => logits
                .rows()
                .into_iter()
                .zip(y)
                .map(|(row, &t)| {
                    let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
                    lse - row[t]
                })
                .sum(),
        };
        total / n
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: &[usize]) -> f64 {
        let (_, logits) = self.forward(x, None);
        self.loss_from_logits(&logits, y)
    }

    fn backward(&self, x: ArrayView2<f64>, y: &[usize], masks: Option<&[Array2<f64>]>) -> (f64, Grads) {
        let (acts, logits) = self.forward(x, masks);
        let loss = self.loss_from_logits(&logits, y);
        let n = y.len() as f64;
        let mut delta = self.probabilities(&logits);
        match self.output {
            OutputKind::Logistic => {
                for (d, &t) in delta.column_mut(0).iter_mut().zip(y) {
                    *d -= t as f64;
                }
            }
            OutputKind::Softmax => {
                for (mut row, &t) in delta.rows_mut().into_iter().zip(y) {
                    row[t] -= 1.0;
                }
            }
        }
        delta /= n;
        let mut gw = Vec::with_capacity(self.layers.len());
        let mut gb = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            gw.push(acts[l].t().dot(&delta).as_standard_layout().into_owned());
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].weights.t());
                // acts[l] already carries the dropout scaling; its zero
                // pattern covers both the ReLU and the dropped units.
                if let Some(m) = masks {
                    back *= &m[l - 1];
                }
                back.zip_mut_with(&acts[l], |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
        }
        gw.reverse();
        gb.reverse();
        (loss, Grads { w: gw, b: gb })
    }

    /// Class probabilities, one row per sample. Logistic models report
    /// `[1 - p, p]`.
    pub fn scores(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.ncols() });
        }
        let (_, logits) = self.forward(x, None);
        let p = self.probabilities(&logits);
        Ok(match self.output {
            OutputKind::Logistic => {
                let mut two = Array2::zeros((p.nrows(), 2));
                for (i, &q) in p.column(0).iter().enumerate() {
                    two[[i, 0]] = 1.0 - q;
                    two[[i, 1]] = q;
                }
                two
            }
            OutputKind::Softmax => p,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub classes: Vec<usize>,
    pub scores: Array2<f64>,
}

impl Prediction {
    pub fn labels<'a>(&self, model: &'a MlpModel) -> Vec<&'a str> {
        self.classes.iter().map(|&c| model.classes[c].as_str()).collect()
    }
}

/// Inference with dropout disabled.
pub fn predict(model: &MlpModel, x: ArrayView2<f64>) -> Result<Prediction> {
    let scores = model.scores(x)?;
    let classes = scores
        .rows()
        .into_iter()
        .map(|row| match model.output {
            OutputKind::Logistic => logistic_decision(row[1]),
            OutputKind::Softmax => argmax(row.as_slice().expect("contiguous")),
        })
        .collect();
    Ok(Prediction { classes, scores })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
    pub train_size: usize,
    pub validation_size: usize,
}

impl TrainLog {
    pub fn best(&self) -> Option<&EpochLog> {
        self.epochs.get(self.best_epoch.wrapping_sub(1))
    }
}

/// Stratified split: per class, a seeded shuffle puts `round(frac * count)`
/// samples (at most `count - 1`) into validation. Returns (train, validation)
/// indices, each in increasing order.
pub fn stratified_split(y: &[usize], frac: f64, seed_value: u64) -> (Vec<usize>, Vec<usize>) {
    let classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = seed::rng(seed_value, &[tag::VALIDATION]);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        idx.shuffle(&mut rng);
        let k = ((frac * idx.len() as f64).round() as usize).min(idx.len().saturating_sub(1));
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn accuracy(model: &MlpModel, x: ArrayView2<f64>, y: &[usize]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let pred = predict(model, x).expect("dimension checked");
    pred.classes.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &mut MlpModel) -> Self {
        let shapes: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Grads, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t);
        let grad_slices: Vec<&[f64]> = grads
            .w
            .iter()
            .zip(&grads.b)
            .flat_map(|(w, b)| [w.as_slice().expect("contiguous"), b.as_slice().expect("contiguous")])
            .collect();
        for (k, params) in model.param_slices_mut().into_iter().enumerate() {
            let (m, v, g) = (&mut self.m[k], &mut self.v[k], grad_slices[k]);
            for i in 0..params.len() {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                let mh = m[i] / bc1;
                let vh = v[i] / bc2;
                params[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
            }
        }
    }
}

fn dropout_masks<R: Rng>(model: &MlpModel, rows: usize, p: f64, rng: &mut R) -> Vec<Array2<f64>> {
    let keep = 1.0 - p;
    let scale = 1.0 / keep;
    model.layers[..model.layers.len() - 1]
        .iter()
        .map(|l| Array2::from_shape_simple_fn((rows, l.weights.ncols()), || if rng.random::<f64>() < keep { scale } else { 0.0 }))
        .collect()
}

/// Trains with early stopping and returns the best-validation-loss model.
pub fn train_classifier(data: &LabeledData, cfg: &TrainConfig) -> Result<(MlpModel, TrainLog)> {
    cfg.validate()?;
    let present: BTreeSet<usize> = data.y.iter().copied().collect();
    if present.len() < 2 {
        let name = present.iter().next().map(|&c| data.classes[c].clone()).unwrap_or_default();
        return Err(Error::SingleClass(name));
    }
    let (train_idx, val_idx) = stratified_split(&data.y, cfg.validation_fraction, cfg.seed);
    let (xt, yt) = data.subset(&train_idx);
    let (xv, yv) = data.subset(&val_idx);
    // Tiny inputs can leave no validation sample; monitor training loss then.
    let (mon_x, mon_y) = if yv.is_empty() { (&xt, &yt) } else { (&xv, &yv) };

    let mut model = MlpModel::init(data.x.ncols(), data.classes.clone(), cfg.clone())?;
    let mut adam = Adam::new(&mut model);
    let mut best = model.clone();
    let mut log = TrainLog {
        best_val_loss: f64::INFINITY,
        train_size: yt.len(),
        validation_size: yv.len(),
        ..Default::default()
    };
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..yt.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        let mut shuffle_rng = seed::rng(cfg.seed, &[tag::SHUFFLE, epoch as u64]);
        let mut dropout_rng = seed::rng(cfg.seed, &[tag::DROPOUT, epoch as u64]);
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let bx = xt.select(Axis(0), batch);
            let by: Vec<usize> = batch.iter().map(|&i| yt[i]).collect();
            let masks = (cfg.dropout > 0.0).then(|| dropout_masks(&model, batch.len(), cfg.dropout, &mut dropout_rng));
            let (loss, grads) = model.backward(bx.view(), &by, masks.as_deref());
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    detail: format!("batch loss {loss}; learning_rate={} may be too high", cfg.learning_rate),
                });
            }
            loss_sum += loss * batch.len() as f64;
            adam.step(&mut model, &grads, cfg.learning_rate);
        }
        let val_loss = model.loss(mon_x.view(), mon_y);
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, detail: format!("validation loss {val_loss}") });
        }
        log.epochs.push(EpochLog {
            epoch,
            train_loss: loss_sum / yt.len() as f64,
            val_loss,
            val_accuracy: accuracy(&model, mon_x.view(), mon_y),
        });
        if val_loss < log.best_val_loss {
            log.best_val_loss = val_loss;
            log.best_epoch = epoch;
            best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                log.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, log))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub learning_rate: f64,
    pub dropout: f64,
    pub validation_micro_f1: f64,
    pub best_epoch: usize,
}

/// Trains one model per (learning rate, dropout) pair and keeps the one with
/// the highest validation Micro-F1 (first in grid order on ties).
pub fn train_with_grid(
    data: &LabeledData,
    base: &TrainConfig,
    learning_rates: &[f64],
    dropouts: &[f64],
) -> Result<(MlpModel, TrainLog, Vec<GridResult>)> {
    let (_, val_idx) = stratified_split(&data.y, base.validation_fraction, base.seed);
    let (xv, yv) = data.subset(&val_idx);
    let mut results = Vec::new();
    let mut best: Option<(f64, MlpModel, TrainLog)> = None;
    for &lr in learning_rates {
        for &p in dropouts {
            let cfg = TrainConfig { learning_rate: lr, dropout: p, ..base.clone() };
            let (model, log) = train_classifier(data, &cfg)?;
            let f1 = if yv.is_empty() { 0.0 } else { accuracy(&model, xv.view(), &yv) };
            results.push(GridResult { learning_rate: lr, dropout: p, validation_micro_f1: f1, best_epoch: log.best_epoch });
            if best.as_ref().is_none_or(|b| f1 > b.0) {
                best = Some((f1, model, log));
            }
        }
    }
    let (_, model, log) = best.ok_or_else(|| Error::Config("empty hyperparameter grid".into()))?;
    Ok((model, log, results))
}

/// Largest relative error between backpropagated gradients and central
/// differences (step 1e-5) over `samples` parameters chosen with `seed`.
/// Relative error is `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps
/// near-zero gradients from amplifying rounding noise. Dropout is off.
pub fn gradient_check(model: &MlpModel, x: ArrayView2<f64>, y: &[usize], samples: usize, seed_value: u64) -> f64 {
    const STEP: f64 = 1e-5;
    let (_, grads) = model.backward(x, y, None);
    let flat_grads: Vec<&[f64]> = grads
        .w
        .iter()
        .zip(&grads.b)
        .flat_map(|(w, b)| [w.as_slice().expect("contiguous"), b.as_slice().expect("contiguous")])
        .collect();
    let sizes: Vec<usize> = flat_grads.iter().map(|g| g.len()).collect();
    let total: usize = sizes.iter().sum();
    let mut rng = seed::rng(seed_value, &[]);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut flat = rng.random_range(0..total);
        let mut slot = 0;
        while flat >= sizes[slot] {
            flat -= sizes[slot];
            slot += 1;
        }
        let analytic = flat_grads[slot][flat];
        let orig = probe.param_slices_mut()[slot][flat];
        probe.param_slices_mut()[slot][flat] = orig + STEP;
        let plus = probe.loss(x, y);
        probe.param_slices_mut()[slot][flat] = orig - STEP;
        let minus = probe.loss(x, y);
        probe.param_slices_mut()[slot][flat] = orig;
        let numeric = (plus - minus) / (2.0 * STEP);
        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n: usize, seed_value: u64) -> LabeledData {
        let mut rng = seed::rng(seed_value, &[]);
        let mut x = Array2::zeros((n, 2));
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let center = if c == 0 { -3.0 } else { 3.0 };
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            x[[i, 0]] = center + 0.5 * a;
            x[[i, 1]] = center + 0.5 * b;
            labels.push(c.to_string());
        }
        LabeledData::new(x, &labels).unwrap()
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig { hidden: vec![8, 8], ..Default::default() }
    }

    #[test]
    fn tie_rules() {
        assert_eq!(argmax(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
        assert_eq!(logistic_decision(0.5), 1);
        assert_eq!(logistic_decision(0.4999), 0);
    }

    #[test]
    fn single_class_rejected() {
        let d = LabeledData::new(Array2::zeros((4, 2)), &vec!["a".to_string(); 4]).unwrap();
        assert!(matches!(train_classifier(&d, &small_cfg()), Err(Error::SingleClass(_))));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let d = blobs(20, 1);
        let m = MlpModel::init(2, d.classes.clone(), small_cfg()).unwrap();
        assert!(matches!(predict(&m, Array2::zeros((3, 5)).view()), Err(Error::DimensionMismatch { expected: 2, got: 5 })));
    }

    #[test]
    fn stratified_split_is_balanced() {
        let y: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let (t, v) = stratified_split(&y, 0.1, 3);
        assert_eq!(v.len(), 10);
        assert_eq!(t.len(), 90);
        assert_eq!(v.iter().filter(|&&i| y[i] == 0).count(), 5);
    }

    #[test]
    fn layer_shapes_chain() {
        let m = MlpModel::init(256, vec!["a".into(), "b".into(), "c".into()], TrainConfig::default()).unwrap();
        assert_eq!(m.layer_sizes(), vec![256, 64, 128, 256, 512, 3]);
        assert_eq!(m.output, OutputKind::Softmax);
        let b = MlpModel::init(16, vec!["a".into(), "b".into()], TrainConfig::default()).unwrap();
        assert_eq!(*b.layer_sizes().last().unwrap(), 1);
    }

    #[test]
    fn separable_blobs_are_learned() {
        let d = blobs(200, 7);
        let (m, log) = train_classifier(&d, &small_cfg()).unwrap();
        assert!(log.best_val_loss <= log.epochs[0].val_loss);
        let acc = accuracy(&m, d.x.view(), &d.y);
        assert!(acc >= 0.99, "accuracy {acc}");
    }
}
