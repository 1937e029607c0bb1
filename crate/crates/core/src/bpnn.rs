//! Three-layer sigmoid network trained by per-sample backpropagation of the
//! squared error `e = 1/2 * sum (d_i - y_i)^2`.
//!
//! Layer sums are `w . x + b` and the activation is the logistic function
//! `1 / (1 + exp(-t))`, so `dy/dt = y (1 - y)` and the update rules are
//!
//! ```text
//! output: w_ji <- w_ji - eta * h_j  * y_i (1 - y_i) (y_i - d_i)
//! hidden: w_kj <- w_kj - eta * x_k  * h_j (1 - h_j) * sum_i w_ji y_i (1 - y_i) (y_i - d_i)
//! ```
//!
//! Biases are weights on a constant input of 1 and follow the same rules.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{dot, Matrix};

pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const DEFAULT_MAX_EPOCHS: usize = 10_000;
pub const DEFAULT_LOSS_TOLERANCE: f64 = 1e-6;
pub const INIT_RANGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_input: usize,
    pub n_hidden: usize,
    pub n_output: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Training stops once the epoch-over-epoch loss change drops below this.
    pub loss_tolerance: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_input: 5,
            n_hidden: 10,
            n_output: 1,
            learning_rate: DEFAULT_LEARNING_RATE,
            max_epochs: DEFAULT_MAX_EPOCHS,
            loss_tolerance: DEFAULT_LOSS_TOLERANCE,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_input == 0 || self.n_hidden == 0 || self.n_output == 0 {
            return Err(Error::InvalidConfig("layer sizes must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if !(self.loss_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("loss_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Weights and biases of an input-hidden-output network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// `n_hidden x n_input`
    pub hidden_weights: Matrix,
    pub hidden_biases: Vec<f64>,
    /// `n_output x n_hidden`
    pub output_weights: Matrix,
    pub output_biases: Vec<f64>,
}

impl Network {
    pub fn zeros(n_input: usize, n_hidden: usize, n_output: usize) -> Self {
        Self {
            hidden_weights: Matrix::zeros(n_hidden, n_input),
            hidden_biases: vec![0.0; n_hidden],
            output_weights: Matrix::zeros(n_output, n_hidden),
            output_biases: vec![0.0; n_output],
        }
    }

    /// Every parameter drawn uniformly from `[-0.5, 0.5]` in
    /// [`Network::parameters`] order.
    pub fn random(config: &NetworkConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut net = Self::zeros(config.n_input, config.n_hidden, config.n_output);
        let params: Vec<f64> = (0..net.n_parameters())
            .map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE))
            .collect();
        net.set_parameters(&params).expect("parameter count matches topology");
        net
    }

    pub fn n_input(&self) -> usize {
        self.hidden_weights.cols()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_weights.rows()
    }

    pub fn n_output(&self) -> usize {
        self.output_weights.rows()
    }

    pub fn topology(&self) -> (usize, usize, usize) {
        (self.n_input(), self.n_hidden(), self.n_output())
    }

    pub fn n_parameters(&self) -> usize {
        let (i, h, o) = self.topology();
        h * i + h + o * h + o
    }

    /// Flattened parameters: hidden weights (row-major), hidden biases,
    /// output weights (row-major), output biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_parameters());
        p.extend_from_slice(self.hidden_weights.as_slice());
        p.extend_from_slice(&self.hidden_biases);
        p.extend_from_slice(self.output_weights.as_slice());
        p.extend_from_slice(&self.output_biases);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(Error::LengthMismatch { left: self.n_parameters(), right: params.len() });
        }
        let (i, h, o) = self.topology();
        let (hw, rest) = params.split_at(h * i);
        let (hb, rest) = rest.split_at(h);
        let (ow, ob) = rest.split_at(o * h);
        self.hidden_weights = Matrix::from_vec(h, i, hw.to_vec())?;
        self.hidden_biases = hb.to_vec();
        self.output_weights = Matrix::from_vec(o, h, ow.to_vec())?;
        self.output_biases = ob.to_vec();
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(|v| v.is_finite())
    }

    fn check_consistent(&self) -> Result<()> {
        let (_, h, o) = self.topology();
        if self.hidden_biases.len() != h
            || self.output_weights.cols() != h
            || self.output_biases.len() != o
        {
            return Err(Error::DimensionMismatch("inconsistent network layer shapes".into()));
        }
        Ok(())
    }
}

/// Activations from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

pub fn forward(net: &Network, x: &[f64]) -> Result<Activations> {
    net.check_consistent()?;
    if x.len() != net.n_input() {
        return Err(Error::DimensionMismatch(format!(
            "input has {} features, network expects {}",
            x.len(),
            net.n_input()
        )));
    }
    if let Some(col) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, column: col });
    }
    Ok(forward_unchecked(net, x))
}

fn forward_unchecked(net: &Network, x: &[f64]) -> Activations {
    let hidden: Vec<f64> = (0..net.n_hidden())
        .map(|j| sigmoid(dot(net.hidden_weights.row(j), x) + net.hidden_biases[j]))
        .collect();
    let output = (0..net.n_output())
        .map(|i| sigmoid(dot(net.output_weights.row(i), &hidden) + net.output_biases[i]))
        .collect();
    Activations { hidden, output }
}

/// Squared-error loss `1/2 * sum (d_i - y_i)^2`.
pub fn loss(desired: &[f64], actual: &[f64]) -> Result<f64> {
    if desired.len() != actual.len() {
        return Err(Error::LengthMismatch { left: desired.len(), right: actual.len() });
    }
    Ok(0.5 * desired.iter().zip(actual).map(|(d, y)| (d - y) * (d - y)).sum::<f64>())
}

/// Analytic gradient of the sample loss, laid out like a [`Network`].
pub fn gradients(net: &Network, x: &[f64], d: &[f64]) -> Result<Network> {
    let act = forward(net, x)?;
    if d.len() != net.n_output() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} values, network emits {}",
            d.len(),
            net.n_output()
        )));
    }
    Ok(gradients_from(net, x, d, &act))
}

fn gradients_from(net: &Network, x: &[f64], d: &[f64], act: &Activations) -> Network {
    let (n_in, n_hid, n_out) = net.topology();
    let mut g = Network::zeros(n_in, n_hid, n_out);

    // y_i (1 - y_i) (y_i - d_i)
    let out_delta: Vec<f64> =
        act.output.iter().zip(d).map(|(y, d)| y * (1.0 - y) * (y - d)).collect();
    for i in 0..n_out {
        for j in 0..n_hid {
            g.output_weights[(i, j)] = act.hidden[j] * out_delta[i];
        }
        g.output_biases[i] = out_delta[i];
    }

    for j in 0..n_hid {
        let back: f64 = (0..n_out).map(|i| net.output_weights[(i, j)] * out_delta[i]).sum();
        let h = act.hidden[j];
        let hid_delta = h * (1.0 - h) * back;
        for k in 0..n_in {
            g.hidden_weights[(j, k)] = x[k] * hid_delta;
        }
        g.hidden_biases[j] = hid_delta;
    }
    g
}

fn apply_step(net: &mut Network, grad: &Network, eta: f64) {
    let axpy = |dst: &mut [f64], src: &[f64]| {
        for (w, g) in dst.iter_mut().zip(src) {
            *w -= eta * g;
        }
    };
    let (_, n_hid, n_out) = net.topology();
    for j in 0..n_hid {
        axpy(net.hidden_weights.row_mut(j), grad.hidden_weights.row(j));
    }
    axpy(&mut net.hidden_biases, &grad.hidden_biases);
    for i in 0..n_out {
        axpy(net.output_weights.row_mut(i), grad.output_weights.row(i));
    }
    axpy(&mut net.output_biases, &grad.output_biases);
}

/// One gradient-descent update on a single sample. All deltas are taken at
/// the incoming weights before anything is written.
pub fn backprop_step(net: &Network, x: &[f64], d: &[f64], eta: f64) -> Result<Network> {
    let grad = gradients(net, x, d)?;
    let mut next = net.clone();
    apply_step(&mut next, &grad, eta);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean per-sample loss over the dataset, evaluated after each epoch.
    pub loss_history: Vec<f64>,
    pub stop_reason: StopReason,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.loss_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Mean of the per-sample loss over a dataset.
pub fn dataset_loss(net: &Network, inputs: &Matrix, labels: &Matrix) -> Result<f64> {
    if inputs.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for s in 0..inputs.rows() {
        let act = forward(net, inputs.row(s))?;
        total += loss(labels.row(s), &act.output)?;
    }
    Ok(total / inputs.rows() as f64)
}

/// Online gradient descent from a seeded random start.
///
/// Samples are visited in dataset order every epoch. Training ends when the
/// change in epoch loss falls below `loss_tolerance` or after `max_epochs`.
pub fn train(config: &NetworkConfig, inputs: &Matrix, labels: &Matrix) -> Result<(Network, TrainReport)> {
    train_from(config, Network::random(config), inputs, labels)
}

/// Same as [`train`] but starting from the given weights.
pub fn train_from(
    config: &NetworkConfig,
    mut net: Network,
    inputs: &Matrix,
    labels: &Matrix,
) -> Result<(Network, TrainReport)> {
    config.validate()?;
    if inputs.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if labels.rows() != inputs.rows() {
        return Err(Error::LengthMismatch { left: inputs.rows(), right: labels.rows() });
    }
    if inputs.cols() != config.n_input || labels.cols() != config.n_output {
        return Err(Error::DimensionMismatch(format!(
            "data is {} -> {}, network is {} -> {}",
            inputs.cols(),
            labels.cols(),
            config.n_input,
            config.n_output
        )));
    }
    if net.topology() != (config.n_input, config.n_hidden, config.n_output) {
        return Err(Error::DimensionMismatch("initial network topology differs from config".into()));
    }
    if !inputs.is_finite() {
        return Err(Error::NonFinite { row: 0, column: 0 });
    }
    for s in 0..labels.rows() {
        for &v in labels.row(s) {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::LabelOutOfRange { sample: s, value: v });
            }
        }
    }

    let mut history = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    for _ in 0..config.max_epochs {
        for s in 0..inputs.rows() {
            let (x, d) = (inputs.row(s), labels.row(s));
            let act = forward_unchecked(&net, x);
            let grad = gradients_from(&net, x, d, &act);
            apply_step(&mut net, &grad, config.learning_rate);
        }
        let epoch_loss = dataset_loss(&net, inputs, labels)?;
        let converged = history
            .last()
            .is_some_and(|prev| (epoch_loss - prev).abs() < config.loss_tolerance);
        history.push(epoch_loss);
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok((net, TrainReport { epochs_run: history.len(), loss_history: history, stop_reason: stop }))
}

/// Outcome of comparing analytic and central-difference gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// `max |a - n| / max(|a|, |n|, RELATIVE_FLOOR)` over all parameters.
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub n_parameters: usize,
}

/// Denominator floor for the relative error; gradients smaller than this are
/// effectively compared in absolute terms.
pub const RELATIVE_FLOOR: f64 = 1e-4;

/// Central-difference check of [`gradients`] for every weight and bias.
pub fn gradient_check(net: &Network, x: &[f64], d: &[f64], eps: f64) -> Result<GradientCheck> {
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(Error::InvalidConfig(format!("epsilon {eps} not in (0, 1e-3]")));
    }
    let analytic = gradients(net, x, d)?.parameters();
    let base = net.parameters();
    let mut probe = net.clone();
    let sample_loss = |n: &Network| loss(d, &forward_unchecked(n, x).output).expect("lengths checked");

    let mut max_rel = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut params = base.clone();
    for (idx, a) in analytic.iter().enumerate() {
        params[idx] = base[idx] + eps;
        probe.set_parameters(&params)?;
        let up = sample_loss(&probe);
        params[idx] = base[idx] - eps;
        probe.set_parameters(&params)?;
        let down = sample_loss(&probe);
        params[idx] = base[idx];

        let numeric = (up - down) / (2.0 * eps);
        let abs = (a - numeric).abs();
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(abs / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR));
    }
    Ok(GradientCheck {
        max_relative_error: max_rel,
        max_absolute_error: max_abs,
        n_parameters: analytic.len(),
    })
}

/// Serializes a network as the plain-text model format:
///
/// ```text
/// topology <n_in> <n_hidden> <n_out>
/// seed <seed>
/// <one parameter per line, Network::parameters order, 17 significant digits>
/// ```
pub fn write_model(net: &Network, seed: u64) -> String {
    let (i, h, o) = net.topology();
    let mut s = format!("topology {i} {h} {o}\nseed {seed}\n");
    for p in net.parameters() {
        writeln!(s, "{p:.16e}").expect("writing to a String");
    }
    s
}

/// Parses [`write_model`] output back into a network and its seed.
pub fn read_model(text: &str) -> Result<(Network, u64)> {
    let bad = |line: usize, reason: &str| Error::ModelFormat { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (n, topo) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut parts = topo.split_whitespace();
    if parts.next() != Some("topology") {
        return Err(bad(n, "expected `topology n_in n_hidden n_out`"));
    }
    let dims: Vec<usize> = parts
        .map(|p| p.parse().map_err(|_| bad(n, "layer size is not an integer")))
        .collect::<Result<_>>()?;
    let [n_in, n_hid, n_out] = dims[..] else {
        return Err(bad(n, "expected three layer sizes"));
    };
    if n_in == 0 || n_hid == 0 || n_out == 0 {
        return Err(bad(n, "layer sizes must be >= 1"));
    }

    let (n, seed_line) = lines.next().ok_or_else(|| bad(2, "missing seed line"))?;
    let seed = seed_line
        .strip_prefix("seed")
        .and_then(|s| s.trim().parse::<u64>().ok())
        .ok_or_else(|| bad(n, "expected `seed <int>`"))?;

    let mut net = Network::zeros(n_in, n_hid, n_out);
    let mut params = Vec::with_capacity(net.n_parameters());
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let v: f64 = l.parse().map_err(|_| bad(n, "parameter is not a number"))?;
        if !v.is_finite() {
            return Err(bad(n, "parameter is not finite"));
        }
        params.push(v);
    }
    if params.len() != net.n_parameters() {
        return Err(bad(
            3 + params.len(),
            &format!("expected {} parameters, found {}", net.n_parameters(), params.len()),
        ));
    }
    net.set_parameters(&params)?;
    Ok((net, seed))
}
