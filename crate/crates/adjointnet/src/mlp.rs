//! Dense feed-forward network that produces the physical parameter vector.
//!
//! Hidden layers use tanh, the output layer is linear, and a configurable
//! output transform maps raw outputs to physical units. Reverse-mode
//! Jacobians of the transformed outputs with respect to every weight and
//! bias are exact; optimization is plain full-batch Adam.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};

use crate::error::{AdjointNetError, Result};

const LN10: f64 = std::f64::consts::LN_10;

/// Maps raw network outputs to physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputTransform {
    /// `p = 10^(scale * raw + offset)`; strictly positive, spans decades.
    Exp10Scaled { scale: f64, offset: f64 },
    /// `p = scale * raw + offset`.
    Affine { scale: f64, offset: f64 },
}

impl OutputTransform {
    pub fn apply(&self, raw: f64) -> f64 {
        match *self {
            OutputTransform::Exp10Scaled { scale, offset } => 10f64.powf(scale * raw + offset),
            OutputTransform::Affine { scale, offset } => scale * raw + offset,
        }
    }

    /// d p / d raw at the given raw output.
    pub fn derivative(&self, raw: f64) -> f64 {
        match *self {
            OutputTransform::Exp10Scaled { scale, .. } => self.apply(raw) * LN10 * scale,
            OutputTransform::Affine { scale, .. } => scale,
        }
    }
}

/// Fully-connected network: `layer_sizes = [input, hidden..., output]`,
/// weights `w[k]` of shape `(layer_sizes[k+1], layer_sizes[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub transform: OutputTransform,
    pub init_seed: u64,
}

impl ParamModel {
    /// Glorot-uniform initialization: entries of `w[k]` drawn from
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero. Deterministic per seed.
    pub fn init(layer_sizes: &[usize], transform: OutputTransform, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(AdjointNetError::invalid(
                "layer_sizes needs input and output entries",
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(AdjointNetError::invalid("layer sizes must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for k in 0..layer_sizes.len() - 1 {
            let (fan_in, fan_out) = (layer_sizes[k], layer_sizes[k + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                (rng.gen::<f64>() * 2.0 - 1.0) * bound
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Ok(ParamModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            transform,
            init_seed: seed,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.layer_sizes[0] {
            return Err(AdjointNetError::invalid(format!(
                "input length {} does not match input layer size {}",
                input.len(),
                self.layer_sizes[0]
            )));
        }
        Ok(())
    }

    /// Activations of every layer; `acts[0]` is the input, the last entry is
    /// the raw (pre-transform) output.
    fn forward_pass(&self, input: &[f64]) -> Vec<Array1<f64>> {
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        acts.push(Array1::from_vec(input.to_vec()));
        for k in 0..self.n_layers() {
            let z = self.weights[k].dot(acts.last().unwrap()) + &self.biases[k];
            if k + 1 < self.n_layers() {
                acts.push(z.mapv(f64::tanh));
            } else {
                acts.push(z); // linear output layer
            }
        }
        acts
    }

    /// Raw network outputs before the physical transform.
    pub fn raw_forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.forward_pass(input).pop().unwrap().to_vec())
    }

    /// Physical parameters `p = transform(raw)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .raw_forward(input)?
            .into_iter()
            .map(|r| self.transform.apply(r))
            .collect())
    }

    /// Exact reverse-mode Jacobian of every physical output w.r.t. every
    /// weight and bias, including the output transform's derivative.
    pub fn param_weight_jacobian(&self, input: &[f64]) -> Result<ModelJacobian> {
        self.check_input(input)?;
        let acts = self.forward_pass(input);
        let raw = acts.last().unwrap();
        let n_out = self.n_outputs();
        let n_layers = self.n_layers();

        let mut d_w = Vec::with_capacity(n_out);
        let mut d_b = Vec::with_capacity(n_out);
        for o in 0..n_out {
            // seed the backward pass with d p_o / d raw
            let mut delta = Array1::zeros(n_out);
            delta[o] = self.transform.derivative(raw[o]);

            let mut grads_w = vec![Array2::zeros((0, 0)); n_layers];
            let mut grads_b = vec![Array1::zeros(0); n_layers];
            for k in (0..n_layers).rev() {
                // outer product delta ⊗ activation of the previous layer
                let a_prev = &acts[k];
                let mut gw = Array2::zeros((delta.len(), a_prev.len()));
                for (r, d) in delta.iter().enumerate() {
                    for (c, a) in a_prev.iter().enumerate() {
                        gw[(r, c)] = d * a;
                    }
                }
                grads_w[k] = gw;
                grads_b[k] = delta.clone();
                if k > 0 {
                    // tanh'(z) = 1 - tanh(z)^2, and acts[k] already is tanh(z)
                    let back = self.weights[k].t().dot(&delta);
                    delta = &back * &acts[k].mapv(|a| 1.0 - a * a);
                }
            }
            d_w.push(grads_w);
            d_b.push(grads_b);
        }
        Ok(ModelJacobian { d_w, d_b })
    }
}

/// Per-output-component weight Jacobians: `d_w[o][k]` is
/// `d p_o / d w[k]`, mirroring the model's layer shapes.
#[derive(Debug, Clone)]
pub struct ModelJacobian {
    pub d_w: Vec<Vec<Array2<f64>>>,
    pub d_b: Vec<Vec<Array1<f64>>>,
}

/// Loss gradients with the model's layer shapes.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub d_w: Vec<Array2<f64>>,
    pub d_b: Vec<Array1<f64>>,
}

impl ModelGrads {
    pub fn zeros_like(model: &ParamModel) -> Self {
        ModelGrads {
            d_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            d_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for w in &self.d_w {
            s += w.iter().map(|v| v * v).sum::<f64>();
        }
        for b in &self.d_b {
            s += b.iter().map(|v| v * v).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.d_w.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.d_b.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Adam moments; one slot per weight matrix and bias vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
}

impl AdamState {
    pub fn new(model: &ParamModel) -> Self {
        AdamState {
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }
}

/// One bias-corrected Adam update in place. The state's step counter is
/// incremented; a NaN gradient aborts before touching the model.
pub fn apply_adam_step(
    model: &mut ParamModel,
    grads: &ModelGrads,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if grads.d_w.len() != model.weights.len() || grads.d_b.len() != model.biases.len() {
        return Err(AdjointNetError::invalid("gradient layer count mismatch"));
    }
    for (g, w) in grads.d_w.iter().zip(&model.weights) {
        if g.dim() != w.dim() {
            return Err(AdjointNetError::invalid("gradient shape mismatch"));
        }
    }
    if !grads.is_finite() {
        return Err(AdjointNetError::TrainingDiverged(
            "NaN/Inf gradient passed to Adam".into(),
        ));
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);

    for k in 0..model.weights.len() {
        let g = &grads.d_w[k];
        state.m_w[k].zip_mut_with(g, |m, &gv| *m = b1 * *m + (1.0 - b1) * gv);
        state.v_w[k].zip_mut_with(g, |v, &gv| *v = b2 * *v + (1.0 - b2) * gv * gv);
        let m = &state.m_w[k];
        let v = &state.v_w[k];
        for ((w, m), v) in model.weights[k].iter_mut().zip(m.iter()).zip(v.iter()) {
            *w -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
        }

        let gb = &grads.d_b[k];
        state.m_b[k].zip_mut_with(gb, |m, &gv| *m = b1 * *m + (1.0 - b1) * gv);
        state.v_b[k].zip_mut_with(gb, |v, &gv| *v = b2 * *v + (1.0 - b2) * gv * gv);
        let mb = &state.m_b[k];
        let vb = &state.v_b[k];
        for ((b, m), v) in model.biases[k].iter_mut().zip(mb.iter()).zip(vb.iter()) {
            *b -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
        }
    }
    Ok(())
}

fn transform_tag(t: &OutputTransform) -> (&'static str, f64, f64) {
    match *t {
        OutputTransform::Exp10Scaled { scale, offset } => ("exp10_scaled", scale, offset),
        OutputTransform::Affine { scale, offset } => ("affine", scale, offset),
    }
}

/// Writes a checkpoint that round-trips bit-exactly (shortest-round-trip
/// decimal formatting).
pub fn write_checkpoint<W: Write>(model: &ParamModel, w: &mut W) -> Result<()> {
    let sizes: Vec<String> = model.layer_sizes.iter().map(|s| s.to_string()).collect();
    writeln!(w, "layers {}", sizes.join(" "))?;
    let (tag, a, c) = transform_tag(&model.transform);
    writeln!(w, "transform {tag} {a} {c}")?;
    writeln!(w, "seed {}", model.init_seed)?;
    for k in 0..model.n_layers() {
        writeln!(w, "W{k}")?;
        for row in model.weights[k].rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", cells.join(" "))?;
        }
        writeln!(w, "b{k}")?;
        let cells: Vec<String> = model.biases[k].iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(" "))?;
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(r: &mut R) -> Result<ParamModel> {
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| AdjointNetError::ConfigError(format!("checkpoint truncated at {what}")))?
            .map_err(AdjointNetError::from)
    };

    let header = next("layers")?;
    let sizes: Vec<usize> = header
        .strip_prefix("layers ")
        .ok_or_else(|| AdjointNetError::ConfigError("missing layers header".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| AdjointNetError::ConfigError(format!("bad layer size: {e}")))?;

    let tline = next("transform")?;
    let toks: Vec<&str> = tline.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "transform" {
        return Err(AdjointNetError::ConfigError("bad transform line".into()));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|e| AdjointNetError::ConfigError(format!("bad float in checkpoint: {e}")))
    };
    let transform = match toks[1] {
        "exp10_scaled" => OutputTransform::Exp10Scaled {
            scale: parse(toks[2])?,
            offset: parse(toks[3])?,
        },
        "affine" => OutputTransform::Affine {
            scale: parse(toks[2])?,
            offset: parse(toks[3])?,
        },
        other => {
            return Err(AdjointNetError::ConfigError(format!(
                "unknown transform {other}"
            )))
        }
    };

    let sline = next("seed")?;
    let init_seed: u64 = sline
        .strip_prefix("seed ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| AdjointNetError::ConfigError("bad seed line".into()))?;

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for k in 0..sizes.len() - 1 {
        let (n_in, n_out) = (sizes[k], sizes[k + 1]);
        let marker = next("weight marker")?;
        if marker != format!("W{k}") {
            return Err(AdjointNetError::ConfigError(format!(
                "expected W{k}, found {marker}"
            )));
        }
        let mut w = Array2::zeros((n_out, n_in));
        for r_idx in 0..n_out {
            let row = next("weight row")?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(parse)
                .collect::<Result<_>>()?;
            if vals.len() != n_in {
                return Err(AdjointNetError::ConfigError(format!(
                    "row {r_idx} of W{k} has {} entries, expected {n_in}",
                    vals.len()
                )));
            }
            for (c, v) in vals.into_iter().enumerate() {
                w[(r_idx, c)] = v;
            }
        }
        weights.push(w);
        let marker = next("bias marker")?;
        if marker != format!("b{k}") {
            return Err(AdjointNetError::ConfigError(format!(
                "expected b{k}, found {marker}"
            )));
        }
        let brow = next("bias row")?;
        let vals: Vec<f64> = brow.split_whitespace().map(parse).collect::<Result<_>>()?;
        if vals.len() != n_out {
            return Err(AdjointNetError::ConfigError(format!(
                "b{k} has {} entries, expected {n_out}",
                vals.len()
            )));
        }
        biases.push(Array1::from_vec(vals));
    }

    Ok(ParamModel {
        layer_sizes: sizes,
        weights,
        biases,
        transform,
        init_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const AFFINE_ID: OutputTransform = OutputTransform::Affine {
        scale: 1.0,
        offset: 0.0,
    };

    /// Central finite difference of `f` w.r.t. weight `(layer, r, c)`.
    fn fd_weight<F: Fn(&ParamModel) -> f64>(
        model: &ParamModel,
        layer: usize,
        r: usize,
        c: usize,
        h: f64,
        f: F,
    ) -> f64 {
        let mut plus = model.clone();
        plus.weights[layer][(r, c)] += h;
        let mut minus = model.clone();
        minus.weights[layer][(r, c)] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    }

    fn fd_bias<F: Fn(&ParamModel) -> f64>(
        model: &ParamModel,
        layer: usize,
        r: usize,
        h: f64,
        f: F,
    ) -> f64 {
        let mut plus = model.clone();
        plus.biases[layer][r] += h;
        let mut minus = model.clone();
        minus.biases[layer][r] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn glorot_bound_holds_for_paper_architecture() {
        let m = ParamModel::init(
            &[1, 256, 256, 1],
            OutputTransform::Exp10Scaled {
                scale: 1.0,
                offset: -14.0,
            },
            3,
        )
        .unwrap();
        let bound = (6.0_f64 / 257.0).sqrt();
        for v in m.weights[0].iter() {
            assert!(v.abs() <= bound, "Glorot bound violated: |{v}| > {bound}");
        }
        for b in &m.biases {
            assert!(b.iter().all(|&v| v == 0.0), "biases must start at zero");
        }
    }

    #[test]
    fn cavity_architecture_shapes() {
        let m = ParamModel::init(&[1, 64, 32, 1], AFFINE_ID, 0).unwrap();
        assert_eq!(m.weights[0].dim(), (64, 1));
        assert_eq!(m.weights[1].dim(), (32, 64));
        assert_eq!(m.weights[2].dim(), (1, 32));
    }

    #[test]
    fn init_is_deterministic() {
        let a = ParamModel::init(&[1, 8, 1], AFFINE_ID, 99).unwrap();
        let b = ParamModel::init(&[1, 8, 1], AFFINE_ID, 99).unwrap();
        assert_eq!(a, b, "same seed must give bit-identical weights");
        let c = ParamModel::init(&[1, 8, 1], AFFINE_ID, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(ParamModel::init(&[4], AFFINE_ID, 0).is_err());
        assert!(ParamModel::init(&[1, 0, 1], AFFINE_ID, 0).is_err());
        assert!(ParamModel::init(&[], AFFINE_ID, 0).is_err());
    }

    #[test]
    fn zeroed_model_hits_transform_offset() {
        let mut m = ParamModel::init(
            &[1, 4, 1],
            OutputTransform::Exp10Scaled {
                scale: 1.0,
                offset: -14.0,
            },
            0,
        )
        .unwrap();
        for w in &mut m.weights {
            w.fill(0.0);
        }
        let p = m.forward(&[1.0]).unwrap();
        assert_eq!(p, vec![1e-14]);
    }

    #[test]
    fn single_linear_layer_by_hand() {
        let mut m = ParamModel::init(&[1, 1], AFFINE_ID, 0).unwrap();
        m.weights[0][(0, 0)] = 2.0;
        m.biases[0][0] = 1.0;
        assert_eq!(m.forward(&[3.0]).unwrap(), vec![7.0]);
        // d p / d W = input, d p / d b = 1 for the linear case
        let jac = m.param_weight_jacobian(&[3.0]).unwrap();
        assert_eq!(jac.d_w[0][0][(0, 0)], 3.0);
        assert_eq!(jac.d_b[0][0][0], 1.0);
    }

    #[test]
    fn exp10_output_positive_over_many_seeds() {
        for seed in 0..1000 {
            let m = ParamModel::init(
                &[1, 6, 1],
                OutputTransform::Exp10Scaled {
                    scale: 1.0,
                    offset: -14.0,
                },
                seed,
            )
            .unwrap();
            let p = m.forward(&[1.0]).unwrap()[0];
            assert!(p.is_finite() && p > 0.0, "seed {seed} gave p = {p}");
        }
    }

    #[test]
    fn exp10_chain_rule_on_one_layer_net() {
        let mut m = ParamModel::init(
            &[1, 1],
            OutputTransform::Exp10Scaled {
                scale: 0.5,
                offset: -2.0,
            },
            0,
        )
        .unwrap();
        m.weights[0][(0, 0)] = 1.25;
        let input = [2.0];
        let raw = m.raw_forward(&input).unwrap()[0];
        let p = m.forward(&input).unwrap()[0];
        let jac = m.param_weight_jacobian(&input).unwrap();
        // symbolic: dp/dW = p * ln(10) * scale * d raw/d W, with d raw/d W = input
        let expect = p * LN10 * 0.5 * input[0];
        assert!(rel_err(jac.d_w[0][0][(0, 0)], expect) < 1e-14);
        assert!((raw - 2.5).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        for (sizes, transform) in [
            (
                vec![1usize, 16, 8, 1],
                OutputTransform::Exp10Scaled {
                    scale: 1.0,
                    offset: -14.0,
                },
            ),
            (
                vec![2usize, 10, 3],
                OutputTransform::Affine {
                    scale: 0.5,
                    offset: 0.25,
                },
            ),
        ] {
            let m = ParamModel::init(&sizes, transform, 7).unwrap();
            let input: Vec<f64> = (0..sizes[0]).map(|i| 1.0 + 0.5 * i as f64).collect();
            let jac = m.param_weight_jacobian(&input).unwrap();
            let h = 1e-6;
            for o in 0..m.n_outputs() {
                let f = |mm: &ParamModel| mm.forward(&input).unwrap()[o];
                for k in 0..m.n_layers() {
                    let (rows, cols) = m.weights[k].dim();
                    for r in 0..rows {
                        for c in 0..cols {
                            let fd = fd_weight(&m, k, r, c, h, f);
                            let ad = jac.d_w[o][k][(r, c)];
                            assert!(
                                rel_err(ad, fd) < 1e-6,
                                "layer {k} W({r},{c}) out {o}: ad={ad:e} fd={fd:e}"
                            );
                        }
                        let fd = fd_bias(&m, k, r, h, f);
                        let ad = jac.d_b[o][k][r];
                        assert!(
                            rel_err(ad, fd) < 1e-6,
                            "layer {k} b({r}) out {o}: ad={ad:e} fd={fd:e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_weights_unchanged() {
        let mut m = ParamModel::init(&[1, 4, 1], AFFINE_ID, 1).unwrap();
        let before = m.clone();
        let grads = ModelGrads::zeros_like(&m);
        let mut state = AdamState::new(&m);
        apply_adam_step(&mut m, &grads, &mut state, 1e-3).unwrap();
        assert_eq!(m, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut m = ParamModel::init(&[1, 1], AFFINE_ID, 2).unwrap();
        let w0 = m.weights[0][(0, 0)];
        let g = 0.37;
        let mut grads = ModelGrads::zeros_like(&m);
        grads.d_w[0][(0, 0)] = g;
        let mut state = AdamState::new(&m);
        let lr = 1e-3;
        apply_adam_step(&mut m, &grads, &mut state, lr).unwrap();
        // bias-corrected first step: delta = -lr * g / (|g| + eps)
        let expect = w0 - lr * g / (g.abs() + state.epsilon);
        assert!(
            (m.weights[0][(0, 0)] - expect).abs() < 1e-15,
            "first Adam step mismatch"
        );
    }

    #[test]
    fn adam_constant_gradient_drifts_monotonically() {
        let mut m = ParamModel::init(&[1, 1], AFFINE_ID, 3).unwrap();
        let mut grads = ModelGrads::zeros_like(&m);
        grads.d_w[0][(0, 0)] = -2.5; // negative gradient: weight should grow
        let mut state = AdamState::new(&m);
        let mut prev = m.weights[0][(0, 0)];
        for _ in 0..50 {
            apply_adam_step(&mut m, &grads, &mut state, 1e-3).unwrap();
            let now = m.weights[0][(0, 0)];
            assert!(now > prev, "drift must be monotone against the gradient sign");
            prev = now;
        }
    }

    #[test]
    fn adam_rejects_nan_gradient() {
        let mut m = ParamModel::init(&[1, 1], AFFINE_ID, 4).unwrap();
        let mut grads = ModelGrads::zeros_like(&m);
        grads.d_w[0][(0, 0)] = f64::NAN;
        let mut state = AdamState::new(&m);
        let err = apply_adam_step(&mut m, &grads, &mut state, 1e-3).unwrap_err();
        assert!(matches!(err, AdjointNetError::TrainingDiverged(_)));
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let m = ParamModel::init(
            &[2, 5, 3],
            OutputTransform::Exp10Scaled {
                scale: 1.0,
                offset: -14.0,
            },
            11,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&m, &mut buf).unwrap();
        let back = read_checkpoint(&mut buf.as_slice()).unwrap();
        assert_eq!(m, back, "checkpoint must round-trip bit-exactly");
    }
}
