use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Matrix, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative at pre-activation `z`, given the activated value `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Affine map followed by an elementwise activation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self, NnError> {
        if bias.len() != weights.rows() {
            return Err(NnError::Shape(format!(
                "bias of length {} for {} outputs",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-initialized weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(input: usize, output: usize, activation: Activation, rng: &mut R) -> Self {
        Self {
            weights: Matrix::glorot(output, input, rng),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Per-layer values recorded by [`Mlp::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[l]` is the input to layer `l`.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.post.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pre_activations(&self, layer: usize) -> &[f64] {
        &self.pre[layer]
    }
}

/// Gradients shaped like the parameters of an [`Mlp`]: one weight and one
/// bias tensor per layer, in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Matrix, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (Matrix::zeros(l.output_dim(), l.input_dim()), vec![0.0; l.output_dim()]))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            w.data_mut().iter_mut().for_each(|v| *v *= factor);
            b.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Tensors in the same order as [`Mlp::tensors_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|(w, b)| [w.data(), b.as_slice()]).collect()
    }

    /// Concatenation of [`Gradients::tensors`].
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }
}

/// A chain of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::Shape("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(NnError::Shape(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].output_dim(),
                    i + 1,
                    pair[1].input_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialized network with the given layer widths. `widths` has
    /// one more entry than `activations`.
    pub fn glorot<R: Rng + ?Sized>(widths: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self, NnError> {
        if widths.len() != activations.len() + 1 {
            return Err(NnError::Shape(format!(
                "{} widths for {} activations",
                widths.len(),
                activations.len()
            )));
        }
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| DenseLayer::glorot(w[0], w[1], act, rng))
            .collect();
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.data().len() + l.bias.len()).sum()
    }

    /// Mutable parameter tensors: weights then bias, layer by layer.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.data_mut(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.data(), l.bias.as_slice()])
            .collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    /// Overwrites all parameters from a flat vector in [`Mlp::tensors`] order.
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<(), NnError> {
        if flat.len() != self.num_params() {
            return Err(NnError::Shape(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache), NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::Shape(format!(
                "input of length {} for a network expecting {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
            post: Vec::with_capacity(self.layers.len()),
        };
        let mut current = x.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weights.matvec(&current);
            for (v, b) in z.iter_mut().zip(&layer.bias) {
                *v += b;
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(NnError::NonFinite { layer: idx });
            }
            let a: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
            cache.inputs.push(std::mem::replace(&mut current, a.clone()));
            cache.pre.push(z);
            cache.post.push(a);
        }
        Ok((current, cache))
    }

    /// Reverse pass. Accumulates parameter gradients into `param_grads` when
    /// given, and returns the gradient with respect to the input when
    /// `want_input_grad` is set.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        mut param_grads: Option<&mut Gradients>,
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>, NnError> {
        if cache.pre.len() != self.layers.len() {
            return Err(NnError::Shape("cache does not match network depth".into()));
        }
        if output_grad.len() != self.output_dim() {
            return Err(NnError::Shape(format!(
                "output gradient of length {} for {} outputs",
                output_grad.len(),
                self.output_dim()
            )));
        }
        if let Some(g) = param_grads.as_deref() {
            if g.layers.len() != self.layers.len() {
                return Err(NnError::Shape("gradient buffer does not match network".into()));
            }
        }
        let mut upstream = output_grad.to_vec();
        for idx in (0..self.layers.len()).rev() {
            let layer = &self.layers[idx];
            let delta: Vec<f64> = upstream
                .iter()
                .zip(&cache.pre[idx])
                .zip(&cache.post[idx])
                .map(|((&g, &z), &a)| g * layer.activation.derivative(z, a))
                .collect();
            if let Some(grads) = param_grads.as_deref_mut() {
                let (gw, gb) = &mut grads.layers[idx];
                gw.add_outer(&delta, &cache.inputs[idx]);
                for (b, d) in gb.iter_mut().zip(&delta) {
                    *b += d;
                }
            }
            if idx == 0 && !want_input_grad {
                return Ok(None);
            }
            upstream = layer.weights.matvec_transposed(&delta);
        }
        Ok(Some(upstream))
    }

    /// Fresh parameter gradients and the input gradient.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<(Gradients, Vec<f64>), NnError> {
        let mut grads = Gradients::zeros_like(self);
        let input = self
            .backward_into(cache, output_grad, Some(&mut grads), true)?
            .unwrap_or_default();
        Ok((grads, input))
    }
}
