use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation<T> {
    /// `max(x, slope·x)`
    LeakyRelu(T),
    Tanh,
    Identity,
}

impl<T: Real> Activation<T> {
    #[inline]
    fn apply(&self, z: T) -> T {
        match *self {
            Activation::LeakyRelu(slope) => {
                if z > T::zero() {
                    z
                } else {
                    slope * z
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(&self, z: T) -> T {
        match *self {
            Activation::LeakyRelu(slope) => {
                if z > T::zero() {
                    T::one()
                } else {
                    slope
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                T::one() - t * t
            }
            Activation::Identity => T::one(),
        }
    }
}

/// Fully connected layer, `y = W·x + b` with `W` stored row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            bias: vec![T::zero(); outputs],
        }
    }

    #[inline]
    fn affine(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let mut acc = *b;
            for (w, xi) in row.iter().zip(x) {
                acc += *w * *xi;
            }
            out.push(acc);
        }
    }
}

/// Multi-layer perceptron; hidden layers use `activation`, the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
    activation: Activation<T>,
}

/// Per-layer inputs and pre-activations recorded by a forward pass.
#[derive(Debug, Clone, Default)]
pub struct Trace<T> {
    inputs: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
    output: Vec<T>,
}

impl<T> Trace<T> {
    pub fn output(&self) -> &[T] {
        &self.output
    }

    /// Pre-activation values of every layer, input side first.
    pub fn pre_activations(&self) -> &[Vec<T>] {
        &self.pre
    }
}

/// Parameter gradients laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads<T> {
    pub layers: Vec<Dense<T>>,
}

impl<T: Real> MlpGrads<T> {
    pub fn zeros_like(m: &Mlp<T>) -> Self {
        Self {
            layers: m.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    /// Flat view in the same order as [`Mlp::parameters_mut`].
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn norm_squared(&self) -> T {
        self.values().map(|g| *g * *g).sum()
    }

    pub fn scale(&mut self, s: T) {
        self.values_mut().for_each(|g| *g *= s);
    }

    pub fn clear(&mut self) {
        self.values_mut().for_each(|g| *g = T::zero());
    }
}

impl<T: Real> Mlp<T> {
    /// All-zero network with the given layer widths (input first, output last).
    pub fn zeros(sizes: &[usize], activation: Activation<T>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "an MLP needs at least two non-zero layer widths, got {sizes:?}"
            )));
        }
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            activation,
        })
    }

    /// Uniform Glorot initialization multiplied by `scale`; biases start at zero.
    pub fn random<R: Rng + ?Sized>(
        sizes: &[usize],
        activation: Activation<T>,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut m = Self::zeros(sizes, activation)?;
        for layer in &mut m.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt() * scale;
            for w in &mut layer.weights {
                *w = T::lit(rng.random_range(-1.0..=1.0) * limit);
            }
        }
        Ok(m)
    }

    pub fn from_layers(layers: Vec<Dense<T>>, activation: Activation<T>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("an MLP needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(Error::InvalidArgument(format!("layer {i} has zero width")));
            }
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::InvalidArgument(format!(
                    "layer {i} parameter count does not match {}x{}",
                    l.outputs, l.inputs
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} parameters")));
            }
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].outputs != w[1].inputs {
                return Err(Error::InvalidArgument(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    w[0].outputs,
                    i + 1,
                    w[1].inputs
                )));
            }
        }
        Ok(Self { layers, activation })
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn activation(&self) -> Activation<T> {
        self.activation
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn parameters(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    /// Zeroes the weights and bias of the output layer, making the network output zero.
    pub fn zero_output_layer(&mut self) {
        let last = self.layers.len() - 1;
        let l = &mut self.layers[last];
        l.weights.iter_mut().for_each(|w| *w = T::zero());
        l.bias.iter_mut().for_each(|b| *b = T::zero());
    }

    /// Sets the output layer to emit the constant `bias` regardless of input.
    pub fn set_constant_output(&mut self, bias: &[T]) -> Result<()> {
        if bias.len() != self.output_width() {
            return Err(Error::DimensionMismatch {
                expected: self.output_width(),
                found: bias.len(),
            });
        }
        self.zero_output_layer();
        let last = self.layers.len() - 1;
        self.layers[last].bias.copy_from_slice(bias);
        Ok(())
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|z| *z = self.activation.apply(*z));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass recording what [`Mlp::backward`] needs.
    pub fn forward_trace(&self, x: &[T], trace: &mut Trace<T>) -> Result<()> {
        self.check_input(x)?;
        let n = self.layers.len();
        trace.inputs.resize_with(n, Vec::new);
        trace.pre.resize_with(n, Vec::new);
        trace.inputs[0].clear();
        trace.inputs[0].extend_from_slice(x);
        for i in 0..n {
            let (head, tail) = trace.inputs.split_at_mut(i + 1);
            let input = &head[i];
            self.layers[i].affine(input, &mut trace.pre[i]);
            let post = if i + 1 < n { &mut tail[0] } else { &mut trace.output };
            post.clear();
            if i + 1 < n {
                post.extend(trace.pre[i].iter().map(|z| self.activation.apply(*z)));
            } else {
                post.extend_from_slice(&trace.pre[i]);
            }
        }
        Ok(())
    }

    /// Accumulates parameter gradients into `grads` and returns `∂L/∂x`.
    pub fn backward(&self, trace: &Trace<T>, grad_output: &[T], grads: &mut MlpGrads<T>) -> Result<Vec<T>> {
        if grad_output.len() != self.output_width() {
            return Err(Error::DimensionMismatch {
                expected: self.output_width(),
                found: grad_output.len(),
            });
        }
        if trace.pre.len() != self.layers.len() {
            return Err(Error::InvalidArgument("trace does not belong to this network".into()));
        }
        let mut delta = grad_output.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            if i + 1 < self.layers.len() {
                for (d, z) in delta.iter_mut().zip(&trace.pre[i]) {
                    *d *= self.activation.derivative(*z);
                }
            }
            let input = &trace.inputs[i];
            let g = &mut grads.layers[i];
            for (o, d) in delta.iter().enumerate() {
                g.bias[o] += *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, x) in row.iter_mut().zip(input) {
                    *gw += *d * *x;
                }
            }
            let mut prev = vec![T::zero(); layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += *d * *w;
                }
            }
            delta = prev;
        }
        Ok(delta)
    }
}

pub fn mlp_forward<T: Real>(m: &Mlp<T>, x: &[T]) -> Result<Vec<T>> {
    m.forward(x)
}

/// Exact gradients of `dot(dLoss/dOutput, m(x))` with respect to the parameters and input.
pub fn mlp_backward<T: Real>(m: &Mlp<T>, x: &[T], grad_output: &[T]) -> Result<(MlpGrads<T>, Vec<T>)> {
    let mut trace = Trace::default();
    m.forward_trace(x, &mut trace)?;
    let mut grads = MlpGrads::zeros_like(m);
    let gx = m.backward(&trace, grad_output, &mut grads)?;
    Ok((grads, gx))
}
