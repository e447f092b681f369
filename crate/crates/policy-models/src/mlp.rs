//! Fixed-architecture multilayer perceptrons over flat parameter slices.
//!
//! An `MlpShape` is a pure description: input width, hidden widths, output
//! width, activation. Parameters live in a caller-owned flat slice laid out
//! layer by layer, each layer as a row-major weight matrix followed by its
//! bias vector. Hidden layers apply the activation; the output layer is
//! affine.

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Used by policy trunks.
    Tanh,
    /// Used by Q and V trunks.
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `h = f(z)`.
    fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Relu => {
                if h > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One layer's location inside the flat parameter slice.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LayerLayout {
    weight_offset: usize,
    bias_offset: usize,
    fan_in: usize,
    fan_out: usize,
}

/// Architecture descriptor for a fully connected net.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpShape {
    widths: Vec<usize>,
    activation: Activation,
    layers: Vec<LayerLayout>,
    n_params: usize,
}

/// Forward-pass intermediates needed by the backward pass: the input to each
/// layer (so `values[0]` is the network input and `values.last()` the output).
#[derive(Debug, Clone)]
pub struct MlpCache {
    values: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.values.last().expect("cache holds at least the input")
    }
}

impl MlpShape {
    /// Builds a shape with the given layer widths. `hidden` may be empty, in
    /// which case the net is a single affine map.
    pub fn new(input: usize, hidden: &[usize], output: usize, activation: Activation) -> Self {
        assert!(input > 0 && output > 0, "widths must be positive");
        assert!(hidden.iter().all(|w| *w > 0), "widths must be positive");
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input);
        widths.extend_from_slice(hidden);
        widths.push(output);

        let mut layers = Vec::with_capacity(widths.len() - 1);
        let mut offset = 0;
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            layers.push(LayerLayout {
                weight_offset: offset,
                bias_offset: offset + fan_in * fan_out,
                fan_in,
                fan_out,
            });
            offset += fan_out * (fan_in + 1);
        }
        Self {
            widths,
            activation,
            layers,
            n_params: offset,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("at least two widths")
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of layers (affine maps).
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// The (weight_offset, bias_offset, fan_in, fan_out) of layer `l`,
    /// exposed for initializers.
    pub fn layer_extent(&self, l: usize) -> (usize, usize, usize, usize) {
        let lay = self.layers[l];
        (lay.weight_offset, lay.bias_offset, lay.fan_in, lay.fan_out)
    }

    pub fn forward(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        self.forward_cached(theta, x).values.pop().expect("output")
    }

    /// Forward pass that keeps every layer input for the backward pass.
    pub fn forward_cached(&self, theta: &[f64], x: &[f64]) -> MlpCache {
        assert_eq!(theta.len(), self.n_params, "parameter slice has wrong length");
        assert_eq!(x.len(), self.input_dim(), "input has wrong dimension");
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for (l, lay) in self.layers.iter().enumerate() {
            let input = values.last().expect("previous layer output");
            let mut out = vec![0.0; lay.fan_out];
            for o in 0..lay.fan_out {
                let w_row = &theta[lay.weight_offset + o * lay.fan_in..];
                let mut z = theta[lay.bias_offset + o];
                for i in 0..lay.fan_in {
                    z += w_row[i] * input[i];
                }
                out[o] = if l + 1 == self.layers.len() {
                    z
                } else {
                    self.activation.apply(z)
                };
            }
            values.push(out);
        }
        MlpCache { values }
    }

    /// Accumulates `coef * d(upstream . output) / d theta` into `grad`, where
    /// `upstream` is the gradient of some scalar loss with respect to the
    /// network output. Optionally also accumulates the gradient with respect
    /// to the network input into `dx`.
    pub fn backward(
        &self,
        theta: &[f64],
        cache: &MlpCache,
        upstream: &[f64],
        coef: f64,
        grad: &mut [f64],
        mut dx: Option<&mut [f64]>,
    ) {
        assert_eq!(theta.len(), self.n_params, "parameter slice has wrong length");
        assert_eq!(grad.len(), self.n_params, "gradient slice has wrong length");
        assert_eq!(upstream.len(), self.output_dim(), "upstream has wrong dimension");
        assert_eq!(
            cache.values.len(),
            self.layers.len() + 1,
            "cache does not match this shape"
        );

        let mut delta = upstream.to_vec();
        for (l, lay) in self.layers.iter().enumerate().rev() {
            let input = &cache.values[l];
            for o in 0..lay.fan_out {
                let d = delta[o];
                let w_grad = &mut grad[lay.weight_offset + o * lay.fan_in
                    ..lay.weight_offset + (o + 1) * lay.fan_in];
                for i in 0..lay.fan_in {
                    w_grad[i] += coef * d * input[i];
                }
                grad[lay.bias_offset + o] += coef * d;
            }
            let want_dx = l > 0 || dx.is_some();
            if !want_dx {
                break;
            }
            let mut prev = vec![0.0; lay.fan_in];
            for o in 0..lay.fan_out {
                let d = delta[o];
                let w_row = &theta[lay.weight_offset + o * lay.fan_in..];
                for i in 0..lay.fan_in {
                    prev[i] += d * w_row[i];
                }
            }
            if l > 0 {
                // The stored value is the activation output of layer l-1.
                for (p, h) in prev.iter_mut().zip(input) {
                    *p *= self.activation.derivative_from_output(*h);
                }
                delta = prev;
            } else if let Some(dx) = dx.as_deref_mut() {
                assert_eq!(dx.len(), lay.fan_in, "dx slice has wrong dimension");
                for (slot, p) in dx.iter_mut().zip(&prev) {
                    *slot += coef * p;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_net_outputs_final_bias() {
        let shape = MlpShape::new(3, &[4], 2, Activation::Tanh);
        let mut theta = vec![0.0; shape.n_params()];
        let (_, b_off, _, _) = shape.layer_extent(1);
        theta[b_off] = 0.7;
        theta[b_off + 1] = -1.3;
        let y = shape.forward(&theta, &[0.5, -2.0, 1.0]);
        assert_eq!(y, vec![0.7, -1.3]);
    }

    #[test]
    fn affine_net_matches_hand_computation() {
        // No hidden layers: y = W x + b with W = [[1, 2], [3, 4]], b = [5, 6].
        let shape = MlpShape::new(2, &[], 2, Activation::Relu);
        let theta = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = shape.forward(&theta, &[10.0, -1.0]);
        assert_eq!(y, vec![13.0, 32.0]);

        let cache = shape.forward_cached(&theta, &[10.0, -1.0]);
        let mut grad = vec![0.0; shape.n_params()];
        let mut dx = vec![0.0; 2];
        shape.backward(&theta, &cache, &[1.0, 0.0], 1.0, &mut grad, Some(&mut dx));
        assert_eq!(grad, vec![10.0, -1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(dx, vec![1.0, 2.0]);
    }
}
