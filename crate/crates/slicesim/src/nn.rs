//! Minimal fully-connected network with ReLU hidden layers, batched
//! forward/backward passes, and an Adam optimizer.
//!
//! Parameters live in one flat `Vec<f64>` (per layer: an input-major weight
//! matrix, then the bias vector), which makes target-network copies,
//! checkpointing, and gradient checking trivial. All arithmetic is f64 and
//! sequential, so results are bit-reproducible for a given seed.

use rand::Rng;

/// Fully-connected ReLU network. `dims` = [input, hidden..., output].
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    dims: Vec<usize>,
    params: Vec<f64>,
}

/// Reusable activation storage for batched passes.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// `acts[l]` holds the batch-major activations entering layer `l`
    /// (`acts[0]` is the input batch); `acts.last()` is the network output.
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache populated by forward_batch")
    }
}

impl QNetwork {
    /// He-uniform initialization: weights in `±sqrt(6 / fan_in)`, zero biases.
    pub fn new_seeded<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least input and output layers");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let mut params = Vec::with_capacity(Self::param_count(dims));
        for l in 0..dims.len() - 1 {
            let limit = (6.0 / dims[l] as f64).sqrt();
            for _ in 0..dims[l] * dims[l + 1] {
                params.push((rng.gen::<f64>() * 2.0 - 1.0) * limit);
            }
            params.extend(std::iter::repeat(0.0).take(dims[l + 1]));
        }
        QNetwork {
            dims: dims.to_vec(),
            params,
        }
    }

    pub fn param_count(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_len(&self) -> usize {
        self.dims[0]
    }

    pub fn output_len(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    /// Copy another network's parameters (target-network sync).
    pub fn copy_from(&mut self, other: &QNetwork) {
        assert_eq!(self.dims, other.dims);
        self.params.copy_from_slice(&other.params);
    }

    fn layer_spans(&self) -> Vec<(usize, usize, usize, usize)> {
        // (w_offset, b_offset, in_dim, out_dim) per layer
        let mut spans = Vec::with_capacity(self.dims.len() - 1);
        let mut off = 0;
        for l in 0..self.dims.len() - 1 {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            spans.push((off, off + i * o, i, o));
            off += i * o + o;
        }
        spans
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = ForwardCache::new();
        self.forward_batch(x, 1, &mut cache);
        cache.output().to_vec()
    }

    /// Batched forward pass over `batch` rows of length `dims[0]`,
    /// stored row-major in `xs`.
    pub fn forward_batch(&self, xs: &[f64], batch: usize, cache: &mut ForwardCache) {
        assert_eq!(xs.len(), batch * self.dims[0]);
        let layers = self.dims.len() - 1;
        cache.acts.resize(layers + 1, Vec::new());
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(xs);

        for (l, (w_off, b_off, in_dim, out_dim)) in self.layer_spans().into_iter().enumerate() {
            let w = &self.params[w_off..w_off + in_dim * out_dim];
            let b = &self.params[b_off..b_off + out_dim];
            let (prev, rest) = cache.acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut rest[0];
            out.clear();
            out.reserve(batch * out_dim);
            for i in 0..batch {
                out.extend_from_slice(b);
                let row = &mut out[i * out_dim..(i + 1) * out_dim];
                let x_row = &input[i * in_dim..(i + 1) * in_dim];
                for (k, &a) in x_row.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let w_row = &w[k * out_dim..(k + 1) * out_dim];
                    for (r, &wv) in row.iter_mut().zip(w_row) {
                        *r += a * wv;
                    }
                }
            }
            if l < layers - 1 {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    /// Backward pass for the batch held in `cache`. `d_out` is the gradient of
    /// the loss with respect to the network output (batch-major), `grads`
    /// receives accumulated parameter gradients (caller zeroes beforehand).
    pub fn backward_batch(&self, cache: &ForwardCache, d_out: &[f64], batch: usize, grads: &mut [f64]) {
        assert_eq!(grads.len(), self.params.len());
        let layers = self.dims.len() - 1;
        assert_eq!(d_out.len(), batch * self.output_len());
        let spans = self.layer_spans();

        let mut delta = d_out.to_vec();
        for l in (0..layers).rev() {
            let (w_off, b_off, in_dim, out_dim) = spans[l];
            let input = &cache.acts[l];
            let w = &self.params[w_off..w_off + in_dim * out_dim];

            // Bias gradient: column sums of delta.
            {
                let gb = &mut grads[b_off..b_off + out_dim];
                for i in 0..batch {
                    let d_row = &delta[i * out_dim..(i + 1) * out_dim];
                    for (g, &d) in gb.iter_mut().zip(d_row) {
                        *g += d;
                    }
                }
            }
            // Weight gradient: input^T * delta.
            {
                let gw = &mut grads[w_off..w_off + in_dim * out_dim];
                for i in 0..batch {
                    let x_row = &input[i * in_dim..(i + 1) * in_dim];
                    let d_row = &delta[i * out_dim..(i + 1) * out_dim];
                    for (k, &a) in x_row.iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        let g_row = &mut gw[k * out_dim..(k + 1) * out_dim];
                        for (g, &d) in g_row.iter_mut().zip(d_row) {
                            *g += a * d;
                        }
                    }
                }
            }
            // Propagate to the previous layer (skip below the input).
            if l == 0 {
                break;
            }
            let mut prev_delta = vec![0.0; batch * in_dim];
            for i in 0..batch {
                let d_row = &delta[i * out_dim..(i + 1) * out_dim];
                let x_row = &input[i * in_dim..(i + 1) * in_dim];
                let p_row = &mut prev_delta[i * in_dim..(i + 1) * in_dim];
                for k in 0..in_dim {
                    // ReLU mask: inactive units pass no gradient.
                    if x_row[k] <= 0.0 {
                        continue;
                    }
                    let w_row = &w[k * out_dim..(k + 1) * out_dim];
                    let mut acc = 0.0;
                    for (wv, d) in w_row.iter().zip(d_row) {
                        acc += wv * d;
                    }
                    p_row[k] = acc;
                }
            }
            delta = prev_delta;
        }
    }
}

/// Adam optimizer over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Internal state for checkpointing: (first moments, second moments, step count).
    pub fn state(&self) -> (&[f64], &[f64], u64) {
        (&self.m, &self.v, self.t)
    }

    pub fn restore(&mut self, m: Vec<f64>, v: Vec<f64>, t: u64) {
        assert_eq!(m.len(), self.m.len());
        assert_eq!(v.len(), self.v.len());
        self.m = m;
        self.v = v;
        self.t = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::named_stream;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_count_and_layout() {
        assert_eq!(QNetwork::param_count(&[45, 256, 256, 100]), 103_268);
        assert_eq!(QNetwork::param_count(&[2, 3]), 9);
        let mut rng = named_stream(1, "nn-test");
        let net = QNetwork::new_seeded(&[45, 256, 256, 100], &mut rng);
        assert_eq!(net.num_params(), 103_268);
        assert_eq!(net.input_len(), 45);
        assert_eq!(net.output_len(), 100);
    }

    #[test]
    fn initialization_respects_he_bounds() {
        let mut rng = named_stream(2, "nn-test");
        let net = QNetwork::new_seeded(&[100, 50, 10], &mut rng);
        let spans = net.layer_spans();
        for (w_off, b_off, in_dim, out_dim) in spans {
            let limit = (6.0 / in_dim as f64).sqrt();
            for &w in &net.params()[w_off..w_off + in_dim * out_dim] {
                assert!(w.abs() <= limit, "weight {w} outside ±{limit}");
            }
            for &b in &net.params()[b_off..b_off + out_dim] {
                assert_eq!(b, 0.0);
            }
        }
    }

    #[test]
    fn seeded_initialization_is_reproducible() {
        let a = QNetwork::new_seeded(&[10, 20, 5], &mut named_stream(7, "nn-test"));
        let b = QNetwork::new_seeded(&[10, 20, 5], &mut named_stream(7, "nn-test"));
        assert_eq!(a, b);
    }

    #[test]
    fn hand_built_network_forward() {
        // 2 -> 2 -> 1, weights chosen so values are easy to trace.
        let mut net = QNetwork::new_seeded(&[2, 2, 1], &mut named_stream(3, "nn-test"));
        // Layer 0: W = [[1, -1], [2, 0.5]], b = [0, 1].
        // Layer 1: W = [[3], [-2]], b = [0.25].
        net.set_params(&[1.0, -1.0, 2.0, 0.5, 0.0, 1.0, 3.0, -2.0, 0.25]);
        // x = [1, 1]: pre-act = [1*1+1*2, 1*-1+1*0.5] + [0,1] = [3, 0.5];
        // ReLU keeps both; out = 3*3 + 0.5*-2 + 0.25 = 8.25.
        let y = net.forward(&[1.0, 1.0]);
        assert_relative_eq!(y[0], 8.25, epsilon = 1e-12);
        // x = [-1, 0]: pre-act = [-1, 2]; ReLU -> [0, 2]; out = 0*3 + 2*-2 + 0.25.
        let y = net.forward(&[-1.0, 0.0]);
        assert_relative_eq!(y[0], -3.75, epsilon = 1e-12);
    }

    #[test]
    fn batch_forward_matches_single_forward() {
        let mut rng = named_stream(4, "nn-test");
        let net = QNetwork::new_seeded(&[6, 16, 16, 4], &mut rng);
        let batch = 5;
        let xs: Vec<f64> = (0..batch * 6).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let mut cache = ForwardCache::new();
        net.forward_batch(&xs, batch, &mut cache);
        for i in 0..batch {
            let single = net.forward(&xs[i * 6..(i + 1) * 6]);
            let row = &cache.output()[i * 4..(i + 1) * 4];
            for (a, b) in single.iter().zip(row) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn backward_matches_central_differences() {
        let mut rng = named_stream(5, "nn-test");
        let mut net = QNetwork::new_seeded(&[3, 8, 4], &mut rng);
        let batch = 6;
        let xs: Vec<f64> = (0..batch * 3).map(|i| ((i % 7) as f64 - 3.0) / 2.0).collect();
        // Loss = 0.5 * sum(output^2): d_out = output.
        let loss_of = |net: &QNetwork| {
            let mut cache = ForwardCache::new();
            net.forward_batch(&xs, batch, &mut cache);
            cache.output().iter().map(|y| 0.5 * y * y).sum::<f64>()
        };
        let mut cache = ForwardCache::new();
        net.forward_batch(&xs, batch, &mut cache);
        let d_out = cache.output().to_vec();
        let mut grads = vec![0.0; net.num_params()];
        net.backward_batch(&cache, &d_out, batch, &mut grads);

        let h = 1e-6;
        let mut max_rel = 0.0f64;
        for p in (0..net.num_params()).step_by(3) {
            let orig = net.params()[p];
            net.params_mut()[p] = orig + h;
            let up = loss_of(&net);
            net.params_mut()[p] = orig - h;
            let down = loss_of(&net);
            net.params_mut()[p] = orig;
            let numeric = (up - down) / (2.0 * h);
            let denom = numeric.abs().max(grads[p].abs()).max(1e-8);
            max_rel = max_rel.max((numeric - grads[p]).abs() / denom);
        }
        assert!(max_rel < 1e-6, "max relative gradient error {max_rel}");
    }

    #[test]
    fn adam_zero_gradient_leaves_parameters_unchanged() {
        let mut rng = named_stream(6, "nn-test");
        let mut net = QNetwork::new_seeded(&[4, 8, 2], &mut rng);
        let before = net.params().to_vec();
        let mut adam = Adam::new(net.num_params(), 1e-3);
        let grads = vec![0.0; net.num_params()];
        adam.step(net.params_mut(), &grads);
        assert_eq!(net.params(), &before[..]);
    }

    #[test]
    fn adam_descends_a_quadratic() {
        // Minimize (p - 3)^2 for a single parameter.
        let mut params = vec![0.0];
        let mut adam = Adam::new(1, 0.05);
        for _ in 0..2000 {
            let g = 2.0 * (params[0] - 3.0);
            adam.step(&mut params, &[g]);
        }
        assert!((params[0] - 3.0).abs() < 1e-3, "ended at {}", params[0]);
    }

    #[test]
    fn target_copy_is_exact() {
        let mut rng = named_stream(8, "nn-test");
        let a = QNetwork::new_seeded(&[5, 12, 3], &mut rng);
        let mut b = QNetwork::new_seeded(&[5, 12, 3], &mut rng);
        assert_ne!(a, b);
        b.copy_from(&a);
        assert_eq!(a, b);
    }
}
