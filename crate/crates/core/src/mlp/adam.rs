use super::network::Dense;

/// Adam with bias-corrected first and second moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: i32,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Adam {
    pub fn new(layers: &[Dense], step_size: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Dense> = layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect();
        Adam { step_size, beta1, beta2, epsilon, t: 0, m: zeros.clone(), v: zeros }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, layers: &mut [Dense], grads: &[Dense]) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let lr = self.step_size;
        let eps = self.epsilon;
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        for (((layer, g), m), v) in layers.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights);
            update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_step_size() {
        // with bias correction the first update is lr·g/(|g| + eps)
        let mut layers = vec![Dense::zeros(2, 1)];
        let mut grads = vec![Dense::zeros(2, 1)];
        grads[0].weights = vec![0.5, -3.0];
        grads[0].bias = vec![0.0];
        let mut opt = Adam::new(&layers, 0.01, 0.9, 0.999, 1e-8);
        opt.step(&mut layers, &grads);
        assert!((layers[0].weights[0] + 0.01).abs() < 1e-9);
        assert!((layers[0].weights[1] - 0.01).abs() < 1e-9);
        assert_eq!(layers[0].bias[0], 0.0);
        assert_eq!(opt.steps(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        // f(w) = (w - 3)², grad 2(w - 3)
        let mut layers = vec![Dense::zeros(1, 1)];
        let mut opt = Adam::new(&layers, 0.05, 0.9, 0.999, 1e-8);
        for _ in 0..2000 {
            let mut g = Dense::zeros(1, 1);
            g.weights[0] = 2.0 * (layers[0].weights[0] - 3.0);
            opt.step(&mut layers, &[g]);
        }
        assert!((layers[0].weights[0] - 3.0).abs() < 1e-3);
    }
}
