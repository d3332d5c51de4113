use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{axpy, sigmoid, softmax, Matrix};
use super::NnError;

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` inside the log.
pub const PROB_CLIP: f64 = 1e-12;

/// Gate blocks in the stacked weight matrices, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    /// Candidate cell update (tanh).
    Cell = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Cell];
}

/// Memory-block parameters. The four gates are stacked row-wise, so `w` is
/// 4H x D, `u` is 4H x H and `b` has 4H entries, in [`Gate`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        Self {
            w: Matrix::zeros(4 * hidden, input_size),
            u: Matrix::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases, forget bias 1.
    pub fn init(input_size: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let s = 1.0 / (hidden as f64).sqrt();
        let mut p = Self {
            w: Matrix::uniform(4 * hidden, input_size, s, rng),
            u: Matrix::uniform(4 * hidden, hidden, s, rng),
            b: vec![0.0; 4 * hidden],
        };
        p.gate_bias_mut(Gate::Forget).fill(1.0);
        p
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden();
        let k = gate as usize;
        &mut self.b[k * h..(k + 1) * h]
    }
}

/// Dense output layer: C x H weights plus C biases. C = 1 uses a sigmoid,
/// C > 1 a softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl HeadParams {
    pub fn zeros(classes: usize, hidden: usize) -> Self {
        Self {
            w: Matrix::zeros(classes, hidden),
            b: vec![0.0; classes],
        }
    }

    pub fn init(classes: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let s = 1.0 / (hidden as f64).sqrt();
        Self {
            w: Matrix::uniform(classes, hidden, s, rng),
            b: vec![0.0; classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.w.rows()
    }
}

/// Everything the backward pass needs from one cell step.
#[derive(Debug, Clone)]
pub struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One LSTM step:
/// i, f, o = sigma(W x + U h + b), g = tanh(W x + U h + b),
/// c = f * c_prev + i * g, h = o * tanh(c).
pub fn lstm_cell_forward(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>, CellCache), NnError> {
    let hidden = p.hidden();
    check_len("input", p.input_size(), x.len())?;
    check_len("h_prev", hidden, h_prev.len())?;
    check_len("c_prev", hidden, c_prev.len())?;

    let mut z = p.b.clone();
    p.w.matvec_acc(x, &mut z);
    p.u.matvec_acc(h_prev, &mut z);

    let block = |k: usize| &z[k * hidden..(k + 1) * hidden];
    let i: Vec<f64> = block(0).iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = block(1).iter().map(|&v| sigmoid(v)).collect();
    let o: Vec<f64> = block(2).iter().map(|&v| sigmoid(v)).collect();
    let g: Vec<f64> = block(3).iter().map(|&v| v.tanh()).collect();

    let c: Vec<f64> = (0..hidden)
        .map(|k| f[k] * c_prev[k] + i[k] * g[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = (0..hidden).map(|k| o[k] * tanh_c[k]).collect();

    let cache = CellCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i,
        f,
        o,
        g,
        tanh_c,
    };
    Ok((h, c, cache))
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), NnError> {
    if expected == found {
        Ok(())
    } else {
        Err(NnError::ShapeMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Intermediate state of one sequence forward pass.
#[derive(Debug, Clone)]
pub struct SequenceCache {
    pub steps: Vec<CellCache>,
    /// Final hidden state after dropout, as fed to the head.
    pub h_out: Vec<f64>,
    /// Per-unit dropout multipliers applied to the final hidden state.
    pub dropout: Option<Vec<f64>>,
    pub probs: Vec<f64>,
}

/// LSTM layer plus dense head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub lstm: LstmParams,
    pub head: HeadParams,
}

/// Gradients share the parameter layout.
pub type Gradients = Network;

impl Network {
    pub fn zeros(input_size: usize, hidden: usize, classes: usize) -> Self {
        Self {
            lstm: LstmParams::zeros(input_size, hidden),
            head: HeadParams::zeros(classes, hidden),
        }
    }

    pub fn init(input_size: usize, hidden: usize, classes: usize, rng: &mut impl Rng) -> Self {
        let lstm = LstmParams::init(input_size, hidden, rng);
        let head = HeadParams::init(classes, hidden, rng);
        Self { lstm, head }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(
            self.lstm.input_size(),
            self.lstm.hidden(),
            self.head.classes(),
        )
    }

    pub fn hidden(&self) -> usize {
        self.lstm.hidden()
    }

    pub fn slices(&self) -> [&[f64]; 5] {
        [
            self.lstm.w.as_slice(),
            self.lstm.u.as_slice(),
            &self.lstm.b,
            self.head.w.as_slice(),
            &self.head.b,
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.lstm.w.as_mut_slice(),
            self.lstm.u.as_mut_slice(),
            &mut self.lstm.b,
            self.head.w.as_mut_slice(),
            &mut self.head.b,
        ]
    }

    pub fn fill(&mut self, v: f64) {
        for s in self.slices_mut() {
            s.fill(v);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|x| *x *= k);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// Rescales so that the global L2 norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.l2_norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
        norm
    }

    /// Runs the sequence in time order and applies the head to the final
    /// hidden state, after the optional dropout multipliers.
    pub fn forward<R: AsRef<[f64]>>(
        &self,
        inputs: &[R],
        dropout: Option<&[f64]>,
    ) -> Result<(Vec<f64>, SequenceCache), NnError> {
        forward_sequence(inputs, &self.lstm, &self.head, dropout)
    }

    /// Adds `scale * d loss / d params` for one cached example into `grads`.
    pub fn accumulate_gradients(
        &self,
        cache: &SequenceCache,
        label: usize,
        scale: f64,
        grads: &mut Gradients,
    ) {
        let hidden = self.hidden();
        let classes = self.head.classes();

        // d loss / d head pre-activation. Zero where the clip is active.
        let dz: Vec<f64> = if classes == 1 {
            let p = cache.probs[0];
            if (PROB_CLIP..=1.0 - PROB_CLIP).contains(&p) {
                vec![scale * (p - label as f64)]
            } else {
                vec![0.0]
            }
        } else {
            let py = cache.probs[label];
            if (PROB_CLIP..=1.0 - PROB_CLIP).contains(&py) {
                cache
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| scale * (p - if k == label { 1.0 } else { 0.0 }))
                    .collect()
            } else {
                vec![0.0; classes]
            }
        };

        grads.head.w.add_outer(&dz, &cache.h_out);
        axpy(1.0, &dz, &mut grads.head.b);

        let mut dh = vec![0.0; hidden];
        self.head.w.matvec_t_acc(&dz, &mut dh);
        if let Some(mask) = &cache.dropout {
            dh.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
        }

        let mut dc = vec![0.0; hidden];
        let mut dzs = vec![0.0; 4 * hidden];
        for step in cache.steps.iter().rev() {
            for k in 0..hidden {
                let (i, f, o, g, tc) = (step.i[k], step.f[k], step.o[k], step.g[k], step.tanh_c[k]);
                let d_o = dh[k] * tc;
                let dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
                let d_i = dck * g;
                let d_g = dck * i;
                let d_f = dck * step.c_prev[k];
                dc[k] = dck * f;
                dzs[k] = d_i * i * (1.0 - i);
                dzs[hidden + k] = d_f * f * (1.0 - f);
                dzs[2 * hidden + k] = d_o * o * (1.0 - o);
                dzs[3 * hidden + k] = d_g * (1.0 - g * g);
            }
            grads.lstm.w.add_outer(&dzs, &step.x);
            grads.lstm.u.add_outer(&dzs, &step.h_prev);
            axpy(1.0, &dzs, &mut grads.lstm.b);
            dh.fill(0.0);
            self.lstm.u.matvec_t_acc(&dzs, &mut dh);
        }
    }
}

/// Sequence forward: sigmoid probability for a one-unit head, softmax
/// distribution otherwise.
pub fn forward_sequence<R: AsRef<[f64]>>(
    inputs: &[R],
    lstm: &LstmParams,
    head: &HeadParams,
    dropout: Option<&[f64]>,
) -> Result<(Vec<f64>, SequenceCache), NnError> {
    let hidden = lstm.hidden();
    check_len("head input", hidden, head.w.cols())?;
    if let Some(mask) = dropout {
        check_len("dropout mask", hidden, mask.len())?;
    }
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut steps = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (h_next, c_next, cache) = lstm_cell_forward(x.as_ref(), &h, &c, lstm)?;
        h = h_next;
        c = c_next;
        steps.push(cache);
    }
    if let Some(mask) = dropout {
        h.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
    }
    let mut z = head.b.clone();
    head.w.matvec_acc(&h, &mut z);
    let probs = if z.len() == 1 {
        vec![sigmoid(z[0])]
    } else {
        softmax(&z)
    };
    if probs.iter().any(|p| !p.is_finite()) || h.iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("forward pass".into()));
    }
    let cache = SequenceCache {
        steps,
        h_out: h,
        dropout: dropout.map(<[f64]>::to_vec),
        probs: probs.clone(),
    };
    Ok((probs, cache))
}

/// Cross-entropy with clipped logs. A one-element `probs` is read as the
/// positive-class probability of a binary problem.
pub fn loss(probs: &[f64], label: usize) -> f64 {
    let clip = |p: f64| p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    if probs.len() == 1 {
        let p = clip(probs[0]);
        if label == 1 {
            -p.ln()
        } else {
            -(1.0 - p).ln()
        }
    } else {
        -clip(probs[label]).ln()
    }
}

/// Exact gradient of `scale * loss` for one forward pass.
pub fn backward_bptt(net: &Network, cache: &SequenceCache, label: usize, scale: f64) -> Gradients {
    let mut grads = net.zeros_like();
    net.accumulate_gradients(cache, label, scale, &mut grads);
    grads
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_cell_is_zero() {
        let p = LstmParams::zeros(3, 4);
        let (h, c, _) = lstm_cell_forward(&[1.0, -2.0, 0.5], &[0.0; 4], &[0.0; 4], &p).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(c, vec![0.0; 4]);
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut p = LstmParams::zeros(2, 3);
        p.gate_bias_mut(Gate::Forget).fill(20.0);
        let c0 = [0.7, -1.3, 2.0];
        let (_, c, _) = lstm_cell_forward(&[0.4, -0.2], &[0.0; 3], &c0, &p).unwrap();
        for (a, b) in c.iter().zip(&c0) {
            assert!((a - b).abs() < 1e-6 * b.abs());
        }
    }

    #[test]
    fn scalar_cell_matches_hand_evaluation() {
        let mut p = LstmParams::zeros(1, 1);
        p.w.fill(0.5);
        p.u.fill(0.5);
        p.b.fill(0.5);
        let (h, c, _) = lstm_cell_forward(&[1.0], &[0.0], &[0.0], &p).unwrap();
        // Every gate sees 0.5 * 1 + 0.5 * 0 + 0.5 = 1.
        let s = 1.0 / (1.0 + (-1.0f64).exp());
        let g = 1.0f64.tanh();
        let c_ref = s * 0.0 + s * g;
        let h_ref = s * c_ref.tanh();
        assert!((c[0] - c_ref).abs() < 1e-12);
        assert!((h[0] - h_ref).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let p = LstmParams::zeros(2, 3);
        assert!(matches!(
            lstm_cell_forward(&[1.0], &[0.0; 3], &[0.0; 3], &p),
            Err(NnError::ShapeMismatch { what: "input", .. })
        ));
        assert!(lstm_cell_forward(&[1.0, 2.0], &[0.0; 2], &[0.0; 3], &p).is_err());
        let net = Network::zeros(2, 3, 1);
        assert!(net.forward(&[[1.0, 2.0]], Some(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn zero_network_outputs() {
        let inputs = vec![[0.3, -1.0]; 6];
        let (p, _) = Network::zeros(2, 4, 1).forward(&inputs, None).unwrap();
        assert_eq!(p, vec![0.5]);
        let (p, _) = Network::zeros(2, 4, 4).forward(&inputs, None).unwrap();
        assert_eq!(p, vec![0.25; 4]);
    }

    #[test]
    fn softmax_outputs_normalized() {
        let mut r = rng::seeded(3);
        let net = Network::init(5, 6, 4, &mut r);
        for k in 0..20 {
            let inputs: Vec<Vec<f64>> = (0..8)
                .map(|t| {
                    (0..5)
                        .map(|d| ((k * 31 + t * 7 + d) as f64).sin() * 3.0)
                        .collect()
                })
                .collect();
            let (p, _) = net.forward(&inputs, None).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn loss_values() {
        assert!((loss(&[0.5], 1) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((loss(&[0.25; 4], 2) - 4f64.ln()).abs() < 1e-15);
        assert!(loss(&[1.0], 1) <= 1e-11);
        assert!(loss(&[0.0], 1).is_finite());
        assert!(loss(&[1.0], 0).is_finite());
    }

    #[test]
    fn saturated_correct_output_has_zero_head_gradient() {
        let mut net = Network::zeros(2, 3, 1);
        net.head.b[0] = 40.0;
        let (p, cache) = net.forward(&[[1.0, 1.0]; 3], None).unwrap();
        assert_eq!(p[0], 1.0);
        let g = backward_bptt(&net, &cache, 1, 1.0);
        assert_eq!(g.head.b[0], 0.0);
        // Unsaturated: d loss / d head bias = p - y.
        net.head.b[0] = 0.3;
        let (p, cache) = net.forward(&[[1.0, 1.0]; 3], None).unwrap();
        let g = backward_bptt(&net, &cache, 0, 1.0);
        assert_eq!(g.head.b[0], p[0]);
    }

    #[test]
    fn gradient_scales_linearly_with_loss() {
        let mut r = rng::seeded(11);
        let net = Network::init(3, 5, 4, &mut r);
        let inputs = vec![[0.2, -0.7, 1.1]; 6];
        let (_, cache) = net
            .forward(&inputs, Some(&[1.25, 0.0, 1.25, 1.25, 1.25]))
            .unwrap();
        let g1 = backward_bptt(&net, &cache, 2, 1.0);
        let g2 = backward_bptt(&net, &cache, 2, 2.0);
        for (a, b) in g1.slices().iter().zip(g2.slices()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(2.0 * x, *y);
            }
        }
    }

    #[test]
    fn clip_norm_caps_global_norm() {
        let mut g = Network::zeros(2, 2, 1);
        g.fill(3.0);
        let before = g.l2_norm();
        assert_eq!(g.clip_norm(5.0), before);
        assert!((g.l2_norm() - 5.0).abs() < 1e-12);
        let mut small = Network::zeros(2, 2, 1);
        small.head.b[0] = 0.1;
        small.clip_norm(5.0);
        assert_eq!(small.head.b[0], 0.1);
    }

    #[test]
    fn init_layout() {
        let mut r = rng::seeded(0);
        let mut p = LstmParams::init(11, 8, &mut r);
        let s = 1.0 / 8f64.sqrt();
        assert!(p
            .w
            .as_slice()
            .iter()
            .chain(p.u.as_slice())
            .all(|v| v.abs() <= s));
        assert_eq!(p.gate_bias_mut(Gate::Forget), &[1.0; 8]);
        assert!(p.gate_bias_mut(Gate::Input).iter().all(|&b| b == 0.0));
        assert_eq!((p.w.rows(), p.w.cols(), p.u.cols()), (32, 11, 8));
    }
}
