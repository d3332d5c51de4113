//! Mini-batch forward and backward passes written as matrix products.
//!
//! Every state buffer is a row-major `rows x B` matrix whose column `b`
//! belongs to example `b`, so each time step costs a few GEMMs instead of B
//! matrix-vector products. The arithmetic is the same as
//! [`Network::accumulate_gradients`] summed over the batch.

use super::linalg::{gemm, sigmoid, softmax, View};
use super::lstm::{Gradients, Network, PROB_CLIP};
use super::NnError;

/// Adds `scale * d loss / d params` summed over the batch into `grads` and
/// returns each example's output probabilities.
///
/// All sequences must have the same length. `dropout[b]` holds the final
/// hidden-state multipliers for example `b`.
pub fn batch_gradients<R: AsRef<[f64]>>(
    net: &Network,
    inputs: &[&[R]],
    labels: &[usize],
    dropout: &[Option<Vec<f64>>],
    scale: f64,
    grads: &mut Gradients,
) -> Result<Vec<Vec<f64>>, NnError> {
    let bsz = inputs.len();
    let check = |what, expected, found| {
        if expected == found {
            Ok(())
        } else {
            Err(NnError::ShapeMismatch {
                what,
                expected,
                found,
            })
        }
    };
    check("labels", bsz, labels.len())?;
    check("dropout masks", bsz, dropout.len())?;
    if bsz == 0 {
        return Ok(Vec::new());
    }
    let (d, h, c) = (net.lstm.input_size(), net.hidden(), net.head.classes());
    let h4 = 4 * h;
    let steps = inputs[0].len();

    let mut xs = vec![0.0; steps * d * bsz];
    for (b, seq) in inputs.iter().enumerate() {
        check("sequence length", steps, seq.len())?;
        for (t, row) in seq.iter().enumerate() {
            let row = row.as_ref();
            check("input", d, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                xs[(t * d + j) * bsz + b] = v;
            }
        }
    }
    for (mask, &label) in dropout.iter().zip(labels) {
        if let Some(m) = mask {
            check("dropout mask", h, m.len())?;
        }
        if label >= c.max(2) {
            return Err(NnError::ShapeMismatch {
                what: "label",
                expected: c.max(2),
                found: label,
            });
        }
    }
    let x_at = |t: usize| View::new(&xs[t * d * bsz..], d, bsz);
    let hb = h * bsz;

    // hs[t] and cs[t] are the states entering step t.
    let mut hs = vec![0.0; (steps + 1) * hb];
    let mut cs = vec![0.0; (steps + 1) * hb];
    let mut gates = vec![0.0; steps * h4 * bsz];
    let mut tanh_c = vec![0.0; steps * hb];
    for t in 0..steps {
        let z = &mut gates[t * h4 * bsz..(t + 1) * h4 * bsz];
        for (r, row) in z.chunks_exact_mut(bsz).enumerate() {
            row.fill(net.lstm.b[r]);
        }
        gemm(1.0, net.lstm.w.view(), x_at(t), 1.0, z);
        gemm(
            1.0,
            net.lstm.u.view(),
            View::new(&hs[t * hb..], h, bsz),
            1.0,
            z,
        );
        let (ifo, g) = z.split_at_mut(3 * hb);
        ifo.iter_mut().for_each(|v| *v = sigmoid(*v));
        g.iter_mut().for_each(|v| *v = v.tanh());

        let (c_prev, c_next) = cs[t * hb..(t + 2) * hb].split_at_mut(hb);
        let (_, h_next) = hs[t * hb..(t + 2) * hb].split_at_mut(hb);
        let tc = &mut tanh_c[t * hb..(t + 1) * hb];
        for k in 0..hb {
            let (i, f, o, g) = (ifo[k], ifo[hb + k], ifo[2 * hb + k], g[k]);
            c_next[k] = f * c_prev[k] + i * g;
            tc[k] = c_next[k].tanh();
            h_next[k] = o * tc[k];
        }
    }

    // Head on the final hidden state after dropout.
    let mut h_out = hs[steps * hb..].to_vec();
    for (b, mask) in dropout.iter().enumerate() {
        if let Some(m) = mask {
            for u in 0..h {
                h_out[u * bsz + b] *= m[u];
            }
        }
    }
    let mut logits = vec![0.0; c * bsz];
    for (r, row) in logits.chunks_exact_mut(bsz).enumerate() {
        row.fill(net.head.b[r]);
    }
    gemm(
        1.0,
        net.head.w.view(),
        View::new(&h_out, h, bsz),
        1.0,
        &mut logits,
    );
    let probs: Vec<Vec<f64>> = (0..bsz)
        .map(|b| {
            let z: Vec<f64> = (0..c).map(|r| logits[r * bsz + b]).collect();
            if c == 1 {
                vec![sigmoid(z[0])]
            } else {
                softmax(&z)
            }
        })
        .collect();
    if probs.iter().flatten().any(|p| !p.is_finite()) || h_out.iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("batch forward pass".into()));
    }

    // d loss / d logits, zero where the probability clip is active.
    let mut dzh = vec![0.0; c * bsz];
    for (b, (p, &label)) in probs.iter().zip(labels).enumerate() {
        let target = |k: usize| {
            if c == 1 {
                label as f64
            } else {
                f64::from(u8::from(k == label))
            }
        };
        let watched = if c == 1 { p[0] } else { p[label] };
        if (PROB_CLIP..=1.0 - PROB_CLIP).contains(&watched) {
            for (k, &pk) in p.iter().enumerate() {
                dzh[k * bsz + b] = scale * (pk - target(k));
            }
        }
    }
    let h_out_view = View::new(&h_out, h, bsz);
    gemm(
        1.0,
        View::new(&dzh, c, bsz),
        h_out_view.t(),
        1.0,
        grads.head.w.as_mut_slice(),
    );
    for (gb, row) in grads.head.b.iter_mut().zip(dzh.chunks_exact(bsz)) {
        *gb += row.iter().sum::<f64>();
    }

    let mut dh = vec![0.0; hb];
    gemm(
        1.0,
        net.head.w.view().t(),
        View::new(&dzh, c, bsz),
        0.0,
        &mut dh,
    );
    for (b, mask) in dropout.iter().enumerate() {
        if let Some(m) = mask {
            for u in 0..h {
                dh[u * bsz + b] *= m[u];
            }
        }
    }

    let mut dc = vec![0.0; hb];
    let mut dz = vec![0.0; h4 * bsz];
    for t in (0..steps).rev() {
        let gt = &gates[t * h4 * bsz..(t + 1) * h4 * bsz];
        let tc = &tanh_c[t * hb..(t + 1) * hb];
        let c_prev = &cs[t * hb..(t + 1) * hb];
        for k in 0..hb {
            let (i, f, o, g) = (gt[k], gt[hb + k], gt[2 * hb + k], gt[3 * hb + k]);
            let d_o = dh[k] * tc[k];
            let dck = dc[k] + dh[k] * o * (1.0 - tc[k] * tc[k]);
            dc[k] = dck * f;
            dz[k] = dck * g * i * (1.0 - i);
            dz[hb + k] = dck * c_prev[k] * f * (1.0 - f);
            dz[2 * hb + k] = d_o * o * (1.0 - o);
            dz[3 * hb + k] = dck * i * (1.0 - g * g);
        }
        let dz_view = View::new(&dz, h4, bsz);
        gemm(1.0, dz_view, x_at(t).t(), 1.0, grads.lstm.w.as_mut_slice());
        gemm(
            1.0,
            dz_view,
            View::new(&hs[t * hb..], h, bsz).t(),
            1.0,
            grads.lstm.u.as_mut_slice(),
        );
        for (gb, row) in grads.lstm.b.iter_mut().zip(dz.chunks_exact(bsz)) {
            *gb += row.iter().sum::<f64>();
        }
        gemm(1.0, net.lstm.u.view().t(), dz_view, 0.0, &mut dh);
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn max_diff(a: &Network, b: &Network) -> f64 {
        a.slices()
            .iter()
            .zip(b.slices())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max)
    }

    fn agrees_with_per_example(classes: usize, with_dropout: bool) {
        let mut r = rng::seeded(31 + classes as u64);
        let (d, h, steps, bsz) = (11, 6, 5, 7);
        let net = Network::init(d, h, classes, &mut r);
        let seqs: Vec<Vec<Vec<f64>>> = (0..bsz)
            .map(|_| {
                (0..steps)
                    .map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect())
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = (0..bsz).map(|b| b % classes.max(2)).collect();
        let masks: Vec<Option<Vec<f64>>> = (0..bsz)
            .map(|_| {
                with_dropout.then(|| {
                    (0..h)
                        .map(|_| {
                            if r.random::<f64>() < 0.3 {
                                0.0
                            } else {
                                1.0 / 0.7
                            }
                        })
                        .collect()
                })
            })
            .collect();
        let scale = 1.0 / bsz as f64;

        let mut want = net.zeros_like();
        let mut want_probs = Vec::new();
        for b in 0..bsz {
            let (p, cache) = net.forward(&seqs[b], masks[b].as_deref()).unwrap();
            net.accumulate_gradients(&cache, labels[b], scale, &mut want);
            want_probs.push(p);
        }
        let refs: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
        let mut got = net.zeros_like();
        let probs = batch_gradients(&net, &refs, &labels, &masks, scale, &mut got).unwrap();
        for (p, q) in probs.iter().flatten().zip(want_probs.iter().flatten()) {
            assert!((p - q).abs() < 1e-14);
        }
        assert!(
            max_diff(&got, &want) < 1e-14,
            "diff {}",
            max_diff(&got, &want)
        );
    }

    #[test]
    fn binary_batch_matches_sum_of_examples() {
        agrees_with_per_example(1, false);
        agrees_with_per_example(1, true);
    }

    #[test]
    fn multiclass_batch_matches_sum_of_examples() {
        agrees_with_per_example(4, false);
        agrees_with_per_example(4, true);
    }

    #[test]
    fn ragged_batch_rejected() {
        let net = Network::zeros(2, 3, 1);
        let a = vec![vec![0.0; 2]; 3];
        let b = vec![vec![0.0; 2]; 4];
        let mut g = net.zeros_like();
        let r = batch_gradients(&net, &[&a[..], &b[..]], &[0, 1], &[None, None], 1.0, &mut g);
        assert!(matches!(r, Err(NnError::ShapeMismatch { .. })));
    }
}
