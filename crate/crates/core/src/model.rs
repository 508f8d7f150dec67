//! Shallow network forward/backward passes, losses, classification error,
//! the paired multilayer extension, and the synthetic blob dataset used by
//! the experiment harness.
//!
//! A shallow block computes `V^T sigma(W x)` with no biases. Batch
//! gradients are accumulated in fixed-size row chunks that are folded in a
//! fixed order, so results are bit-identical whether or not the chunk map
//! runs in parallel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};
use crate::par;
use crate::pathnorm::{path_norm_1, ShallowParams};
use crate::prox_multi::prox_full;

/// Smooth activations with derivative in `[0, 1]`. `Identity` violates that
/// range only trivially (derivative exactly 1) and is intended for tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Elu,
    Softplus,
    Identity,
}

impl ActivationKind {
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            ActivationKind::Elu => {
                if z > 0.0 {
                    z
                } else {
                    z.exp() - 1.0
                }
            }
            ActivationKind::Softplus => {
                // max(z, 0) + ln(1 + exp(-|z|)) avoids overflow
                z.max(0.0) + (-z.abs()).exp().ln_1p()
            }
            ActivationKind::Identity => z,
        }
    }

    #[inline]
    pub fn deriv(self, z: f64) -> f64 {
        match self {
            ActivationKind::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    z.exp()
                }
            }
            ActivationKind::Softplus => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            ActivationKind::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    CrossEntropy,
    Squared,
}

/// A batch of inputs with integer class labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: DenseMatrix,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: DenseMatrix, labels: Vec<usize>) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return Err(Error::LengthMismatch { expected: inputs.rows(), got: labels.len() });
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of classes implied by the labels (`max + 1`).
    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        let mut inputs = DenseMatrix::zeros(idx.len(), self.inputs.cols());
        let mut labels = Vec::with_capacity(idx.len());
        for (r, &i) in idx.iter().enumerate() {
            inputs.row_mut(r).copy_from_slice(self.inputs.row(i));
            labels.push(self.labels[i]);
        }
        Batch { inputs, labels }
    }
}

/// `V^T sigma(W x)`.
pub fn forward(params: &ShallowParams, act: ActivationKind, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), params.input_dim(), "input length mismatch");
    let n = params.hidden_dim();
    let p = params.output_dim();
    let mut out = vec![0.0; p];
    for i in 0..n {
        let z: f64 = params.w.row(i).iter().zip(x).map(|(w, xi)| w * xi).sum();
        let a = act.eval(z);
        if a == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o += params.v.get(i, k) * a;
        }
    }
    out
}

/// Regression target for the squared loss: one-hot for multi-output nets,
/// the raw class id for single-output nets (so a zero output against label
/// zero is a perfect fit).
fn squared_target(label: usize, p: usize) -> Vec<f64> {
    if p == 1 {
        vec![label as f64]
    } else {
        let mut t = vec![0.0; p];
        t[label] = 1.0;
        t
    }
}

/// Loss of one sample and its gradient with respect to the logits.
fn loss_and_dlogits(out: &[f64], label: usize, loss: LossKind) -> (f64, Vec<f64>) {
    match loss {
        LossKind::CrossEntropy => {
            let maxv = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = out.iter().map(|o| (o - maxv).exp()).collect();
            let z: f64 = exps.iter().sum();
            let loss = z.ln() + maxv - out[label];
            let mut d: Vec<f64> = exps.iter().map(|e| e / z).collect();
            d[label] -= 1.0;
            (loss, d)
        }
        LossKind::Squared => {
            let t = squared_target(label, out.len());
            let d: Vec<f64> = out.iter().zip(&t).map(|(o, ti)| o - ti).collect();
            let loss = 0.5 * d.iter().map(|e| e * e).sum::<f64>();
            (loss, d)
        }
    }
}

// Rows per chunk for deterministic batch reduction. Chunk results are folded
// in index order, so the summation tree is the same in parallel and
// sequential builds.
const GRAD_CHUNK: usize = 16;

/// Mean loss over the batch and exact gradients with respect to `V` and `W`.
pub fn loss_and_grad(
    params: &ShallowParams,
    act: ActivationKind,
    batch: &Batch,
    loss: LossKind,
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    let p = params.output_dim();
    let n = params.hidden_dim();
    let m = params.input_dim();
    if batch.inputs.cols() != m {
        return Err(Error::Shape(format!(
            "batch has {} features, network expects {m}",
            batch.inputs.cols()
        )));
    }
    for &label in &batch.labels {
        if label >= p {
            return Err(Error::LabelOutOfRange { label, classes: p });
        }
    }
    let b = batch.len();
    if b == 0 {
        return Ok((0.0, DenseMatrix::zeros(n, p), DenseMatrix::zeros(n, m)));
    }

    let chunks = b.div_ceil(GRAD_CHUNK);
    let partials = par::map_indexed(chunks, |c| {
        let lo = c * GRAD_CHUNK;
        let hi = ((c + 1) * GRAD_CHUNK).min(b);
        let mut loss_sum = 0.0;
        let mut gv = DenseMatrix::zeros(n, p);
        let mut gw = DenseMatrix::zeros(n, m);
        let mut z = vec![0.0; n];
        let mut a = vec![0.0; n];
        for r in lo..hi {
            let x = batch.inputs.row(r);
            for (i, (zi, ai)) in z.iter_mut().zip(&mut a).enumerate() {
                *zi = params.w.row(i).iter().zip(x).map(|(w, xi)| w * xi).sum();
                *ai = act.eval(*zi);
            }
            let mut out = vec![0.0; p];
            for (i, ai) in a.iter().enumerate() {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += params.v.get(i, k) * ai;
                }
            }
            let (l, d) = loss_and_dlogits(&out, batch.labels[r], loss);
            loss_sum += l;
            for i in 0..n {
                let gvrow = gv.row_mut(i);
                let mut back = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    gvrow[k] += a[i] * dk;
                    back += params.v.get(i, k) * dk;
                }
                let dz = back * act.deriv(z[i]);
                if dz != 0.0 {
                    let gwrow = gw.row_mut(i);
                    for (j, xj) in x.iter().enumerate() {
                        gwrow[j] += dz * xj;
                    }
                }
            }
        }
        (loss_sum, gv, gw)
    });

    let mut loss_sum = 0.0;
    let mut gv = DenseMatrix::zeros(n, p);
    let mut gw = DenseMatrix::zeros(n, m);
    for (ls, pv, pw) in partials {
        loss_sum += ls;
        for (t, s) in gv.as_mut_slice().iter_mut().zip(pv.as_slice()) {
            *t += s;
        }
        for (t, s) in gw.as_mut_slice().iter_mut().zip(pw.as_slice()) {
            *t += s;
        }
    }
    let scale = 1.0 / b as f64;
    loss_sum *= scale;
    for t in gv.as_mut_slice() {
        *t *= scale;
    }
    for t in gw.as_mut_slice() {
        *t *= scale;
    }
    Ok((loss_sum, gv, gw))
}

/// Cross-entropy of one sample and its gradient with respect to the input;
/// used by the PGD attack.
pub fn loss_and_input_grad(
    params: &ShallowParams,
    act: ActivationKind,
    x: &[f64],
    label: usize,
) -> Result<(f64, Vec<f64>)> {
    let p = params.output_dim();
    if label >= p {
        return Err(Error::LabelOutOfRange { label, classes: p });
    }
    let n = params.hidden_dim();
    let mut z = vec![0.0; n];
    let mut a = vec![0.0; n];
    for (i, (zi, ai)) in z.iter_mut().zip(&mut a).enumerate() {
        *zi = params.w.row(i).iter().zip(x).map(|(w, xi)| w * xi).sum();
        *ai = act.eval(*zi);
    }
    let mut out = vec![0.0; p];
    for (i, ai) in a.iter().enumerate() {
        for (k, o) in out.iter_mut().enumerate() {
            *o += params.v.get(i, k) * ai;
        }
    }
    let (loss, d) = loss_and_dlogits(&out, label, LossKind::CrossEntropy);
    let mut gx = vec![0.0; x.len()];
    for (i, zi) in z.iter().enumerate() {
        let mut back = 0.0;
        for (k, dk) in d.iter().enumerate() {
            back += params.v.get(i, k) * dk;
        }
        let dz = back * act.deriv(*zi);
        if dz != 0.0 {
            for (j, g) in gx.iter_mut().enumerate() {
                *g += dz * params.w.get(i, j);
            }
        }
    }
    Ok((loss, gx))
}

/// Argmax class with ties broken toward the smaller index.
pub fn predict(params: &ShallowParams, act: ActivationKind, x: &[f64]) -> usize {
    let out = forward(params, act, x);
    let mut best = 0;
    for (k, o) in out.iter().enumerate() {
        if *o > out[best] {
            best = k;
        }
    }
    best
}

/// Fraction of misclassified samples.
pub fn classification_error(params: &ShallowParams, act: ActivationKind, batch: &Batch) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let wrong: usize = par::map_indexed(batch.len(), |r| {
        usize::from(predict(params, act, batch.inputs.row(r)) != batch.labels[r])
    })
    .into_iter()
    .sum();
    wrong as f64 / batch.len() as f64
}

/// Chain of shallow blocks applied with the activation between blocks; block
/// `l`'s output dimension must equal block `l+1`'s input dimension.
#[derive(Debug, Clone)]
pub struct MultilayerParams {
    blocks: Vec<ShallowParams>,
}

impl MultilayerParams {
    pub fn new(blocks: Vec<ShallowParams>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParam("multilayer network needs at least one block".into()));
        }
        for pair in blocks.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::Shape(format!(
                    "block output dim {} does not chain into next input dim {}",
                    pair[0].output_dim(),
                    pair[1].input_dim()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[ShallowParams] {
        &self.blocks
    }
}

pub fn multilayer_forward(params: &MultilayerParams, act: ActivationKind, x: &[f64]) -> Vec<f64> {
    let mut cur = forward(&params.blocks[0], act, x);
    for block in &params.blocks[1..] {
        for t in &mut cur {
            *t = act.eval(*t);
        }
        cur = forward(block, act, &cur);
    }
    cur
}

/// Sum of per-block 1-path-norms.
pub fn multilayer_reg(params: &MultilayerParams) -> f64 {
    params.blocks.iter().map(path_norm_1).sum()
}

/// Block-separable proximal mapping: the multi-output prox applied to each
/// block independently.
pub fn multilayer_prox(params: &MultilayerParams, lam: f64) -> Result<MultilayerParams> {
    let blocks = params
        .blocks
        .iter()
        .map(|b| {
            let (v, w) = prox_full(&b.v, &b.w, lam)?;
            ShallowParams::new(v, w)
        })
        .collect::<Result<Vec<_>>>()?;
    MultilayerParams::new(blocks)
}

/// Seeded two-class Gaussian blob dataset in `[0, 1]^m`: the first four
/// features (or all of them when `m < 4`) carry the class signal, the rest
/// are shared noise. Labels alternate so classes are balanced.
pub fn synthetic_blobs(samples: usize, features: usize, seed: u64) -> Batch {
    let informative = features.min(4);
    let sigma = 0.15;
    let mut rng = Rng::new(seed);
    let mut inputs = DenseMatrix::zeros(samples, features);
    let mut labels = Vec::with_capacity(samples);
    for r in 0..samples {
        let class = r % 2;
        let row = inputs.row_mut(r);
        for (j, t) in row.iter_mut().enumerate() {
            let mean = if j < informative {
                if class == 0 {
                    0.35
                } else {
                    0.65
                }
            } else {
                0.5
            };
            *t = (mean + sigma * rng.normal()).clamp(0.0, 1.0);
        }
        labels.push(class);
    }
    Batch { inputs, labels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn params(v: &[Vec<f64>], w: &[Vec<f64>]) -> ShallowParams {
        ShallowParams::new(
            DenseMatrix::from_rows(v).unwrap(),
            DenseMatrix::from_rows(w).unwrap(),
        )
        .unwrap()
    }

    fn random_params(rng: &mut Rng, n: usize, m: usize, p: usize) -> ShallowParams {
        let v = DenseMatrix::from_vec(n, p, (0..n * p).map(|_| rng.normal()).collect()).unwrap();
        let w = DenseMatrix::from_vec(n, m, (0..n * m).map(|_| rng.normal()).collect()).unwrap();
        ShallowParams::new(v, w).unwrap()
    }

    #[test]
    fn activation_derivative_ranges() {
        for i in 0..=2000 {
            let z = -50.0 + i as f64 * 0.05;
            let de = ActivationKind::Elu.deriv(z);
            assert!(de > 0.0 && de <= 1.0, "elu'({z}) = {de}");
            let ds = ActivationKind::Softplus.deriv(z);
            assert!(ds > 0.0 && ds <= 1.0, "softplus'({z}) = {ds}");
            // strict upper bound where 1 - sigmoid(z) is representable in f64
            if z <= 36.0 {
                assert!(ds < 1.0, "softplus'({z}) = {ds}");
            }
        }
        assert_eq!(ActivationKind::Elu.eval(0.0), 0.0);
        assert_eq!(ActivationKind::Elu.deriv(0.0), 1.0);
    }

    #[test]
    fn forward_zero_w_gives_zero_output() {
        let p = params(&[vec![1.0, 2.0], vec![-1.0, 0.5]], &[vec![0.0; 3], vec![0.0; 3]]);
        let out = forward(&p, ActivationKind::Elu, &[0.3, -0.7, 1.0]);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // deliberately index-based oracle
    fn forward_identity_is_matrix_chain() {
        let mut rng = Rng::new(4);
        let sp = random_params(&mut rng, 3, 2, 2);
        let x = vec![rng.normal(), rng.normal()];
        let out = forward(&sp, ActivationKind::Identity, &x);
        // V^T (W x) via explicit matrices
        let xm = DenseMatrix::from_vec(2, 1, x).unwrap();
        let wx = crate::numerics::matmul(&sp.w, &xm).unwrap();
        let vt = sp.v.transpose();
        let expect = crate::numerics::matmul(&vt, &wx).unwrap();
        for k in 0..2 {
            assert!((out[k] - expect.get(k, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_naive_recomputation() {
        let mut rng = Rng::new(8);
        let sp = random_params(&mut rng, 4, 3, 2);
        let x = vec![rng.normal(), rng.normal(), rng.normal()];
        let out = forward(&sp, ActivationKind::Elu, &x);
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..4 {
                let mut z = 0.0;
                for j in 0..3 {
                    z += sp.w.get(i, j) * x[j];
                }
                acc += sp.v.get(i, k) * ActivationKind::Elu.eval(z);
            }
            assert!((out[k] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_net_squared_loss_on_zero_targets() {
        let p = params(&[vec![0.0]], &[vec![0.0, 0.0]]);
        let batch = Batch::new(
            DenseMatrix::from_rows(&[vec![0.4, 0.6], vec![0.1, 0.9]]).unwrap(),
            vec![0, 0],
        )
        .unwrap();
        let (loss, gv, gw) = loss_and_grad(&p, ActivationKind::Elu, &batch, LossKind::Squared).unwrap();
        assert_eq!(loss, 0.0);
        assert!(gv.as_slice().iter().all(|t| *t == 0.0));
        assert!(gw.as_slice().iter().all(|t| *t == 0.0));
    }

    #[test]
    fn uniform_logits_cross_entropy_is_ln_p() {
        // zero weights give uniform logits over p classes
        let p = 5;
        let sp = ShallowParams::new(DenseMatrix::zeros(3, p), DenseMatrix::zeros(3, 2)).unwrap();
        let batch =
            Batch::new(DenseMatrix::from_rows(&[vec![0.2, 0.8]]).unwrap(), vec![3]).unwrap();
        let (loss, _, _) =
            loss_and_grad(&sp, ActivationKind::Elu, &batch, LossKind::CrossEntropy).unwrap();
        assert!((loss - (p as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range_rejected() {
        let sp = ShallowParams::new(DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 2)).unwrap();
        let batch = Batch::new(DenseMatrix::zeros(1, 2), vec![2]).unwrap();
        assert!(matches!(
            loss_and_grad(&sp, ActivationKind::Elu, &batch, LossKind::CrossEntropy),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    /// Central finite differences over every weight.
    fn finite_diff_grads(
        sp: &ShallowParams,
        act: ActivationKind,
        batch: &Batch,
        loss: LossKind,
        h: f64,
    ) -> (DenseMatrix, DenseMatrix) {
        let eval = |sp: &ShallowParams| loss_and_grad(sp, act, batch, loss).unwrap().0;
        let mut gv = DenseMatrix::zeros(sp.hidden_dim(), sp.output_dim());
        let mut gw = DenseMatrix::zeros(sp.hidden_dim(), sp.input_dim());
        for i in 0..sp.hidden_dim() {
            for k in 0..sp.output_dim() {
                let mut plus = sp.clone();
                plus.v.set(i, k, sp.v.get(i, k) + h);
                let mut minus = sp.clone();
                minus.v.set(i, k, sp.v.get(i, k) - h);
                gv.set(i, k, (eval(&plus) - eval(&minus)) / (2.0 * h));
            }
            for j in 0..sp.input_dim() {
                let mut plus = sp.clone();
                plus.w.set(i, j, sp.w.get(i, j) + h);
                let mut minus = sp.clone();
                minus.w.set(i, j, sp.w.get(i, j) - h);
                gw.set(i, j, (eval(&plus) - eval(&minus)) / (2.0 * h));
            }
        }
        (gv, gw)
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = Rng::new(17);
        for trial in 0..20 {
            let n = 1 + rng.below(4);
            let m = 1 + rng.below(4);
            let p = 1 + rng.below(3);
            let sp = random_params(&mut rng, n, m, p);
            let b = 1 + rng.below(3);
            let mut inputs = DenseMatrix::zeros(b, m);
            for r in 0..b {
                for j in 0..m {
                    inputs.set(r, j, rng.normal());
                }
            }
            let labels: Vec<usize> = (0..b).map(|_| rng.below(p)).collect();
            let batch = Batch::new(inputs, labels).unwrap();
            let loss = if trial % 2 == 0 { LossKind::CrossEntropy } else { LossKind::Squared };
            let act = match trial % 3 {
                0 => ActivationKind::Elu,
                1 => ActivationKind::Softplus,
                _ => ActivationKind::Identity,
            };
            let (_, gv, gw) = loss_and_grad(&sp, act, &batch, loss).unwrap();
            let (fv, fw) = finite_diff_grads(&sp, act, &batch, loss, 1e-5);
            for (a, f) in gv.as_slice().iter().zip(fv.as_slice()) {
                assert!((a - f).abs() <= 1e-5 * f.abs().max(1.0), "gv {a} vs {f}");
            }
            for (a, f) in gw.as_slice().iter().zip(fw.as_slice()) {
                assert!((a - f).abs() <= 1e-5 * f.abs().max(1.0), "gw {a} vs {f}");
            }
        }
    }

    #[test]
    fn input_gradient_matches_central_differences() {
        let mut rng = Rng::new(23);
        let sp = random_params(&mut rng, 4, 3, 3);
        let x = vec![rng.normal(), rng.normal(), rng.normal()];
        let (_, g) = loss_and_input_grad(&sp, ActivationKind::Elu, &x, 1).unwrap();
        let h = 1e-5;
        for j in 0..3 {
            let mut plus = x.clone();
            plus[j] += h;
            let mut minus = x.clone();
            minus[j] -= h;
            let fd = (loss_and_input_grad(&sp, ActivationKind::Elu, &plus, 1).unwrap().0
                - loss_and_input_grad(&sp, ActivationKind::Elu, &minus, 1).unwrap().0)
                / (2.0 * h);
            assert!((g[j] - fd).abs() <= 1e-5 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn multilayer_single_block_reduces_to_forward() {
        let mut rng = Rng::new(31);
        let sp = random_params(&mut rng, 3, 2, 2);
        let ml = MultilayerParams::new(vec![sp.clone()]).unwrap();
        let x = vec![0.2, -0.4];
        assert_eq!(multilayer_forward(&ml, ActivationKind::Elu, &x), forward(&sp, ActivationKind::Elu, &x));
        assert_eq!(multilayer_reg(&ml), path_norm_1(&sp));
    }

    #[test]
    fn multilayer_identity_blocks_are_matrix_products() {
        let mut rng = Rng::new(37);
        let b1 = random_params(&mut rng, 3, 2, 4);
        let b2 = random_params(&mut rng, 2, 4, 3);
        let ml = MultilayerParams::new(vec![b1.clone(), b2.clone()]).unwrap();
        let x = vec![rng.normal(), rng.normal()];
        let out = multilayer_forward(&ml, ActivationKind::Identity, &x);
        let mid = forward(&b1, ActivationKind::Identity, &x);
        let expect = forward(&b2, ActivationKind::Identity, &mid);
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multilayer_two_block_forward_matches_naive() {
        let mut rng = Rng::new(41);
        let b1 = random_params(&mut rng, 3, 2, 4);
        let b2 = random_params(&mut rng, 2, 4, 3);
        let ml = MultilayerParams::new(vec![b1.clone(), b2.clone()]).unwrap();
        let x = vec![rng.normal(), rng.normal()];
        let out = multilayer_forward(&ml, ActivationKind::Elu, &x);
        let mid: Vec<f64> = forward(&b1, ActivationKind::Elu, &x)
            .into_iter()
            .map(|t| ActivationKind::Elu.eval(t))
            .collect();
        let expect = forward(&b2, ActivationKind::Elu, &mid);
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        // two known blocks: reg is the sum of per-block path norms
        assert!((multilayer_reg(&ml) - (path_norm_1(&b1) + path_norm_1(&b2))).abs() < 1e-12);
    }

    #[test]
    fn multilayer_rejects_bad_chaining() {
        let mut rng = Rng::new(43);
        let b1 = random_params(&mut rng, 3, 2, 4);
        let b2 = random_params(&mut rng, 2, 5, 3);
        assert!(MultilayerParams::new(vec![b1, b2]).is_err());
        assert!(MultilayerParams::new(vec![]).is_err());
    }

    #[test]
    fn multilayer_prox_is_blockwise() {
        let mut rng = Rng::new(47);
        let b1 = random_params(&mut rng, 3, 2, 4);
        let b2 = random_params(&mut rng, 2, 4, 3);
        let ml = MultilayerParams::new(vec![b1.clone(), b2.clone()]).unwrap();
        let lam = 0.3;
        let out = multilayer_prox(&ml, lam).unwrap();
        for (got, orig) in out.blocks().iter().zip([&b1, &b2]) {
            let (ev, ew) = prox_full(&orig.v, &orig.w, lam).unwrap();
            assert_eq!(got.v, ev);
            assert_eq!(got.w, ew);
        }
        // lam = 0 is the identity
        let id = multilayer_prox(&ml, 0.0).unwrap();
        assert_eq!(id.blocks()[0].v, b1.v);
        assert_eq!(id.blocks()[1].w, b2.w);
    }

    #[test]
    fn blobs_are_seeded_and_in_range() {
        let a = synthetic_blobs(100, 20, 9);
        let b = synthetic_blobs(100, 20, 9);
        assert_eq!(a.inputs.as_slice(), b.inputs.as_slice());
        assert_eq!(a.labels, b.labels);
        assert!(a.inputs.as_slice().iter().all(|t| (0.0..=1.0).contains(t)));
        assert_eq!(a.num_classes(), 2);
        let c = synthetic_blobs(100, 20, 10);
        assert_ne!(a.inputs.as_slice(), c.inputs.as_slice());
    }
}
