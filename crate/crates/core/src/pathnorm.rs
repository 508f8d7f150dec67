//! The 1-path-norm of a shallow block, the layer-wise operator-norm product
//! bound, and sampled Lipschitz-ratio lower estimates.
//!
//! For weights `V` (n x p) and `W` (n x m) the 1-path-norm is the sum over
//! all input->hidden->output paths of the absolute product of the two
//! weights on the path. It upper-bounds the Lipschitz constant of
//! `x -> V^T sigma(W x)` from the l-infinity norm on inputs to the l1 norm
//! on outputs whenever `sigma` has derivative in `[0, 1]`, and is itself
//! never larger than the product of the layer operator norms.

use crate::error::{Error, Result};
use crate::model::ActivationKind;
use crate::numerics::{DenseMatrix, Rng};
use crate::par;

/// Weight pair of one shallow block: `v` maps hidden to output (n x p
/// stored, applied transposed), `w` maps input to hidden (n x m). Row `i`
/// of both matrices belongs to hidden neuron `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShallowParams {
    pub v: DenseMatrix,
    pub w: DenseMatrix,
}

impl ShallowParams {
    pub fn new(v: DenseMatrix, w: DenseMatrix) -> Result<Self> {
        if v.rows() != w.rows() {
            return Err(Error::Shape(format!(
                "hidden dimension mismatch: V has {} rows, W has {}",
                v.rows(),
                w.rows()
            )));
        }
        Ok(Self { v, w })
    }

    pub fn hidden_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.v.cols()
    }

    /// Fraction of weight entries (over both matrices) that are not exactly
    /// zero.
    pub fn nonzero_fraction(&self) -> f64 {
        let total = self.v.as_slice().len() + self.w.as_slice().len();
        if total == 0 {
            return 0.0;
        }
        let nnz = self
            .v
            .as_slice()
            .iter()
            .chain(self.w.as_slice())
            .filter(|t| **t != 0.0)
            .count();
        nnz as f64 / total as f64
    }
}

/// Lipschitz-bound summary for one shallow block. `empirical_ratio_max` is a
/// sampled lower estimate of the true constant, so up to numerical noise
/// `empirical_ratio_max <= path_norm <= product_bound`.
#[derive(Debug, Clone)]
pub struct LipschitzReport {
    pub path_norm: f64,
    pub product_bound: f64,
    pub empirical_ratio_max: f64,
    pub samples: usize,
}

/// 1-path-norm, computed in factored form `sum_i (sum_j |W_ij|) (sum_k |V_ik|)`,
/// which equals the triple sum over paths exactly.
pub fn path_norm_1(params: &ShallowParams) -> f64 {
    let n = params.hidden_dim();
    let mut acc = 0.0;
    for i in 0..n {
        let wsum: f64 = params.w.row(i).iter().map(|t| t.abs()).sum();
        let vsum: f64 = params.v.row(i).iter().map(|t| t.abs()).sum();
        acc += wsum * vsum;
    }
    acc
}

/// Product of layer operator norms: the sum of column l1 norms of `V`
/// (operator norm of `V^T` from l-infinity to l1) times the maximum row l1
/// norm of `W` (its l-infinity operator norm).
pub fn product_bound(params: &ShallowParams) -> f64 {
    let mut colsum = 0.0;
    for k in 0..params.output_dim() {
        let mut c = 0.0;
        for i in 0..params.hidden_dim() {
            c += params.v.get(i, k).abs();
        }
        colsum += c;
    }
    let mut wmax: f64 = 0.0;
    for i in 0..params.hidden_dim() {
        let r: f64 = params.w.row(i).iter().map(|t| t.abs()).sum();
        wmax = wmax.max(r);
    }
    colsum * wmax
}

/// Maximum of `||h(x) - h(u)||_1 / ||x - u||_inf` over `samples` pairs drawn
/// uniformly from the box `[lo, hi]^m`. Degenerate pairs with `x == u` are
/// skipped.
pub fn empirical_lipschitz_ratio_in(
    params: &ShallowParams,
    act: ActivationKind,
    rng: &mut Rng,
    samples: usize,
    lo: f64,
    hi: f64,
) -> f64 {
    let m = params.input_dim();
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x: Vec<f64> = (0..m).map(|_| rng.range(lo, hi)).collect();
        let u: Vec<f64> = (0..m).map(|_| rng.range(lo, hi)).collect();
        pairs.push((x, u));
    }
    let ratios = par::map_indexed(pairs.len(), |i| {
        let (x, u) = &pairs[i];
        let dinf = x
            .iter()
            .zip(u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        if dinf == 0.0 {
            return 0.0;
        }
        let hx = crate::model::forward(params, act, x);
        let hu = crate::model::forward(params, act, u);
        let d1: f64 = hx.iter().zip(&hu).map(|(a, b)| (a - b).abs()).sum();
        d1 / dinf
    });
    ratios.into_iter().fold(0.0, f64::max)
}

/// [`empirical_lipschitz_ratio_in`] on the default box `[-1, 1]^m`.
pub fn empirical_lipschitz_ratio(
    params: &ShallowParams,
    act: ActivationKind,
    rng: &mut Rng,
    samples: usize,
) -> f64 {
    empirical_lipschitz_ratio_in(params, act, rng, samples, -1.0, 1.0)
}

pub fn lipschitz_report(
    params: &ShallowParams,
    act: ActivationKind,
    rng: &mut Rng,
    samples: usize,
) -> LipschitzReport {
    LipschitzReport {
        path_norm: path_norm_1(params),
        product_bound: product_bound(params),
        empirical_ratio_max: empirical_lipschitz_ratio(params, act, rng, samples),
        samples,
    }
}
