//! Proximal-gradient training loop, its stochastic minibatch variant, a
//! subgradient-descent baseline, and the descent diagnostics a constant
//! step size `eta < 1/L` guarantees: monotone objective decrease, the
//! per-step sufficient-decrease inequality
//! `F(z_k) - F(z_{k+1}) >= ((1 - eta L) / (2 eta)) ||z_{k+1} - z_k||^2`,
//! and the `min_k ||z_{k+1} - z_k||` bound in terms of the initial gap.

use serde::Serialize;

use crate::baselines::{project_linf_opnorm, soft_threshold, ParsevalConstraint};
use crate::error::{Error, Result};
use crate::model::{classification_error, loss_and_grad, ActivationKind, Batch, LossKind};
use crate::numerics::{DenseMatrix, Rng};
use crate::pathnorm::{path_norm_1, ShallowParams};
use crate::prox_multi::prox_full;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    None,
    L1,
    PathNorm,
    Parseval,
}

/// How the regularizer is treated during training: through its exact
/// proximal operator, or folded into the gradient step via its
/// almost-everywhere gradient (zero at kinks), which is what plain
/// autodiff-based SGD does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Prox,
    Subgradient,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub reg: Regularizer,
    pub lambda: f64,
    pub step: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub act: ActivationKind,
    pub hidden: usize,
    pub method: Method,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step.is_nan() || self.step <= 0.0 {
            return Err(Error::InvalidParam(format!("step must be positive, got {}", self.step)));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::InvalidParam(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if self.reg == Regularizer::Parseval && self.lambda <= 0.0 {
            return Err(Error::InvalidParam(
                "parseval constraint needs lambda > 0 (radius 1/lambda)".into(),
            ));
        }
        if self.batch == 0 {
            return Err(Error::InvalidParam("batch size must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidParam("hidden width must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iterate of the deterministic loop. `objective = smooth + lambda * reg`
/// holds exactly by construction; `displacement` is the l2 distance to the
/// next iterate (zero on the terminal record).
#[derive(Debug, Clone, Serialize)]
pub struct IterateRecord {
    pub k: usize,
    pub objective: f64,
    pub smooth: f64,
    pub reg: f64,
    pub displacement: f64,
}

/// Per-epoch summary of a stochastic run. `objective` is the mean of the
/// minibatch objectives seen during the epoch; `nnz_fraction` counts exact
/// zeros only.
#[derive(Debug, Clone, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub objective: f64,
    pub reg_value: f64,
    pub nnz_fraction: f64,
    pub clean_error: f64,
    pub robust_error: Option<f64>,
}

/// Smooth part of the objective: value and gradients at the given weights.
pub trait SmoothObjective {
    fn eval(&self, params: &ShallowParams) -> Result<(f64, DenseMatrix, DenseMatrix)>;
}

/// `f(V, W) = 0.5 ||V - A||_F^2 + 0.5 ||W - B||_F^2`, the test objective
/// with gradient Lipschitz constant exactly 1.
pub struct Quadratic {
    pub target: ShallowParams,
}

impl SmoothObjective for Quadratic {
    fn eval(&self, params: &ShallowParams) -> Result<(f64, DenseMatrix, DenseMatrix)> {
        let mut gv = params.v.clone();
        let mut f = 0.0;
        for (t, a) in gv.as_mut_slice().iter_mut().zip(self.target.v.as_slice()) {
            *t -= a;
            f += 0.5 * *t * *t;
        }
        let mut gw = params.w.clone();
        for (t, b) in gw.as_mut_slice().iter_mut().zip(self.target.w.as_slice()) {
            *t -= b;
            f += 0.5 * *t * *t;
        }
        Ok((f, gv, gw))
    }
}

/// Full-batch empirical risk of a network on a fixed batch.
pub struct EmpiricalRisk<'a> {
    pub batch: &'a Batch,
    pub act: ActivationKind,
    pub loss: LossKind,
}

impl SmoothObjective for EmpiricalRisk<'_> {
    fn eval(&self, params: &ShallowParams) -> Result<(f64, DenseMatrix, DenseMatrix)> {
        loss_and_grad(params, self.act, self.batch, self.loss)
    }
}

/// Unweighted regularizer value `g`; constraints contribute zero.
pub fn regularizer_value(reg: Regularizer, params: &ShallowParams) -> f64 {
    match reg {
        Regularizer::None | Regularizer::Parseval => 0.0,
        Regularizer::L1 => {
            params.v.as_slice().iter().map(|t| t.abs()).sum::<f64>()
                + params.w.as_slice().iter().map(|t| t.abs()).sum::<f64>()
        }
        Regularizer::PathNorm => path_norm_1(params),
    }
}

fn gradient_step(params: &ShallowParams, grad_v: &DenseMatrix, grad_w: &DenseMatrix, eta: f64) -> (DenseMatrix, DenseMatrix) {
    let mut zv = params.v.clone();
    for (t, g) in zv.as_mut_slice().iter_mut().zip(grad_v.as_slice()) {
        *t -= eta * g;
    }
    let mut zw = params.w.clone();
    for (t, g) in zw.as_mut_slice().iter_mut().zip(grad_w.as_slice()) {
        *t -= eta * g;
    }
    (zv, zw)
}

/// One proximal-gradient step: gradient step with `cfg.step`, then the
/// regularizer's operator with effective coefficient `step * lambda`
/// (projection for the Parseval constraint, identity for `None`).
pub fn prox_grad_step(
    params: &ShallowParams,
    grad_v: &DenseMatrix,
    grad_w: &DenseMatrix,
    cfg: &TrainConfig,
) -> Result<ShallowParams> {
    let (zv, zw) = gradient_step(params, grad_v, grad_w, cfg.step);
    match cfg.reg {
        Regularizer::None => ShallowParams::new(zv, zw),
        Regularizer::PathNorm => {
            let (v, w) = prox_full(&zv, &zw, cfg.step * cfg.lambda)?;
            ShallowParams::new(v, w)
        }
        Regularizer::L1 => {
            let tau = cfg.step * cfg.lambda;
            let v = DenseMatrix::from_vec(zv.rows(), zv.cols(), soft_threshold(zv.as_slice(), tau))
                .expect("soft threshold preserves finiteness");
            let w = DenseMatrix::from_vec(zw.rows(), zw.cols(), soft_threshold(zw.as_slice(), tau))
                .expect("soft threshold preserves finiteness");
            ShallowParams::new(v, w)
        }
        Regularizer::Parseval => {
            let c = ParsevalConstraint::new(1.0 / cfg.lambda);
            // W is applied as stored, V transposed; both layers get their
            // applied rows constrained.
            let w = project_linf_opnorm(&zw, &c);
            let v = project_linf_opnorm(&zv.transpose(), &c).transpose();
            ShallowParams::new(v, w)
        }
    }
}

/// Plain (sub)gradient step on `f + lambda * g` using the almost-everywhere
/// gradient of `g`; the Parseval constraint is still enforced by projection
/// since it has no gradient.
fn subgradient_step(
    params: &ShallowParams,
    grad_v: &DenseMatrix,
    grad_w: &DenseMatrix,
    cfg: &TrainConfig,
) -> Result<ShallowParams> {
    let mut gv = grad_v.clone();
    let mut gw = grad_w.clone();
    match cfg.reg {
        Regularizer::None | Regularizer::Parseval => {}
        Regularizer::L1 => {
            for (g, t) in gv.as_mut_slice().iter_mut().zip(params.v.as_slice()) {
                *g += cfg.lambda * subgrad_abs(*t);
            }
            for (g, t) in gw.as_mut_slice().iter_mut().zip(params.w.as_slice()) {
                *g += cfg.lambda * subgrad_abs(*t);
            }
        }
        Regularizer::PathNorm => {
            // d/dV_ik = sign(V_ik) sum_j |W_ij|, d/dW_ij = sign(W_ij) sum_k |V_ik|
            for i in 0..params.hidden_dim() {
                let wsum: f64 = params.w.row(i).iter().map(|t| t.abs()).sum();
                let vsum: f64 = params.v.row(i).iter().map(|t| t.abs()).sum();
                for (g, t) in gv.row_mut(i).iter_mut().zip(params.v.row(i)) {
                    *g += cfg.lambda * subgrad_abs(*t) * wsum;
                }
                for (g, t) in gw.row_mut(i).iter_mut().zip(params.w.row(i)) {
                    *g += cfg.lambda * subgrad_abs(*t) * vsum;
                }
            }
        }
    }
    let (zv, zw) = gradient_step(params, &gv, &gw, cfg.step);
    if cfg.reg == Regularizer::Parseval {
        let c = ParsevalConstraint::new(1.0 / cfg.lambda);
        let w = project_linf_opnorm(&zw, &c);
        let v = project_linf_opnorm(&zv.transpose(), &c).transpose();
        ShallowParams::new(v, w)
    } else {
        ShallowParams::new(zv, zw)
    }
}

fn subgrad_abs(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn displacement(a: &ShallowParams, b: &ShallowParams) -> f64 {
    let dv: f64 = a
        .v
        .as_slice()
        .iter()
        .zip(b.v.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let dw: f64 = a
        .w
        .as_slice()
        .iter()
        .zip(b.w.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    (dv + dw).sqrt()
}

/// Deterministic full-gradient proximal loop with constant step size.
/// Records one entry per visited iterate; entry `k` carries `F(z_k)` and
/// the displacement of the step taken from `z_k` (the terminal entry has
/// displacement zero).
pub fn run_prox_grad(
    obj: &dyn SmoothObjective,
    init: &ShallowParams,
    cfg: &TrainConfig,
    iters: usize,
) -> Result<Vec<IterateRecord>> {
    cfg.validate()?;
    if iters == 0 {
        return Err(Error::InvalidParam("iters must be at least 1".into()));
    }
    let mut z = init.clone();
    let mut records = Vec::with_capacity(iters + 1);
    for k in 0..iters {
        let (f, gv, gw) = obj.eval(&z)?;
        let g = regularizer_value(cfg.reg, &z);
        let next = prox_grad_step(&z, &gv, &gw, cfg)?;
        records.push(IterateRecord {
            k,
            objective: f + cfg.lambda * g,
            smooth: f,
            reg: g,
            displacement: displacement(&z, &next),
        });
        z = next;
    }
    let (f, _, _) = obj.eval(&z)?;
    let g = regularizer_value(cfg.reg, &z);
    records.push(IterateRecord {
        k: iters,
        objective: f + cfg.lambda * g,
        smooth: f,
        reg: g,
        displacement: 0.0,
    });
    Ok(records)
}

/// Minibatch training loop. Initial weights and the per-epoch shuffle are
/// drawn from the seeded stream only, so a run is a deterministic function
/// of `(config, data)`. Per-epoch clean error is evaluated on `test` when
/// given, otherwise on the training set.
pub fn run_stochastic(
    train: &Batch,
    test: Option<&Batch>,
    cfg: &TrainConfig,
) -> Result<(ShallowParams, Vec<EpochMetrics>)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidParam("training set is empty".into()));
    }
    let classes = train.num_classes().max(2);
    let m = train.inputs.cols();
    let n = cfg.hidden;
    let mut rng = Rng::new(cfg.seed);

    // scaled-normal init, W then V, fixed draw order
    let mut w = DenseMatrix::zeros(n, m);
    let wscale = 1.0 / (m as f64).sqrt();
    for t in w.as_mut_slice() {
        *t = wscale * rng.normal();
    }
    let mut v = DenseMatrix::zeros(n, classes);
    let vscale = 1.0 / (n as f64).sqrt();
    for t in v.as_mut_slice() {
        *t = vscale * rng.normal();
    }
    let mut params = ShallowParams::new(v, w)?;

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut objective_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch) {
            let mb = train.select(chunk);
            let (f, gv, gw) = loss_and_grad(&params, cfg.act, &mb, cfg.loss)?;
            objective_sum += f + cfg.lambda * regularizer_value(cfg.reg, &params);
            batches += 1;
            params = match cfg.method {
                Method::Prox => prox_grad_step(&params, &gv, &gw, cfg)?,
                Method::Subgradient => subgradient_step(&params, &gv, &gw, cfg)?,
            };
        }
        metrics.push(EpochMetrics {
            epoch,
            objective: objective_sum / batches as f64,
            reg_value: regularizer_value(cfg.reg, &params),
            nnz_fraction: params.nonzero_fraction(),
            clean_error: classification_error(&params, cfg.act, test.unwrap_or(train)),
            robust_error: None,
        });
    }
    Ok((params, metrics))
}

/// Verifies `F(z_k) - F(z_{k+1}) >= ((1 - eta L)/(2 eta)) d_k^2` for every
/// recorded step, with `1e-10` slack. Requires `eta < 1/L`.
pub fn sufficient_decrease_check(records: &[IterateRecord], eta: f64, l: f64) -> Result<bool> {
    if eta.is_nan() || eta <= 0.0 || eta >= 1.0 / l {
        return Err(Error::InvalidParam(format!(
            "step {eta} outside (0, 1/L) for L = {l}"
        )));
    }
    let c = (1.0 - eta * l) / (2.0 * eta);
    Ok(records.windows(2).all(|pair| {
        let d = pair[0].displacement;
        pair[0].objective - pair[1].objective + 1e-10 >= c * d * d
    }))
}

/// Verifies the smallest step displacement against
/// `sqrt(2 (F(z_0) - F_lower) / ((c - L) K))` with `c = 1/eta` and `K` the
/// number of recorded steps. `f_lower` must lower-bound the objective (zero
/// works for nonnegative objectives).
pub fn displacement_bound_check(
    records: &[IterateRecord],
    eta: f64,
    l: f64,
    f_lower: f64,
) -> Result<bool> {
    let c = 1.0 / eta;
    if c.is_nan() || c <= l {
        return Err(Error::InvalidParam(format!("1/eta = {c} must exceed L = {l}")));
    }
    let steps = records.len().saturating_sub(1);
    if steps == 0 {
        return Ok(true);
    }
    let min_disp = records[..steps]
        .iter()
        .map(|r| r.displacement)
        .fold(f64::INFINITY, f64::min);
    let bound = (2.0 * (records[0].objective - f_lower) / ((c - l) * steps as f64)).sqrt();
    Ok(min_disp <= bound + 1e-10)
}
