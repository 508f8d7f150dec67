//! L-infinity PGD attack and robust-error evaluation. Steps follow the sign
//! of the input gradient of the cross-entropy loss, clipped to both the
//! epsilon box around the clean point and the data range `[0, 1]`; the
//! returned point is the visited iterate with the highest loss.

use crate::error::Result;
use crate::model::{loss_and_input_grad, predict, ActivationKind, Batch};
use crate::numerics::Rng;
use crate::par;
use crate::pathnorm::ShallowParams;

#[derive(Debug, Clone, Copy)]
pub struct AttackConfig {
    pub epsilon: f64,
    pub iters: usize,
    pub step: f64,
    pub random_init: bool,
}

impl AttackConfig {
    /// The evaluation protocol used throughout: 40 iterations with step
    /// size `epsilon / 20` and random initialization.
    pub fn standard(epsilon: f64) -> Self {
        Self { epsilon, iters: 40, step: epsilon / 20.0, random_init: true }
    }
}

fn step_sign(g: f64) -> f64 {
    // a zero gradient must not move the iterate
    if g > 0.0 {
        1.0
    } else if g < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adversarial perturbation of one sample. The result always satisfies
/// `||x' - x||_inf <= epsilon` and stays in `[0, 1]`; with
/// `random_init = false`, the clean point is among the tracked iterates,
/// so the returned loss is at least the clean loss.
pub fn pgd_linf(
    params: &ShallowParams,
    act: ActivationKind,
    x: &[f64],
    label: usize,
    cfg: &AttackConfig,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let eps = cfg.epsilon;
    assert!(eps >= 0.0, "epsilon must be nonnegative, got {eps}");
    let lo: Vec<f64> = x.iter().map(|t| (t - eps).max(0.0)).collect();
    let hi: Vec<f64> = x.iter().map(|t| (t + eps).min(1.0)).collect();

    let mut cur = x.to_vec();
    if cfg.random_init {
        for (j, t) in cur.iter_mut().enumerate() {
            *t = (*t + rng.range(-eps, eps)).clamp(lo[j], hi[j]);
        }
    }
    let (mut best_loss, _) = loss_and_input_grad(params, act, &cur, label)?;
    let mut best = cur.clone();
    for _ in 0..cfg.iters {
        let (_, g) = loss_and_input_grad(params, act, &cur, label)?;
        for (j, t) in cur.iter_mut().enumerate() {
            *t = (*t + cfg.step * step_sign(g[j])).clamp(lo[j], hi[j]);
        }
        let (loss, _) = loss_and_input_grad(params, act, &cur, label)?;
        if loss > best_loss {
            best_loss = loss;
            best = cur.clone();
        }
    }
    Ok(best)
}

/// Fraction of samples misclassified under attack. A sample counts as an
/// error when either the clean or the attacked point is misclassified (an
/// adversary inside the ball can always keep the clean point), so the
/// result is at least the clean error. Per-sample RNG streams are derived
/// from `seed` and the sample index, making the evaluation deterministic
/// and independent of execution order.
pub fn robust_error(
    params: &ShallowParams,
    act: ActivationKind,
    data: &Batch,
    cfg: &AttackConfig,
    seed: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let base = Rng::new(seed);
    let flags = par::map_indexed(data.len(), |i| -> Result<usize> {
        let x = data.inputs.row(i);
        let label = data.labels[i];
        let clean_wrong = predict(params, act, x) != label;
        let mut rng = base.derive(i as u64);
        let adv = pgd_linf(params, act, x, label, cfg, &mut rng)?;
        let adv_wrong = predict(params, act, &adv) != label;
        Ok(usize::from(clean_wrong || adv_wrong))
    });
    let mut wrong = 0usize;
    for f in flags {
        wrong += f?;
    }
    Ok(wrong as f64 / data.len() as f64)
}
