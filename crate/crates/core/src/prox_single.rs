//! Exact proximal mapping of `g(v, w) = lam * |v| * ||w||_1` for one hidden
//! neuron of a single-output block: minimize
//!
//! ```text
//! 0.5 (v - x)^2 + 0.5 ||w - y||_2^2 + lam |v| ||w||_1
//! ```
//!
//! over `v` and `w`. The signs of a minimizer match the signs of `(x, y)`,
//! so the search runs over magnitudes: for each sparsity level `s` there is
//! one closed-form stationary candidate, the objective decreases along
//! feasible sparsity levels, and feasibility itself is monotone in `s` --
//! which makes a binary search over `s` exact. A brute-force oracle
//! enumerating every level (plus a projected-gradient polish) guards the
//! fast path in tests.

use crate::error::{Error, Result};
use crate::numerics::{
    apply_signs, clamp_tiny, magnitude_order, sign_pos, DenseMatrix, MagnitudeOrder,
};
use crate::par;

/// One neuron's prox problem: scalar `x` (entry of the output weight
/// vector), row `y` of the hidden-layer matrix, and the effective
/// coefficient `lam` (step size times regularization weight).
#[derive(Debug, Clone)]
pub struct ProxInputSingle {
    pub x: f64,
    pub y: Vec<f64>,
    pub lam: f64,
}

/// Stationary candidate at sparsity level `s`, in sorted magnitude space.
/// Only the first `s` entries of `w` may be nonzero.
#[derive(Debug, Clone)]
pub struct ProxCandidateSingle {
    pub s: usize,
    pub v: f64,
    pub w: Vec<f64>,
    pub h: f64,
}

impl ProxCandidateSingle {
    /// Number of strictly positive entries of `w`.
    pub fn w_support(&self) -> usize {
        self.w.iter().filter(|t| **t > 0.0).count()
    }
}

/// Objective of the magnitude-space problem:
/// `0.5 (v - |x|)^2 + 0.5 sum_j (w_j - |y_j|)^2 + lam * v * sum_j w_j`.
pub fn h_single(v: f64, w: &[f64], x_abs: f64, y_abs: &[f64], lam: f64) -> f64 {
    debug_assert_eq!(w.len(), y_abs.len());
    let sum_w: f64 = w.iter().sum();
    let sq: f64 = w.iter().zip(y_abs).map(|(wj, yj)| (wj - yj) * (wj - yj)).sum();
    0.5 * (v - x_abs) * (v - x_abs) + 0.5 * sq + lam * v * sum_w
}

/// Closed-form stationary candidate at sparsity level `s`:
/// `v = (|x| - lam * prefix[s]) / (1 - s lam^2)` and
/// `w_j = |y_(j)| - lam * v` on the `s` largest magnitudes, zero elsewhere.
/// Entries are not sign-clipped (infeasible levels keep their negative
/// values) apart from the `1e-12` boundary clamp.
pub fn candidate(
    s: usize,
    order: &MagnitudeOrder,
    x_abs: f64,
    lam: f64,
) -> Result<ProxCandidateSingle> {
    let m = order.len();
    if s > m {
        return Err(Error::InvalidParam(format!("sparsity {s} exceeds length {m}")));
    }
    let denom = 1.0 - s as f64 * lam * lam;
    if denom <= 0.0 {
        return Err(Error::SingularCandidate { s });
    }
    let v = clamp_tiny((x_abs - lam * order.prefix[s]) / denom);
    let mut w = vec![0.0; m];
    for (wj, abs) in w[..s].iter_mut().zip(&order.sorted_abs) {
        *wj = clamp_tiny(abs - lam * v);
    }
    let h = h_single(v, &w, x_abs, &order.sorted_abs, lam);
    Ok(ProxCandidateSingle { s, v, w, h })
}

/// The trivial stationary point `(0, |y|)`.
fn trivial_candidate(order: &MagnitudeOrder, x_abs: f64, lam: f64) -> ProxCandidateSingle {
    let w = order.sorted_abs.clone();
    let h = h_single(0.0, &w, x_abs, &order.sorted_abs, lam);
    let s = w.iter().filter(|t| **t > 0.0).count();
    ProxCandidateSingle { s, v: 0.0, w, h }
}

/// Largest admissible sparsity level: at most `m`, at most `floor(lam^-2)`,
/// and shrunk past any level where `1 - s lam^2` is not strictly positive
/// (an exact-integer `lam^-2` hits a singular system).
fn sparsity_cap(m: usize, lam: f64) -> usize {
    let inv = 1.0 / (lam * lam);
    let mut cap = if inv >= m as f64 { m } else { inv.floor() as usize };
    while cap > 0 && 1.0 - cap as f64 * lam * lam <= 0.0 {
        cap -= 1;
    }
    cap
}

fn feasible_candidate(
    s: usize,
    order: &MagnitudeOrder,
    x_abs: f64,
    lam: f64,
) -> Option<ProxCandidateSingle> {
    let c = candidate(s, order, x_abs, lam).ok()?;
    if c.v > 0.0 && (s == 0 || c.w[s - 1] > 0.0) {
        Some(c)
    } else {
        None
    }
}

/// Tie rule shared by the fast path and the oracle: smaller objective wins,
/// exact ties go to the candidate with smaller `w`-support.
fn better(a: &ProxCandidateSingle, b: &ProxCandidateSingle) -> bool {
    a.h < b.h || (a.h == b.h && a.w_support() < b.w_support())
}

fn restore(
    win: &ProxCandidateSingle,
    order: &MagnitudeOrder,
    x: f64,
    y: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mut w_mag = vec![0.0; y.len()];
    for (sorted_pos, &orig) in order.perm.iter().enumerate() {
        w_mag[orig] = win.w[sorted_pos];
    }
    let w = apply_signs(&w_mag, y)?;
    Ok((sign_pos(x) * win.v, w))
}

fn validate_input(input: &ProxInputSingle) -> Result<()> {
    if !input.lam.is_finite() || input.lam < 0.0 {
        return Err(Error::InvalidParam(format!("lam must be >= 0, got {}", input.lam)));
    }
    if !input.x.is_finite() {
        return Err(Error::NonFinite(format!("x is {}", input.x)));
    }
    Ok(())
}

/// Exact proximal mapping for one neuron. `lam == 0` is the identity.
pub fn prox_single(input: &ProxInputSingle) -> Result<(f64, Vec<f64>)> {
    validate_input(input)?;
    if input.lam == 0.0 {
        return Ok((input.x, input.y.clone()));
    }
    let lam = input.lam;
    let order = magnitude_order(&input.y)?;
    let x_abs = input.x.abs();
    let cap = sparsity_cap(order.len(), lam);

    // Feasibility is monotone: if level s works, every smaller level works.
    let best_feasible = if feasible_candidate(0, &order, x_abs, lam).is_some() {
        let mut lo = 0usize;
        let mut hi = cap;
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if feasible_candidate(mid, &order, x_abs, lam).is_some() {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        feasible_candidate(lo, &order, x_abs, lam)
    } else {
        None
    };

    let trivial = trivial_candidate(&order, x_abs, lam);
    let win = match best_feasible {
        Some(c) if !better(&trivial, &c) => c,
        _ => trivial,
    };
    restore(&win, &order, input.x, &input.y)
}

/// Brute-force reference: evaluates the trivial point and every
/// non-singular level with nonnegative entries, then polishes the winner
/// with 1000 projected-gradient steps and asserts the polish cannot improve
/// the objective by more than `1e-9`. Guarded to `m <= 20`.
pub fn prox_single_oracle(input: &ProxInputSingle) -> Result<(f64, Vec<f64>)> {
    if input.y.len() > 20 {
        return Err(Error::OracleGuard(format!(
            "oracle limited to m <= 20, got {}",
            input.y.len()
        )));
    }
    validate_input(input)?;
    if input.lam == 0.0 {
        return Ok((input.x, input.y.clone()));
    }
    let lam = input.lam;
    let order = magnitude_order(&input.y)?;
    let x_abs = input.x.abs();

    let mut win = trivial_candidate(&order, x_abs, lam);
    for s in 0..=order.len() {
        let Ok(c) = candidate(s, &order, x_abs, lam) else { continue };
        if c.v >= 0.0 && c.w.iter().all(|t| *t >= 0.0) && better(&c, &win) {
            win = c;
        }
    }

    // Projected gradient polish over the nonnegative orthant.
    let mut v = win.v;
    let mut w = win.w.clone();
    let step = 1e-3;
    for _ in 0..1000 {
        let sum_w: f64 = w.iter().sum();
        let gv = v - x_abs + lam * sum_w;
        let v_new = (v - step * gv).max(0.0);
        for (wj, yj) in w.iter_mut().zip(&order.sorted_abs) {
            let g = *wj - yj + lam * v;
            *wj = (*wj - step * g).max(0.0);
        }
        v = v_new;
    }
    let polished = h_single(v, &w, x_abs, &order.sorted_abs, lam);
    assert!(
        polished >= win.h - 1e-9,
        "projected-gradient polish improved the oracle by {} (h {} -> {})",
        win.h - polished,
        win.h,
        polished
    );

    restore(&win, &order, input.x, &input.y)
}

/// Row-separable block prox: neuron `i` solves the problem with
/// `x = v_in[i]` and `y = row i of w_in`. Rows are independent, so they are
/// mapped in parallel.
pub fn prox_block_single(
    v_in: &[f64],
    w_in: &DenseMatrix,
    lam: f64,
) -> Result<(Vec<f64>, DenseMatrix)> {
    if v_in.len() != w_in.rows() {
        return Err(Error::Shape(format!(
            "v has {} entries but W has {} rows",
            v_in.len(),
            w_in.rows()
        )));
    }
    let per_row = par::map_indexed(w_in.rows(), |i| {
        prox_single(&ProxInputSingle { x: v_in[i], y: w_in.row(i).to_vec(), lam })
    });
    let mut v_out = Vec::with_capacity(v_in.len());
    let mut w_out = DenseMatrix::zeros(w_in.rows(), w_in.cols());
    for (i, res) in per_row.into_iter().enumerate() {
        let (v, w) = res?;
        v_out.push(v);
        w_out.row_mut(i).copy_from_slice(&w);
    }
    Ok((v_out, w_out))
}
