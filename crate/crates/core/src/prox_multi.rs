//! Exact multi-output proximal mapping per hidden neuron: minimize
//!
//! ```text
//! 0.5 ||v - x||^2 + 0.5 ||w - y||^2 + lam * ||v||_1 * ||w||_1
//! ```
//!
//! over `v` (length p) and `w` (length m), signs again determined by the
//! input. In magnitude space every sparsity pair `(s_v, s_w)` with
//! `s_v * s_w * lam^2 < 1` has one closed-form stationary candidate. The
//! objective decreases when either sparsity grows while feasible, so the
//! optimum lies on the boundary of the feasible pairs; a single
//! `O(p + m)` staircase walk enumerates that boundary and the argmin over
//! it (plus the two trivial stationary points) is exact.

use crate::error::{Error, Result};
use crate::numerics::{apply_signs, clamp_tiny, magnitude_order, DenseMatrix, MagnitudeOrder};
use crate::par;

#[derive(Debug, Clone)]
pub struct ProxInputMulti {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lam: f64,
}

/// Counts of strictly positive entries in the `v` and `w` parts of a
/// candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityPair {
    pub s_v: usize,
    pub s_w: usize,
}

/// Stationary candidate at one sparsity pair, in sorted magnitude space.
#[derive(Debug, Clone)]
pub struct ProxCandidateMulti {
    pub pair: SparsityPair,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub h: f64,
}

impl ProxCandidateMulti {
    pub fn v_support(&self) -> usize {
        self.v.iter().filter(|t| **t > 0.0).count()
    }

    pub fn w_support(&self) -> usize {
        self.w.iter().filter(|t| **t > 0.0).count()
    }
}

/// Sparsity pairs on the maximal feasibility boundary: feasible pairs whose
/// both single-coordinate increments are infeasible (or out of range).
#[derive(Debug, Clone)]
pub struct MfbSet {
    pub pairs: Vec<SparsityPair>,
}

// Margin keeping 1 - s_v s_w lam^2 away from the singular surface where the
// stationary system blows up.
const SINGULAR_GUARD: f64 = 1e-15;

/// `0.5 ||v - |x|||^2 + 0.5 ||w - |y|||^2 + lam (sum v)(sum w)`.
pub fn h_multi(v: &[f64], w: &[f64], x_abs: &[f64], y_abs: &[f64], lam: f64) -> f64 {
    debug_assert_eq!(v.len(), x_abs.len());
    debug_assert_eq!(w.len(), y_abs.len());
    let sv: f64 = v.iter().sum();
    let sw: f64 = w.iter().sum();
    let qv: f64 = v.iter().zip(x_abs).map(|(a, b)| (a - b) * (a - b)).sum();
    let qw: f64 = w.iter().zip(y_abs).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * qv + 0.5 * qw + lam * sv * sw
}

/// Common offsets of the stationary candidate at `pair`:
/// `dv = mu (lam^2 s_w Sx - lam Sy)` and `dw = mu (lam^2 s_v Sy - lam Sx)`
/// with `mu = (1 - s_v s_w lam^2)^-1` and `Sx`, `Sy` the top-magnitude
/// prefix sums. `None` when the pair is singular.
fn offsets(
    pair: SparsityPair,
    ox: &MagnitudeOrder,
    oy: &MagnitudeOrder,
    lam: f64,
) -> Option<(f64, f64)> {
    let denom = 1.0 - (pair.s_v * pair.s_w) as f64 * lam * lam;
    if denom <= SINGULAR_GUARD {
        return None;
    }
    let mu = 1.0 / denom;
    let sx = ox.prefix[pair.s_v];
    let sy = oy.prefix[pair.s_w];
    let dv = mu * (lam * lam * pair.s_w as f64 * sx - lam * sy);
    let dw = mu * (lam * lam * pair.s_v as f64 * sy - lam * sx);
    Some((dv, dw))
}

/// Stationary candidate at `pair`: `v_k = |x_(k)| + dv` on the `s_v` largest
/// magnitudes of `x` (zero elsewhere) and symmetrically for `w`. Entries of
/// infeasible pairs keep their negative values apart from the boundary
/// clamp.
pub fn candidate_multi(
    pair: SparsityPair,
    ox: &MagnitudeOrder,
    oy: &MagnitudeOrder,
    lam: f64,
) -> Result<ProxCandidateMulti> {
    if pair.s_v > ox.len() || pair.s_w > oy.len() {
        return Err(Error::InvalidParam(format!(
            "pair ({}, {}) exceeds dimensions ({}, {})",
            pair.s_v,
            pair.s_w,
            ox.len(),
            oy.len()
        )));
    }
    let Some((dv, dw)) = offsets(pair, ox, oy, lam) else {
        return Err(Error::SingularPair { s_v: pair.s_v, s_w: pair.s_w });
    };
    let mut v = vec![0.0; ox.len()];
    for (vk, abs) in v[..pair.s_v].iter_mut().zip(&ox.sorted_abs) {
        *vk = clamp_tiny(abs + dv);
    }
    let mut w = vec![0.0; oy.len()];
    for (wj, abs) in w[..pair.s_w].iter_mut().zip(&oy.sorted_abs) {
        *wj = clamp_tiny(abs + dw);
    }
    let h = h_multi(&v, &w, &ox.sorted_abs, &oy.sorted_abs, lam);
    Ok(ProxCandidateMulti { pair, v, w, h })
}

/// Boundary feasibility test of one pair: last included entries of both
/// sides nonnegative (vacuous at zero counts) and the sparsity product
/// under `lam^-2`.
pub(crate) fn pair_feasible(
    pair: SparsityPair,
    ox: &MagnitudeOrder,
    oy: &MagnitudeOrder,
    lam: f64,
) -> bool {
    let Some((dv, dw)) = offsets(pair, ox, oy, lam) else {
        return false;
    };
    let v_ok = pair.s_v == 0 || clamp_tiny(ox.sorted_abs[pair.s_v - 1] + dv) >= 0.0;
    let w_ok = pair.s_w == 0 || clamp_tiny(oy.sorted_abs[pair.s_w - 1] + dw) >= 0.0;
    v_ok && w_ok
}

/// Staircase walk over sparsity pairs: `s_v` sweeps up from 0 while `s_w`
/// sweeps down from `m`. On the first infeasible pair after an `s_v`
/// increment the predecessor `(s_v - 1, s_w)` is on the boundary; when the
/// walk exits past `s_v = p`, `(p, s_w)` is. Also returns the number of
/// candidate feasibility evaluations, which is at most `m + p + 2`.
pub fn mfb_with_eval_count(
    ox: &MagnitudeOrder,
    oy: &MagnitudeOrder,
    lam: f64,
) -> (MfbSet, usize) {
    let p = ox.len();
    let m = oy.len();
    let mut s_v = 0usize;
    let mut s_w = m;
    let mut maximal = true;
    let mut pairs = Vec::new();
    let mut evals = 0usize;
    while s_v <= p {
        evals += 1;
        if pair_feasible(SparsityPair { s_v, s_w }, ox, oy, lam) {
            s_v += 1;
            maximal = true;
        } else {
            if maximal {
                let prev = s_v.checked_sub(1).expect("pair (0, s_w) is always feasible");
                pairs.push(SparsityPair { s_v: prev, s_w });
                maximal = false;
            }
            if s_w == 0 {
                break; // unreachable: (s_v, 0) is always feasible
            }
            s_w -= 1;
        }
    }
    if s_v == p + 1 {
        pairs.push(SparsityPair { s_v: p, s_w });
    }
    (MfbSet { pairs }, evals)
}

pub fn mfb(ox: &MagnitudeOrder, oy: &MagnitudeOrder, lam: f64) -> MfbSet {
    mfb_with_eval_count(ox, oy, lam).0
}

fn trivial_candidates(ox: &MagnitudeOrder, oy: &MagnitudeOrder, lam: f64) -> [ProxCandidateMulti; 2] {
    let keep_w = oy.sorted_abs.clone();
    let zero_v = vec![0.0; ox.len()];
    let h_w = h_multi(&zero_v, &keep_w, &ox.sorted_abs, &oy.sorted_abs, lam);
    let s_w = keep_w.iter().filter(|t| **t > 0.0).count();

    let keep_v = ox.sorted_abs.clone();
    let zero_w = vec![0.0; oy.len()];
    let h_v = h_multi(&keep_v, &zero_w, &ox.sorted_abs, &oy.sorted_abs, lam);
    let s_v = keep_v.iter().filter(|t| **t > 0.0).count();

    [
        ProxCandidateMulti { pair: SparsityPair { s_v: 0, s_w }, v: zero_v, w: keep_w, h: h_w },
        ProxCandidateMulti { pair: SparsityPair { s_v, s_w: 0 }, v: keep_v, w: zero_w, h: h_v },
    ]
}

/// Tie rule: smaller objective wins; exact ties go to the lexicographically
/// smaller `(support_v + support_w, support_v)`.
fn better(a: &ProxCandidateMulti, b: &ProxCandidateMulti) -> bool {
    if a.h != b.h {
        return a.h < b.h;
    }
    let ka = (a.v_support() + a.w_support(), a.v_support());
    let kb = (b.v_support() + b.w_support(), b.v_support());
    ka < kb
}

fn validate_input(input: &ProxInputMulti) -> Result<()> {
    if !input.lam.is_finite() || input.lam < 0.0 {
        return Err(Error::InvalidParam(format!("lam must be >= 0, got {}", input.lam)));
    }
    Ok(())
}

fn restore(
    win: &ProxCandidateMulti,
    ox: &MagnitudeOrder,
    oy: &MagnitudeOrder,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v_mag = vec![0.0; x.len()];
    for (pos, &orig) in ox.perm.iter().enumerate() {
        v_mag[orig] = win.v[pos];
    }
    let mut w_mag = vec![0.0; y.len()];
    for (pos, &orig) in oy.perm.iter().enumerate() {
        w_mag[orig] = win.w[pos];
    }
    Ok((apply_signs(&v_mag, x)?, apply_signs(&w_mag, y)?))
}

/// Exact multi-output prox for one neuron. `lam == 0` is the identity.
pub fn prox_multi(input: &ProxInputMulti) -> Result<(Vec<f64>, Vec<f64>)> {
    validate_input(input)?;
    if input.lam == 0.0 {
        return Ok((input.x.clone(), input.y.clone()));
    }
    let lam = input.lam;
    let ox = magnitude_order(&input.x)?;
    let oy = magnitude_order(&input.y)?;

    let boundary = mfb(&ox, &oy, lam);
    let mut win: Option<ProxCandidateMulti> = None;
    let mut consider = |c: ProxCandidateMulti| match &win {
        Some(best) if !better(&c, best) => {}
        _ => win = Some(c),
    };
    for &pair in &boundary.pairs {
        if let Ok(c) = candidate_multi(pair, &ox, &oy, lam) {
            consider(c);
        }
    }
    // The pure stationary points with one side zeroed exist at every support
    // count of the kept side; add them explicitly so the argmin never
    // depends on whether the walk visited them.
    for c in trivial_candidates(&ox, &oy, lam) {
        consider(c);
    }
    let win = win.expect("candidate set is never empty");
    restore(&win, &ox, &oy, &input.x, &input.y)
}

/// Brute-force reference: every sparsity pair with a defined candidate and
/// nonnegative entries, plus the trivial points, then a projected-gradient
/// polish of the winner. Guarded to `p, m <= 6`.
pub fn prox_multi_oracle(input: &ProxInputMulti) -> Result<(Vec<f64>, Vec<f64>)> {
    if input.x.len() > 6 || input.y.len() > 6 {
        return Err(Error::OracleGuard(format!(
            "oracle limited to p, m <= 6, got ({}, {})",
            input.x.len(),
            input.y.len()
        )));
    }
    validate_input(input)?;
    if input.lam == 0.0 {
        return Ok((input.x.clone(), input.y.clone()));
    }
    let lam = input.lam;
    let ox = magnitude_order(&input.x)?;
    let oy = magnitude_order(&input.y)?;

    let mut win: Option<ProxCandidateMulti> = None;
    let mut consider = |c: ProxCandidateMulti| match &win {
        Some(best) if !better(&c, best) => {}
        _ => win = Some(c),
    };
    for s_v in 0..=ox.len() {
        for s_w in 0..=oy.len() {
            let Ok(c) = candidate_multi(SparsityPair { s_v, s_w }, &ox, &oy, lam) else {
                continue;
            };
            if c.v.iter().all(|t| *t >= 0.0) && c.w.iter().all(|t| *t >= 0.0) {
                consider(c);
            }
        }
    }
    for c in trivial_candidates(&ox, &oy, lam) {
        consider(c);
    }
    let win = win.expect("candidate set is never empty");

    let mut v = win.v.clone();
    let mut w = win.w.clone();
    let step = 1e-3;
    for _ in 0..1000 {
        let sv: f64 = v.iter().sum();
        let sw: f64 = w.iter().sum();
        for (vk, xk) in v.iter_mut().zip(&ox.sorted_abs) {
            *vk = (*vk - step * (*vk - xk + lam * sw)).max(0.0);
        }
        for (wj, yj) in w.iter_mut().zip(&oy.sorted_abs) {
            *wj = (*wj - step * (*wj - yj + lam * sv)).max(0.0);
        }
    }
    let polished = h_multi(&v, &w, &ox.sorted_abs, &oy.sorted_abs, lam);
    assert!(
        polished >= win.h - 1e-9,
        "projected-gradient polish improved the oracle by {} (h {} -> {})",
        win.h - polished,
        win.h,
        polished
    );

    restore(&win, &ox, &oy, &input.x, &input.y)
}

/// Row-separable full prox: neuron `i` solves the problem on
/// `(row i of V, row i of W)`. Rows are mapped in parallel.
pub fn prox_full(v: &DenseMatrix, w: &DenseMatrix, lam: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    if v.rows() != w.rows() {
        return Err(Error::Shape(format!(
            "V has {} rows but W has {}",
            v.rows(),
            w.rows()
        )));
    }
    if lam == 0.0 {
        return Ok((v.clone(), w.clone()));
    }
    let per_row = par::map_indexed(v.rows(), |i| {
        prox_multi(&ProxInputMulti { x: v.row(i).to_vec(), y: w.row(i).to_vec(), lam })
    });
    let mut v_out = DenseMatrix::zeros(v.rows(), v.cols());
    let mut w_out = DenseMatrix::zeros(w.rows(), w.cols());
    for (i, res) in per_row.into_iter().enumerate() {
        let (vr, wr) = res?;
        v_out.row_mut(i).copy_from_slice(&vr);
        w_out.row_mut(i).copy_from_slice(&wr);
    }
    Ok((v_out, w_out))
}
