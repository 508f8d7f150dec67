//! Randomized verification suites for the proximal mappings: oracle
//! equivalence on the objective value, stationarity of the returned points,
//! sparsity caps, objective monotonicity across sparsity levels,
//! feasibility monotonicity, boundary-set structure, sign equivariance, and
//! the deterministic tie rule.
//!
//! Every suite draws its instances from per-trial RNG streams derived from
//! one seed, so runs are reproducible and trials can be mapped in parallel.
//! Instances mix standard normal entries with a heavy-tailed component and
//! exact zeros to stress the feasibility boundaries.

use crate::numerics::{magnitude_order, Rng};
use crate::par;
use crate::prox_multi::{
    candidate_multi, h_multi, mfb_with_eval_count, pair_feasible, prox_multi, prox_multi_oracle,
    ProxInputMulti, SparsityPair,
};
use crate::prox_single::{
    candidate, h_single, prox_single, prox_single_oracle, ProxInputSingle,
};

/// Regularization weights exercised by every suite; `1.0` and `2.0` sit on
/// and beyond the singular surface of the sparsity-level systems.
pub const LAM_GRID: [f64; 5] = [0.05, 0.3, 0.9, 1.0, 2.0];

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest residual observed, for suites with a numeric tolerance.
    pub worst: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Deliberate defect injected into the tie-rule suite to demonstrate that
/// the harness is not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Break exact objective ties toward the larger support instead of the
    /// smaller one.
    FlipTieRule,
}

fn heavy_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let u = rng.uniform();
            if u < 0.08 {
                0.0
            } else if u < 0.25 {
                10.0 * rng.normal()
            } else {
                rng.normal()
            }
        })
        .collect()
}

fn abs_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|t| t.abs()).collect()
}

struct TrialOutcome {
    violation: bool,
    residual: f64,
}

fn run_trials<F>(name: &str, trials: usize, seed: u64, f: F) -> CheckReport
where
    F: Fn(Rng) -> TrialOutcome + Sync + Send,
{
    let base = Rng::new(seed);
    let outcomes = par::map_indexed(trials, |i| f(base.derive(i as u64)));
    let mut violations = 0;
    let mut worst = 0.0_f64;
    for o in outcomes {
        violations += usize::from(o.violation);
        worst = worst.max(o.residual);
    }
    CheckReport { name: name.to_string(), trials, violations, worst }
}

fn single_instance(rng: &mut Rng, max_m: usize) -> ProxInputSingle {
    let m = 1 + rng.below(max_m);
    ProxInputSingle {
        x: heavy_vec(rng, 1)[0],
        y: heavy_vec(rng, m),
        lam: LAM_GRID[rng.below(LAM_GRID.len())],
    }
}

fn multi_instance(rng: &mut Rng, max_p: usize, max_m: usize) -> ProxInputMulti {
    let p = 1 + rng.below(max_p);
    let m = 1 + rng.below(max_m);
    ProxInputMulti {
        x: heavy_vec(rng, p),
        y: heavy_vec(rng, m),
        lam: LAM_GRID[rng.below(LAM_GRID.len())],
    }
}

/// `|h(fast) - h(oracle)| <= 1e-9` on random single-output instances.
/// `max_m` is clamped to the oracle guard.
pub fn single_prox_equivalence(trials: usize, max_m: usize, seed: u64) -> CheckReport {
    let max_m = max_m.min(20);
    run_trials("single-output prox vs oracle", trials, seed, move |mut rng| {
        let input = single_instance(&mut rng, max_m);
        let fast = prox_single(&input).expect("fast prox");
        let oracle = prox_single_oracle(&input).expect("oracle prox");
        let ya = abs_vec(&input.y);
        let hf = h_single(fast.0.abs(), &abs_vec(&fast.1), input.x.abs(), &ya, input.lam);
        let ho = h_single(oracle.0.abs(), &abs_vec(&oracle.1), input.x.abs(), &ya, input.lam);
        let residual = (hf - ho).abs();
        TrialOutcome { violation: residual > 1e-9, residual }
    })
}

/// `|h(fast) - h(oracle)| <= 1e-9` on random multi-output instances.
/// Sizes are clamped to the oracle guard.
pub fn multi_prox_equivalence(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    let (max_p, max_m) = (max_p.min(6), max_m.min(6));
    run_trials("multi-output prox vs oracle", trials, seed, move |mut rng| {
        let input = multi_instance(&mut rng, max_p, max_m);
        let fast = prox_multi(&input).expect("fast prox");
        let oracle = prox_multi_oracle(&input).expect("oracle prox");
        let xa = abs_vec(&input.x);
        let ya = abs_vec(&input.y);
        let hf = h_multi(&abs_vec(&fast.0), &abs_vec(&fast.1), &xa, &ya, input.lam);
        let ho = h_multi(&abs_vec(&oracle.0), &abs_vec(&oracle.1), &xa, &ya, input.lam);
        let residual = (hf - ho).abs();
        TrialOutcome { violation: residual > 1e-9, residual }
    })
}

/// A `p = 1` multi-output instance must reproduce the single-output result
/// to `1e-10` elementwise.
pub fn single_output_reduction(trials: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("p=1 reduction to single-output prox", trials, seed, |mut rng| {
        let input = single_instance(&mut rng, max_m);
        let (sv, sw) = prox_single(&input).expect("single prox");
        let (mv, mw) = prox_multi(&ProxInputMulti {
            x: vec![input.x],
            y: input.y.clone(),
            lam: input.lam,
        })
        .expect("multi prox");
        let mut residual = (mv[0] - sv).abs();
        for (a, b) in mw.iter().zip(&sw) {
            residual = residual.max((a - b).abs());
        }
        TrialOutcome { violation: residual > 1e-10, residual }
    })
}

/// Fixed-point residuals of the stationarity system at the returned point,
/// in magnitude space, must be below `1e-10` (single- and multi-output).
pub fn stationarity(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("stationarity of returned points", trials, seed, |mut rng| {
        let mut residual = 0.0_f64;

        let s = single_instance(&mut rng, max_m);
        let (v, w) = prox_single(&s).expect("single prox");
        let (va, wa) = (v.abs(), abs_vec(&w));
        let sum_w: f64 = wa.iter().sum();
        residual = residual.max((va - (s.x.abs() - s.lam * sum_w).max(0.0)).abs());
        for (wj, yj) in wa.iter().zip(&s.y) {
            residual = residual.max((wj - (yj.abs() - s.lam * va).max(0.0)).abs());
        }

        let mu = multi_instance(&mut rng, max_p, max_m);
        let (v, w) = prox_multi(&mu).expect("multi prox");
        let (va, wa) = (abs_vec(&v), abs_vec(&w));
        let sum_v: f64 = va.iter().sum();
        let sum_w: f64 = wa.iter().sum();
        for (vk, xk) in va.iter().zip(&mu.x) {
            residual = residual.max((vk - (xk.abs() - mu.lam * sum_w).max(0.0)).abs());
        }
        for (wj, yj) in wa.iter().zip(&mu.y) {
            residual = residual.max((wj - (yj.abs() - mu.lam * sum_v).max(0.0)).abs());
        }

        TrialOutcome { violation: residual > 1e-10, residual }
    })
}

/// Support caps implied by second-order optimality: a nontrivial
/// single-output solution has `|support(w)| <= lam^-2`, and a multi-output
/// solution with both sides nonzero has `s_v * s_w <= lam^-2`.
pub fn sparsity_bounds(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("sparsity caps", trials, seed, |mut rng| {
        let mut violation = false;

        let s = single_instance(&mut rng, max_m);
        let (v, w) = prox_single(&s).expect("single prox");
        if v != 0.0 {
            let support = w.iter().filter(|t| **t != 0.0).count();
            violation |= support as f64 * s.lam * s.lam > 1.0 + 1e-9;
        }

        let mu = multi_instance(&mut rng, max_p, max_m);
        let (v, w) = prox_multi(&mu).expect("multi prox");
        let s_v = v.iter().filter(|t| **t != 0.0).count();
        let s_w = w.iter().filter(|t| **t != 0.0).count();
        if s_v > 0 && s_w > 0 {
            violation |= (s_v * s_w) as f64 * mu.lam * mu.lam > 1.0 + 1e-9;
        }

        TrialOutcome { violation, residual: 0.0 }
    })
}

/// The candidate objective is non-increasing in the sparsity level below
/// the cap, and in each coordinate of the sparsity pair below the product
/// cap.
pub fn h_monotonicity(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("objective monotone in sparsity", trials, seed, |mut rng| {
        let mut residual = 0.0_f64;

        let s = single_instance(&mut rng, max_m);
        let order = magnitude_order(&s.y).expect("finite");
        let x_abs = s.x.abs();
        for level in 2..=order.len() {
            let (Ok(cur), Ok(prev)) = (
                candidate(level, &order, x_abs, s.lam),
                candidate(level - 1, &order, x_abs, s.lam),
            ) else {
                continue;
            };
            residual = residual.max(cur.h - prev.h);
        }

        let mu = multi_instance(&mut rng, max_p, max_m);
        let ox = magnitude_order(&mu.x).expect("finite");
        let oy = magnitude_order(&mu.y).expect("finite");
        for s_v in 0..=ox.len() {
            for s_w in 0..=oy.len() {
                let Ok(cur) = candidate_multi(SparsityPair { s_v, s_w }, &ox, &oy, mu.lam) else {
                    continue;
                };
                if s_w >= 1 {
                    if let Ok(prev) =
                        candidate_multi(SparsityPair { s_v, s_w: s_w - 1 }, &ox, &oy, mu.lam)
                    {
                        residual = residual.max(cur.h - prev.h);
                    }
                }
                if s_v >= 1 {
                    if let Ok(prev) =
                        candidate_multi(SparsityPair { s_v: s_v - 1, s_w }, &ox, &oy, mu.lam)
                    {
                        residual = residual.max(cur.h - prev.h);
                    }
                }
            }
        }

        TrialOutcome { violation: residual > 1e-12, residual }
    })
}

/// Feasibility of a sparsity level (pair) implies feasibility of every
/// smaller level (componentwise smaller pair), which is what makes the
/// binary search and the staircase walk exact.
pub fn feasibility_monotonicity(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("feasibility monotone in sparsity", trials, seed, |mut rng| {
        let mut violation = false;

        let s = single_instance(&mut rng, max_m);
        let order = magnitude_order(&s.y).expect("finite");
        let x_abs = s.x.abs();
        let feasible: Vec<bool> = (1..=order.len())
            .map(|level| match candidate(level, &order, x_abs, s.lam) {
                Ok(c) => c.v > 0.0 && c.w[level - 1] > 0.0,
                Err(_) => false,
            })
            .collect();
        for k in 1..feasible.len() {
            if feasible[k] && !feasible[k - 1] {
                violation = true;
            }
        }

        let mu = multi_instance(&mut rng, max_p, max_m);
        let ox = magnitude_order(&mu.x).expect("finite");
        let oy = magnitude_order(&mu.y).expect("finite");
        for k in 0..=ox.len() {
            for l in 0..=oy.len() {
                if !pair_feasible(SparsityPair { s_v: k, s_w: l }, &ox, &oy, mu.lam) {
                    continue;
                }
                for i in 0..=k {
                    for j in 0..=l {
                        if !pair_feasible(SparsityPair { s_v: i, s_w: j }, &ox, &oy, mu.lam) {
                            violation = true;
                        }
                    }
                }
            }
        }

        TrialOutcome { violation, residual: 0.0 }
    })
}

/// Structure of the boundary set: at most `min(m, p) + 1` pairs, found in
/// at most `m + p + 2` candidate evaluations, every member feasible with
/// both single-coordinate increments infeasible or out of range.
pub fn mfb_structure(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("boundary-set structure", trials, seed, |mut rng| {
        let mu = multi_instance(&mut rng, max_p, max_m);
        let ox = magnitude_order(&mu.x).expect("finite");
        let oy = magnitude_order(&mu.y).expect("finite");
        let (set, evals) = mfb_with_eval_count(&ox, &oy, mu.lam);
        let p = ox.len();
        let m = oy.len();
        let mut violation = set.pairs.len() > p.min(m) + 1 || evals > m + p + 2;
        for &pair in &set.pairs {
            if !pair_feasible(pair, &ox, &oy, mu.lam) {
                violation = true;
            }
            if pair.s_v < p
                && pair_feasible(
                    SparsityPair { s_v: pair.s_v + 1, s_w: pair.s_w },
                    &ox,
                    &oy,
                    mu.lam,
                )
            {
                violation = true;
            }
            if pair.s_w < m
                && pair_feasible(
                    SparsityPair { s_v: pair.s_v, s_w: pair.s_w + 1 },
                    &ox,
                    &oy,
                    mu.lam,
                )
            {
                violation = true;
            }
        }
        TrialOutcome { violation, residual: 0.0 }
    })
}

/// `prox(-x, -y) = -prox(x, y)` exactly, for both mappings.
pub fn sign_equivariance(trials: usize, max_p: usize, max_m: usize, seed: u64) -> CheckReport {
    run_trials("sign equivariance", trials, seed, |mut rng| {
        let mut violation = false;

        let s = single_instance(&mut rng, max_m);
        let (v, w) = prox_single(&s).expect("single prox");
        let neg = ProxInputSingle {
            x: -s.x,
            y: s.y.iter().map(|t| -t).collect(),
            lam: s.lam,
        };
        let (nv, nw) = prox_single(&neg).expect("single prox");
        violation |= nv != -v;
        violation |= nw.iter().zip(&w).any(|(a, b)| *a != -*b);

        let mu = multi_instance(&mut rng, max_p, max_m);
        let (v, w) = prox_multi(&mu).expect("multi prox");
        let neg = ProxInputMulti {
            x: mu.x.iter().map(|t| -t).collect(),
            y: mu.y.iter().map(|t| -t).collect(),
            lam: mu.lam,
        };
        let (nv, nw) = prox_multi(&neg).expect("multi prox");
        violation |= nv.iter().zip(&v).any(|(a, b)| *a != -*b);
        violation |= nw.iter().zip(&w).any(|(a, b)| *a != -*b);

        TrialOutcome { violation, residual: 0.0 }
    })
}

/// Crafted instances where the trivial point and the support-0 candidate
/// tie exactly in the objective (`x^2 = ||y||^2` with `lam > 1`); the
/// deterministic rule must return the candidate with the smaller support.
/// Under [`Fault::FlipTieRule`] a deliberately broken selection runs
/// instead, and the suite must report violations.
pub fn tie_rule(fault: Fault) -> CheckReport {
    // exact in binary floating point: 3^2 + 4^2 = 5^2, powers of two, signs
    let instances: Vec<(f64, Vec<f64>, f64)> = vec![
        (1.0, vec![1.0], 2.0),
        (-1.0, vec![1.0], 2.0),
        (2.0, vec![-2.0], 1.5),
        (5.0, vec![3.0, -4.0], 2.0),
        (-5.0, vec![4.0, 3.0], 4.0),
        (0.5, vec![-0.5], 1.5),
        (8.0, vec![8.0], 2.0),
    ];
    let trials = instances.len();
    let mut violations = 0;
    for (x, y, lam) in instances {
        let got = match fault {
            Fault::None => prox_single(&ProxInputSingle { x, y: y.clone(), lam })
                .expect("prox on crafted tie"),
            Fault::FlipTieRule => flipped_tie_selection(x, &y, lam),
        };
        // expected: keep x, zero out w (support 0 beats the trivial point)
        let want_v = x;
        let ok = got.0 == want_v && got.1.iter().all(|t| *t == 0.0);
        violations += usize::from(!ok);
    }
    CheckReport { name: "deterministic tie rule".to_string(), trials, violations, worst: 0.0 }
}

/// The deliberately broken prox used by the fault-injection mode: same
/// candidate set, ties resolved toward the larger support.
fn flipped_tie_selection(x: f64, y: &[f64], lam: f64) -> (f64, Vec<f64>) {
    let order = magnitude_order(y).expect("finite");
    let x_abs = x.abs();
    let mut best: Option<(f64, usize, f64, Vec<f64>)> = None;
    let mut consider = |h: f64, support: usize, v: f64, w: Vec<f64>| {
        let replace = match &best {
            None => true,
            Some((bh, bs, _, _)) => h < *bh || (h == *bh && support > *bs),
        };
        if replace {
            best = Some((h, support, v, w));
        }
    };
    let trivial = order.sorted_abs.clone();
    let h_triv = h_single(0.0, &trivial, x_abs, &order.sorted_abs, lam);
    let support = trivial.iter().filter(|t| **t > 0.0).count();
    consider(h_triv, support, 0.0, trivial);
    for s in 0..=order.len() {
        let Ok(c) = candidate(s, &order, x_abs, lam) else { continue };
        if c.v >= 0.0 && c.w.iter().all(|t| *t >= 0.0) {
            let support = c.w_support();
            consider(c.h, support, c.v, c.w.clone());
        }
    }
    let (_, _, v, w_sorted) = best.expect("nonempty candidate set");
    let mut w = vec![0.0; y.len()];
    for (pos, &orig) in order.perm.iter().enumerate() {
        w[orig] = w_sorted[pos] * crate::numerics::sign_pos(y[orig]);
    }
    (crate::numerics::sign_pos(x) * v, w)
}

/// Runs every suite with the given sizes; the tie-rule suite honors the
/// fault mode.
pub fn run_all(
    trials: usize,
    max_m: usize,
    max_p: usize,
    seed: u64,
    fault: Fault,
) -> Vec<CheckReport> {
    vec![
        single_prox_equivalence(trials, max_m, seed),
        multi_prox_equivalence(trials, max_p, max_m, seed ^ 1),
        single_output_reduction(trials / 10 + 1, max_m, seed ^ 2),
        stationarity(trials, max_p, max_m, seed ^ 3),
        sparsity_bounds(trials, max_p, max_m, seed ^ 4),
        h_monotonicity(trials, max_p, max_m, seed ^ 5),
        feasibility_monotonicity(trials, max_p, max_m, seed ^ 6),
        mfb_structure(trials, max_p, max_m, seed ^ 7),
        sign_equivariance(trials, max_p, max_m, seed ^ 8),
        tie_rule(fault),
    ]
}
