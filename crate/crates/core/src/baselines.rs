//! Baseline regularizer operators: elementwise soft thresholding (prox of
//! the l1 norm) and Euclidean projection of each matrix row onto an l1
//! ball, which enforces a hard bound on the l-infinity operator norm
//! (maximum row l1 norm).

use crate::numerics::DenseMatrix;

/// Hard constraint `max row l1 norm <= radius`.
#[derive(Debug, Clone, Copy)]
pub struct ParsevalConstraint {
    pub radius: f64,
}

impl ParsevalConstraint {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive, got {radius}");
        Self { radius }
    }
}

/// `out_i = sign(z_i) * max(|z_i| - tau, 0)`.
pub fn soft_threshold(z: &[f64], tau: f64) -> Vec<f64> {
    assert!(tau >= 0.0, "threshold must be nonnegative, got {tau}");
    z.iter()
        .map(|&t| {
            let m = t.abs() - tau;
            if m <= 0.0 {
                0.0
            } else if t < 0.0 {
                -m
            } else {
                m
            }
        })
        .collect()
}

/// Euclidean projection onto `{u : ||u||_1 <= r}` via the sorted-threshold
/// rule: points already inside (including the boundary) come back
/// unchanged, otherwise the unique theta with
/// `sum_i max(|v_i| - theta, 0) = r` shrinks every entry toward zero.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    assert!(r > 0.0, "radius must be positive, got {r}");
    let l1: f64 = v.iter().map(|t| t.abs()).sum();
    if l1 <= r {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|t| t.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (k, &mk) in mags.iter().enumerate() {
        prefix += mk;
        let t = (prefix - r) / (k + 1) as f64;
        if mk > t {
            theta = t;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&t| {
            let m = t.abs() - theta;
            if m <= 0.0 {
                0.0
            } else if t < 0.0 {
                -m
            } else {
                m
            }
        })
        .collect()
}

/// Projects each row of `w` onto the l1 ball of the given radius, so the
/// result satisfies `||W||_inf <= radius`.
pub fn project_linf_opnorm(w: &DenseMatrix, c: &ParsevalConstraint) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(w.rows(), w.cols());
    for i in 0..w.rows() {
        out.row_mut(i).copy_from_slice(&project_l1_ball(w.row(i), c.radius));
    }
    out
}
