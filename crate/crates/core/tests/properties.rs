//! Property tests for the structural invariants that hold on arbitrary
//! inputs, not just the seeded random suites.

use proptest::prelude::*;

use pathprox::baselines::project_l1_ball;
use pathprox::numerics::{apply_signs, magnitude_order};
use pathprox::pathnorm::path_norm_1;
use pathprox::prox_single::{prox_single, ProxInputSingle};
use pathprox::{DenseMatrix, ShallowParams};

fn finite_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 0..max_len)
}

proptest! {
    #[test]
    fn magnitude_order_reconstructs_the_multiset(v in finite_vec(64)) {
        let o = magnitude_order(&v).unwrap();
        // permutation is a bijection
        let mut seen = vec![false; v.len()];
        for &i in &o.perm {
            prop_assert!(!seen[i]);
            seen[i] = true;
        }
        // sorted_abs is the permuted |v|, non-increasing
        for (k, &i) in o.perm.iter().enumerate() {
            prop_assert_eq!(o.sorted_abs[k], v[i].abs());
        }
        for pair in o.sorted_abs.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
        // prefix sums agree with the l1 norm at the stated tolerance
        prop_assert_eq!(o.prefix.len(), v.len() + 1);
        prop_assert_eq!(o.prefix[0], 0.0);
        let l1: f64 = v.iter().map(|t| t.abs()).sum();
        prop_assert!((o.prefix[v.len()] - l1).abs() <= 1e-12 * l1.max(1.0) * (v.len().max(1) as f64));
    }

    #[test]
    fn apply_signs_magnitude_and_sign(v in finite_vec(32)) {
        let mags: Vec<f64> = v.iter().map(|t| t.abs()).collect();
        let out = apply_signs(&mags, &v).unwrap();
        for (o, t) in out.iter().zip(&v) {
            prop_assert_eq!(o.abs(), t.abs());
            if *t != 0.0 {
                prop_assert_eq!(*o, *t);
            }
        }
    }

    #[test]
    fn l1_projection_invariants(
        u in prop::collection::vec(-100.0f64..100.0, 1..16),
        v in prop::collection::vec(-100.0f64..100.0, 1..16),
        r in 0.01f64..50.0,
    ) {
        let n = u.len().min(v.len());
        let (u, v) = (&u[..n], &v[..n]);
        let pu = project_l1_ball(u, r);
        let pv = project_l1_ball(v, r);
        prop_assert!(pu.iter().map(|t| t.abs()).sum::<f64>() <= r + 1e-9);
        // idempotent
        let ppu = project_l1_ball(&pu, r);
        for (a, b) in pu.iter().zip(&ppu) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // nonexpansive
        let d = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        prop_assert!(d(&pu, &pv) <= d(u, v) + 1e-9);
    }

    #[test]
    fn path_norm_invariant_under_per_unit_rescaling(
        vw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 1..8),
        c in 0.01f64..100.0,
        unit in any::<prop::sample::Index>(),
    ) {
        // one hidden unit per tuple: v entry and a length-2 w row
        let n = vw.len();
        let mut v = DenseMatrix::zeros(n, 1);
        let mut w = DenseMatrix::zeros(n, 2);
        for (i, (a, b, d)) in vw.iter().enumerate() {
            v.set(i, 0, *a);
            w.set(i, 0, *b);
            w.set(i, 1, *d);
        }
        let before = path_norm_1(&ShallowParams::new(v.clone(), w.clone()).unwrap());
        let i = unit.index(n);
        for t in w.row_mut(i) {
            *t *= c;
        }
        v.set(i, 0, v.get(i, 0) / c);
        let after = path_norm_1(&ShallowParams::new(v, w).unwrap());
        prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
    }

    #[test]
    fn prox_single_sign_equivariance_and_order(
        x in -20.0f64..20.0,
        y in prop::collection::vec(-20.0f64..20.0, 1..10),
        lam_idx in 0usize..5,
    ) {
        let lam = [0.05, 0.3, 0.9, 1.0, 2.0][lam_idx];
        let (v, w) = prox_single(&ProxInputSingle { x, y: y.clone(), lam }).unwrap();
        let neg = ProxInputSingle { x: -x, y: y.iter().map(|t| -t).collect(), lam };
        let (nv, nw) = prox_single(&neg).unwrap();
        prop_assert_eq!(nv, -v);
        for (a, b) in nw.iter().zip(&w) {
            prop_assert_eq!(*a, -*b);
        }
        // larger |y_j| never gets a smaller magnitude in w
        for j in 0..y.len() {
            for l in 0..y.len() {
                if w[j].abs() > w[l].abs() {
                    prop_assert!(y[j].abs() >= y[l].abs() - 1e-12);
                }
            }
        }
    }
}
