mod common;

use cfn::model::{decompose, forward};
use common::{instance, reference_forward};

#[test]
fn decompose_reproduces_forward() {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let inst = instance(1000 + seed, 0, 0.0);
        let out = forward(&inst.params, &inst.x, None).unwrap();
        let (u, v) = decompose(&inst.params, &inst.x).unwrap();
        assert_eq!(v.ncols(), u.len());
        for (j, o) in out.iter().enumerate() {
            let z: f64 = (0..u.len()).map(|c| v[(j, c)] * u[c]).sum();
            let d = (z.tanh() - o).abs();
            worst = worst.max(d);
            assert!(d <= 1e-12, "seed {seed} output {j}: {d:e}");
        }
    }
    eprintln!("worst |decompose - forward| = {worst:e}");
}

#[test]
fn decompose_rejects_side_information() {
    let inst = instance(5, 2, 0.0);
    assert!(decompose(&inst.params, &inst.x).is_err());
}

#[test]
fn forward_matches_straight_line_evaluation() {
    for seed in 0..60u64 {
        let inst = instance(2000 + seed, (seed % 4) as u8, 0.0);
        let side = inst.side.as_deref();
        let got = forward(&inst.params, &inst.x, side).unwrap();
        let want = reference_forward(&inst.params, &inst.x, side);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-13, "seed {seed}");
        }
    }
}

#[test]
fn forward_is_deterministic_and_pure() {
    let inst = instance(11, 3, 0.0);
    let side = inst.side.as_deref();
    let before = inst.params.clone();
    let a = forward(&inst.params, &inst.x, side).unwrap();
    let b = forward(&inst.params, &inst.x, side).unwrap();
    assert_eq!(a, b);
    assert_eq!(before.weights(), inst.params.weights());
}

#[test]
fn six_dimensional_hand_instance() {
    // one hidden unit, hidden-layer side info of width 1
    use cfn::model::{AutoencoderParams, SparseVector};
    let mut p = AutoencoderParams::zeros(6, 1, 0, 1).unwrap();
    for c in 0..6 {
        *p.w1_mut(0, c) = 0.1 * (c as f64 + 1.0);
    }
    p.b1_mut()[0] = -0.2;
    for j in 0..6 {
        *p.w2_mut(j, 0) = 0.5 - 0.2 * j as f64;
        *p.w2_mut(j, 1) = 0.3;
        p.b2_mut()[j] = 0.05 * j as f64;
    }
    let x = SparseVector::new(6, vec![(1, 0.5), (4, -1.0)]).unwrap();
    // hidden = tanh(0.2*0.5 + 0.5*(-1) - 0.2) = tanh(-0.6)
    let u = (-0.6f64).tanh();
    let side = [0.8];
    let out = forward(&p, &x, Some(&side)).unwrap();
    for (j, o) in out.iter().enumerate() {
        let want = ((0.5 - 0.2 * j as f64) * u + 0.3 * 0.8 + 0.05 * j as f64).tanh();
        assert!((o - want).abs() < 1e-15);
    }
}
