mod common;

use common::*;
use locblur::motion::{estimate_flow, FlowParams, MotionField};

fn interior_median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn epe(flow: &MotionField, u: f64, v: f64) -> f64 {
    let m = 8;
    interior_median((m..flow.height() - m).flat_map(|y| {
        (m..flow.width() - m).map(move |x| {
            let [a, b] = flow.at(x, y);
            ((a - u).powi(2) + (b - v).powi(2)).sqrt()
        })
    }))
}

#[test]
fn integer_translations_are_recovered() {
    let p = FlowParams::default();
    for (k, (dx, dy)) in [(1, 0), (2, 0), (0, 3), (4, 0), (1, 1), (4, 2)].into_iter().enumerate() {
        let (a, b) = shifted_pair(256, 256, dx, dy, 10 + k as u64);
        let f = estimate_flow(&a, &b, &p).unwrap();
        let e = epe(&f, dx as f64, dy as f64);
        assert!(e < 0.5, "shift ({dx},{dy}): median EPE {e}");
    }
}

#[test]
fn forward_backward_consistency() {
    let p = FlowParams::default();
    let (a, b) = shifted_pair(192, 160, 3, 1, 77);
    let fwd = estimate_flow(&a, &b, &p).unwrap();
    let bwd = estimate_flow(&b, &a, &p).unwrap();
    let m = 8;
    let med = interior_median((m..160 - m).flat_map(|y| {
        let (fwd, bwd) = (&fwd, &bwd);
        (m..192 - m).map(move |x| {
            let ([u1, v1], [u2, v2]) = (fwd.at(x, y), bwd.at(x, y));
            ((u1 + u2).powi(2) + (v1 + v2).powi(2)).sqrt()
        })
    }));
    assert!(med < 0.5, "forward/backward median {med}");
}

#[test]
fn identical_frames_give_zero_flow() {
    let a = texture(128, 128, 9);
    let f = estimate_flow(&a, &a, &FlowParams::default()).unwrap();
    assert!(f.max_norm() < 1e-3);
}

#[test]
fn undersized_frames_are_rejected() {
    let a = texture(12, 40, 1);
    assert!(matches!(
        estimate_flow(&a, &a, &FlowParams::default()),
        Err(locblur::Error::Config(_))
    ));
}
