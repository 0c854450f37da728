//! Shift-invariance and windowing behavior of the driving paths: the properties that make
//! "the same noise, seen from a later time" a well-defined and cheap operation.

use partdiss_core::noise::{Channel, CovarianceSpec, NoiseGrid, WienerPath};
use partdiss_core::spectral::Basis;

mod common;

fn basis() -> Basis {
    Basis::new(1, 8, 24, 1.0, 3.0).unwrap()
}

fn path(seed: u64, h: f64, t_min: f64, t_max: f64) -> WienerPath {
    WienerPath::new(
        &basis(),
        NoiseGrid::new(h, t_min, t_max, seed).unwrap(),
        CovarianceSpec::inverse_power(Channel::One, 2.0),
        CovarianceSpec::inverse_power(Channel::Two, 1.0),
    )
    .unwrap()
}

#[test]
fn shifts_compose_bitwise_on_increments() {
    let p = path(42, 0.25, -8.0, 8.0);
    let ab = p.shift(1.5).unwrap().shift(2.25).unwrap();
    let once = p.shift(3.75).unwrap();
    for ch in [Channel::One, Channel::Two] {
        for k in 0..8 {
            for j in -4..4 {
                assert_eq!(
                    ab.increment(ch, k, j).unwrap().to_bits(),
                    once.increment(ch, k, j).unwrap().to_bits()
                );
            }
        }
    }
}

#[test]
fn shifted_value_is_the_rebased_difference() {
    let p = path(7, 0.125, -4.0, 4.0);
    let s = 1.375;
    let shifted = p.shift(s).unwrap();
    for ch in [Channel::One, Channel::Two] {
        for k in [0usize, 3, 7] {
            for t in [-0.5, 0.25, 1.0, 2.0] {
                let lhs = shifted.value(ch, k, t).unwrap();
                let rhs = p.value(ch, k, t + s).unwrap() - p.value(ch, k, s).unwrap();
                let scale = rhs.abs().max(1e-3);
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * scale,
                    "ch {ch:?} mode {k} t {t}: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn path_vanishes_at_origin_after_any_shift() {
    let p = path(19, 0.25, -4.0, 4.0);
    for s in [-2.0, -0.25, 0.0, 1.5] {
        let q = p.shift(s).unwrap();
        for ch in [Channel::One, Channel::Two] {
            assert_eq!(q.value(ch, 2, 0.0).unwrap(), 0.0);
        }
    }
}

#[test]
fn widening_the_window_preserves_every_increment() {
    let narrow = path(99, 0.0625, -1.0, 1.0);
    let wide = path(99, 0.0625, -16.0, 16.0);
    for ch in [Channel::One, Channel::Two] {
        for k in 0..8 {
            for j in -16..16 {
                assert_eq!(
                    narrow.increment(ch, k, j).unwrap().to_bits(),
                    wide.increment(ch, k, j).unwrap().to_bits()
                );
            }
        }
    }
}

#[test]
fn channels_and_modes_draw_distinct_noise() {
    let p = path(3, 0.25, -2.0, 2.0);
    let a: Vec<f64> = (-8..8).map(|j| p.increment(Channel::One, 0, j).unwrap()).collect();
    let b: Vec<f64> = (-8..8).map(|j| p.increment(Channel::Two, 0, j).unwrap()).collect();
    let c: Vec<f64> = (-8..8).map(|j| p.increment(Channel::One, 1, j).unwrap()).collect();
    assert!(a.iter().zip(&b).any(|(x, y)| x != y));
    assert!(a.iter().zip(&c).any(|(x, y)| x != y));
    // empirical correlation between channels stays small over a longer stretch
    let long = path(3, 0.0625, -64.0, 64.0);
    let xs: Vec<f64> = (-1000..1000).map(|j| long.increment(Channel::One, 0, j).unwrap()).collect();
    let ys: Vec<f64> = (-1000..1000).map(|j| long.increment(Channel::Two, 0, j).unwrap()).collect();
    let mx = common::mean(&xs);
    let my = common::mean(&ys);
    let cov: f64 =
        xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() - 1) as f64;
    let corr = cov / (common::variance(&xs) * common::variance(&ys)).sqrt();
    assert!(corr.abs() < 0.1, "corr {corr}");
}

#[test]
fn increment_variance_tracks_intensity() {
    // mode intensities delta_k = lambda_k^{-2}; sample variance must match delta_k * h
    let h = 0.5;
    let p = path(11, h, -512.0, 512.0);
    for k in [0usize, 2] {
        let xs: Vec<f64> = (-1024..1024).map(|j| p.increment(Channel::One, k, j).unwrap()).collect();
        let lam = ((k + 1) * (k + 1)) as f64;
        let want = lam.powi(-2) * h;
        let got = common::variance(&xs);
        let se = want * (2.0f64 / (xs.len() as f64 - 1.0)).sqrt();
        assert!((got - want).abs() < 4.0 * se, "mode {k}: var {got} vs {want}");
    }
}
