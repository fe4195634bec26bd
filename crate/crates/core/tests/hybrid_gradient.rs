//! End-to-end hybrid gradient against central finite differences of the loss.

use qmlshots_core::hybrid::{loss_and_accuracy, HybridModel, HybridNet, Layout, Mode, NUM_PARAMS};
use qmlshots_core::rng::Stream;

const H: f64 = 1e-4;

fn image(seed: u64) -> Vec<f64> {
    let mut s = Stream::from_seed(seed);
    (0..784).map(|_| if s.uniform() < 0.25 { s.uniform() } else { 0.0 }).collect()
}

fn loss(net: &HybridNet, model: &HybridModel, img: &[f64], label: usize) -> f64 {
    let logits = net.logits(model, img, Mode::Exact, &mut Stream::from_seed(0)).unwrap();
    loss_and_accuracy(&logits, label).0
}

fn check(net: &HybridNet, model_seed: u64, image_seed: u64, label: usize, coords: impl Iterator<Item = usize>) -> usize {
    let model = HybridModel::init(model_seed);
    let img = image(image_seed);
    let grad = net.backward(&model, &img, label, Mode::Exact, &mut Stream::from_seed(0)).unwrap().grad;
    let mut probe = model.clone();
    let mut checked = 0;
    for k in coords {
        let orig = probe.params()[k];
        probe.params_mut()[k] = orig + H;
        let up = loss(net, &probe, &img, label);
        probe.params_mut()[k] = orig - H;
        let down = loss(net, &probe, &img, label);
        probe.params_mut()[k] = orig;
        let fd = (up - down) / (2.0 * H);
        let err = (grad[k] - fd).abs();
        assert!(
            err <= 1e-4 * fd.abs().max(grad[k].abs()) || err <= 1e-6,
            "coordinate {k}: analytic {} vs finite difference {fd}",
            grad[k]
        );
        checked += 1;
    }
    checked
}

/// Every PQC, fc2 and fc3 parameter plus a strided sample of fc1.
fn coords() -> impl Iterator<Item = usize> {
    Layout::FC1_W.step_by(97).chain(Layout::FC1_B).chain(Layout::FC2_W.start..NUM_PARAMS)
}

#[test]
fn matches_finite_differences() {
    let net = HybridNet::default();
    for (m, i, label) in [(11, 21, 3), (12, 22, 7), (13, 23, 0)] {
        assert!(check(&net, m, i, label, coords()) > 5000);
    }
}

#[test]
fn matches_finite_differences_with_second_relu() {
    let net = HybridNet::new(true);
    check(&net, 14, 24, 5, coords());
}

#[test]
fn batch_mean_of_duplicates_equals_single() {
    let net = HybridNet::default();
    let model = HybridModel::init(2);
    let img = image(3);
    let g = net.backward(&model, &img, 1, Mode::Exact, &mut Stream::from_seed(0)).unwrap().grad;
    let mean: Vec<f64> = g.iter().map(|x| (x + x) / 2.0).collect();
    assert_eq!(mean, g);
}
