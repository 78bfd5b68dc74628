//! Analytic gradients vs central finite differences of the batch loss.
//!
//! Instances are drawn with `f ∈ {3..8}`, `c ∈ {2..5}`, `d ∈ {2..8}` and
//! cycle through every readout mode and layer count 1..2. Seeds are fixed:
//! the whole stack (RNG, libm) is deterministic, so these checks are
//! byte-stable across runs and platforms.

use cola_core::gradcheck::{check_gradients, random_pairs, DEFAULT_STEP};
use cola_core::model::{init_params, ForwardConfig, ReadoutMode};
use cola_core::rng::SeedStream;

const TOLERANCE: f64 = 1e-4;

fn run_instance(seed: u64, layers: usize, readout: ReadoutMode, final_act: bool) -> (f64, usize) {
    let mut rng = SeedStream::new(seed, 40);
    let f = 3 + rng.next_below(6);
    let c = 2 + rng.next_below(4);
    let d = 2 + rng.next_below(7);
    let (pairs, labels) = random_pairs(f, c, 4, &mut rng);
    let params = init_params(f, d, layers, seed ^ 0x5eed).unwrap();
    let config = ForwardConfig { readout, activate_final_layer: final_act };
    let report = check_gradients(&params, &config, &pairs, &labels, DEFAULT_STEP).unwrap();
    (report.max_rel_err, report.checked)
}

#[test]
fn gradients_match_finite_differences_across_instances() {
    let modes = [
        ReadoutMode::Average,
        ReadoutMode::Max,
        ReadoutMode::Min,
        ReadoutMode::WeightedAverage,
    ];
    let mut total_checked = 0;
    for instance in 0..24u64 {
        let readout = modes[(instance % 4) as usize];
        let layers = 1 + (instance % 2) as usize;
        let (max_rel_err, checked) = run_instance(1000 + instance, layers, readout, true);
        assert!(
            max_rel_err < TOLERANCE,
            "instance {instance} ({:?}, L={layers}): max relative error {max_rel_err:.3e}",
            readout
        );
        total_checked += checked;
    }
    assert!(total_checked > 1000);
}

#[test]
fn gradients_match_without_final_activation() {
    for instance in 0..4u64 {
        let (max_rel_err, _) = run_instance(2000 + instance, 1, ReadoutMode::Average, false);
        assert!(
            max_rel_err < TOLERANCE,
            "instance {instance}: max relative error {max_rel_err:.3e}"
        );
    }
}

#[test]
fn gradients_match_on_two_layer_weighted_readout() {
    let (max_rel_err, checked) = run_instance(3001, 2, ReadoutMode::WeightedAverage, true);
    assert!(max_rel_err < TOLERANCE, "max relative error {max_rel_err:.3e}");
    assert!(checked > 0);
}
