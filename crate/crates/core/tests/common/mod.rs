#![allow(dead_code)]

use bistab_core::SystemParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Baseline rates with η₁, η₂ ∈ (0, 5] and N log-uniform on [5·10³, 10⁶].
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let eta1 = 5.0 * (1.0 - rng.gen::<f64>());
    let eta2 = 5.0 * (1.0 - rng.gen::<f64>());
    let n = 10f64.powf(rng.gen_range(5e3f64.log10()..=6.0));
    SystemParams::baseline(n, eta1, eta2)
}

/// Prints the one-line verdict and fails the test on FAIL.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!("acceptance {id:>2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}
