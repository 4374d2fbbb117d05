//! Shared fixtures for the criterion benches.

use confounder_lab::model::{derive_seed, sample_driver, sample_proxy};
use confounder_lab::{DriverParams, ProxyParams};

pub const FIXTURE_SEED: u64 = 0x5eed;

pub fn proxy_batch(n: u64) -> Vec<ProxyParams> {
    (0..n)
        .map(|i| sample_proxy(derive_seed(FIXTURE_SEED, i)))
        .collect()
}

pub fn driver_batch(n: u64) -> Vec<DriverParams> {
    (0..n)
        .map(|i| sample_driver(derive_seed(FIXTURE_SEED, i)))
        .collect()
}
