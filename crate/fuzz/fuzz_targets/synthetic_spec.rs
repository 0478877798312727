#![no_main]

use isostream_core::volume::{generate_synthetic, SyntheticSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<SyntheticSpec>(data) else { return };
    // keep allocations small
    if spec.dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).is_none_or(|n| n > 1 << 16) {
        return;
    }
    if let Ok(grid) = generate_synthetic(&spec) {
        assert_eq!(grid.dims(), spec.dims);
    }
});
