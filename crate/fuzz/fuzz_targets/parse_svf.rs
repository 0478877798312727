#![no_main]

use isostream_core::volume::{encode_svf, parse_svf};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(grid) = parse_svf(data) {
        let again = parse_svf(&encode_svf(&grid)).expect("re-encoded grid must parse");
        assert_eq!(again, grid);
    }
});
