#![no_main]

use libfuzzer_sys::fuzz_target;

use nextbit_codec::container::{deserialize, serialize};

fuzz_target!(|data: &[u8]| {
    // Must never panic; accepted inputs must be canonical.
    if let Ok(enc) = deserialize(data) {
        assert_eq!(serialize(&enc), data);
    }
});
