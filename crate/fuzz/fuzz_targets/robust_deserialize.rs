#![no_main]

use libfuzzer_sys::fuzz_target;

use nextbit_codec::container::{deserialize_robust, serialize_robust};

fuzz_target!(|data: &[u8]| {
    if let Ok(enc) = deserialize_robust(data) {
        assert_eq!(serialize_robust(&enc), data);
    }
});
