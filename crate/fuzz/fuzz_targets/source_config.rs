#![no_main]

use libfuzzer_sys::fuzz_target;

use nextbit_codec::source::parse_source_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing must never panic; a parsed source must answer basic queries.
    if let Ok(src) = parse_source_config(text) {
        let _ = src.exact_conditional(&[], false);
        let _ = src.sample(1);
    }
});
