#![no_main]

use libfuzzer_sys::fuzz_target;
use spectral_schwarz::harness::parse_vary;

fuzz_target!(|data: &str| {
    if let Ok((key, values)) = parse_vary(data) {
        assert!(!key.is_empty());
        assert!(!values.is_empty());
    }
});
