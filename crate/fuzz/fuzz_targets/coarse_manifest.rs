#![no_main]

use libfuzzer_sys::fuzz_target;
use spectral_schwarz::coarse::CoarseManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(manifest) = CoarseManifest::from_json(text) {
        assert_eq!(manifest.l_i.iter().sum::<usize>(), manifest.coarse_dim);
    }
});
