#![no_main]

use libfuzzer_sys::fuzz_target;
use spectral_schwarz::harness::ExperimentConfig;

fuzz_target!(|data: &str| {
    let Ok(cfg) = ExperimentConfig::from_json(data) else {
        return;
    };
    // from_json validates, so the serialized form must load again.
    let text = cfg.to_json().expect("accepted config must serialize");
    let again = ExperimentConfig::from_json(&text).expect("round trip");
    assert_eq!(again.to_json().unwrap(), text);
});
