#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = wfl::io::parse_lambda_list(text) {
        assert!(!values.is_empty());
        assert!(values.iter().all(|x| x.is_finite()));
    }
});
