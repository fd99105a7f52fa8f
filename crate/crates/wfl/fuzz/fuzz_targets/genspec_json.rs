#![no_main]

use libfuzzer_sys::fuzz_target;
use wfl::generators::GenKind;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = wfl::io::genspec_from_json_str(text) else { return };

    // Parsed specs passed validation; generation must not panic for desk-size
    // shapes (woven pairs stay exponential in count, so keep them tiny).
    let small = spec.dim <= 3 && spec.count <= 6;
    let cheap = spec.kind != GenKind::WovenPair || spec.count <= 4;
    if small && cheap {
        let _ = wfl::generators::generate(&spec);
    }
});
