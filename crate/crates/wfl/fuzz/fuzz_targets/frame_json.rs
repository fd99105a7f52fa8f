#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(frame) = wfl::io::frame_from_json_str(text) else { return };

    // Accepted frames must survive a bit-exact write/read cycle.
    let rendered = wfl::io::frame_to_json_string(&frame);
    let reloaded = wfl::io::frame_from_json_str(&rendered).expect("rendered frame reparses");
    assert_eq!(frame, reloaded);

    // Small accepted frames must be safe to analyze.
    if frame.dim() <= 8 && frame.len() <= 32 {
        let _ = frame.frame_bounds();
    }
});
