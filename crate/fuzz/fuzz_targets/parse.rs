#![no_main]

use cqoa::syntax::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Err(e) = parse(src) {
        let lines = src.split('\n').count();
        assert!(e.pos.line >= 1 && e.pos.line <= lines, "{e}");
    }
});
