#![no_main]

use cqoa::syntax::parse_coefficient;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = parse_coefficient(src) {
        let text = c.to_string();
        assert_eq!(parse_coefficient(&text).unwrap(), c, "{text}");
    }
});
