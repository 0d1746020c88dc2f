#![no_main]

use cqoa::algebras::parse_selector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = parse_selector(src) {
        assert_eq!(parse_selector(&s.to_string()).unwrap(), s);
    }
});
