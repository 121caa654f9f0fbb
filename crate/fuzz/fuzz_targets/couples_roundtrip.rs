#![no_main]

use homlab::io::{read_couples, write_couples, CouplesSpec};
use libfuzzer_sys::fuzz_target;

// Anything the reader accepts must survive a write/read cycle unchanged.
fuzz_target!(|data: &[u8]| {
    let spec = CouplesSpec::default();
    let Ok(panel) = read_couples(data, &spec) else {
        return;
    };
    let mut first = Vec::new();
    write_couples(&panel, &mut first).expect("write accepted panel");
    let back = read_couples(first.as_slice(), &spec).expect("reread written panel");
    let mut second = Vec::new();
    write_couples(&back, &mut second).expect("write reread panel");
    assert_eq!(first, second);
});
