#![no_main]

use homlab::io::{read_couples, CouplesSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_couples(data, &CouplesSpec::default());
});
