#![no_main]

use homlab::io::read_income;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_income(data);
});
