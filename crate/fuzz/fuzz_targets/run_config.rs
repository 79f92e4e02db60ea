#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| popcent_cli::fuzzing::run_config(data));
