#![no_main]
use libfuzzer_sys::fuzz_target;
use robust_supplier::solution_file::SolutionFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = SolutionFile::parse(text) {
            let again = SolutionFile::parse(&file.to_text()).unwrap();
            assert_eq!(file, again);
        }
    }
});
