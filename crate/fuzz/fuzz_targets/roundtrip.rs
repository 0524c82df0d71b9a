#![no_main]
use libfuzzer_sys::fuzz_target;
use robust_supplier::instance::InstanceFile;

// Anything that parses must print to text that parses back to the same file.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = InstanceFile::parse(text) {
        let printed = file.to_text();
        let reparsed = InstanceFile::parse(&printed)
            .unwrap_or_else(|e| panic!("printed file does not parse: {e}\n{printed}"));
        assert_eq!(file, reparsed);
    }
});
