#![no_main]
use libfuzzer_sys::fuzz_target;
use robust_supplier::instance::InstanceFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = InstanceFile::parse(text) {
        let _ = file.clone().into_instance(false);
        let _ = file.into_instance(true);
    }
});
