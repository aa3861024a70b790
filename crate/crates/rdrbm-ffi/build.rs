use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let out_header = PathBuf::from(std::env::var("OUT_DIR").unwrap()).join("rdrbm.h");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("reading cbindgen.toml");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("generating C header")
        .write_to_file(&out_header);

    // Keep the committed header in sync when the checkout is writable. The
    // header_matches_generated test catches drift on read-only builds.
    let committed = crate_dir.join("include").join("rdrbm.h");
    let generated = std::fs::read(&out_header).unwrap();
    if std::fs::read(&committed).ok().as_deref() != Some(generated.as_slice()) {
        let _ = std::fs::create_dir_all(committed.parent().unwrap());
        let _ = std::fs::write(&committed, &generated);
    }

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
