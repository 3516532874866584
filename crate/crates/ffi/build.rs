use std::path::Path;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let crate_path = Path::new(&crate_dir);
    let config = cbindgen::Config::from_file(crate_path.join("cbindgen.toml")).expect("cbindgen.toml");
    let out_dir = crate_path.join("include");
    std::fs::create_dir_all(&out_dir).expect("include directory");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation")
        .write_to_file(out_dir.join("qrac.h"));
}
