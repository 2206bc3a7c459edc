use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR"));
    let src = crate_dir.join("src").join("lib.rs");
    println!("cargo:rerun-if-changed={}", src.display());

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("WBCIP_H".into()),
        cpp_compat: true,
        documentation: true,
        enumeration: cbindgen::EnumConfig {
            rename_variants: cbindgen::RenameRule::QualifiedScreamingSnakeCase,
            ..Default::default()
        },
        ..Default::default()
    };

    cbindgen::Builder::new()
        .with_config(config)
        .with_src(&src)
        .generate()
        .expect("unable to generate C bindings")
        .write_to_file(crate_dir.join("include").join("wbcip.h"));
}
