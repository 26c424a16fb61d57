//! Regenerates include/ou_hyper.h from the extern "C" surface. The header
//! is committed, so consumers never need cbindgen; when it is available the
//! build keeps the file in sync (write_to_file leaves an unchanged file
//! untouched, so no rebuild loop).

use std::path::Path;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = Path::new(&crate_dir).join("include").join("ou_hyper.h");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(e) => {
            println!("cargo:warning=cbindgen failed ({e}); keeping the committed header");
        }
    }
}
