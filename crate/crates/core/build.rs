fn main() {
    // LAPACK provider: system OpenBLAS (libopenblas-dev).
    println!("cargo:rustc-link-lib=dylib=openblas");
}
