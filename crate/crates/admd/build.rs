fn main() {
    // ndarray-linalg is used backend-agnostic; link the system OpenBLAS,
    // which bundles BLAS, CBLAS and LAPACK.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
