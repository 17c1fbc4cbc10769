fn main() {
    // System OpenBLAS ships the full LAPACK interface (dsyevd_) on this target.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
