fn main() {
    // The QZ (dgges) and complex Schur (zgees) factorizations are taken from
    // LAPACK; OpenBLAS ships the full LAPACK symbol set on this platform.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
