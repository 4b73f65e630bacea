fn main() {
    std::process::exit(hgk_core::cli::run_main());
}
