fn main() {
    std::process::exit(doa_resolution::cli::run(std::env::args_os()));
}
