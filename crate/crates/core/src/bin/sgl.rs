fn main() {
    std::process::exit(sgl_core::cli::run(std::env::args_os()));
}
