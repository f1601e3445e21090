fn main() {
    std::process::exit(phogsvm::cli::run(std::env::args_os()));
}
