fn main() {
    std::process::exit(spdekit::cli::run_from(std::env::args_os()));
}
