fn main() {
    std::process::exit(semiclab::cli::run(std::env::args_os()));
}
