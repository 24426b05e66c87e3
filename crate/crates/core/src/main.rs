fn main() {
    std::process::exit(mtfix::cli::dispatch(std::env::args_os()));
}
