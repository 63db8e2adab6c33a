fn main() {
    std::process::exit(streamprep::cli::run(std::env::args_os()));
}
