fn main() {
    std::process::exit(edgeworth_rearrange::cli::run(std::env::args_os()));
}
