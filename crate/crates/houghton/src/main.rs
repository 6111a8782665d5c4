fn main() {
    std::process::exit(houghton::cli::run());
}
