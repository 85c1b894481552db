fn main() {
    std::process::exit(epforge::cli::run());
}
