fn main() {
    std::process::exit(asd::cli::run());
}
