fn main() {
    std::process::exit(wncs::cli::main());
}
