fn main() {
    std::process::exit(tvcs::cli::main());
}
