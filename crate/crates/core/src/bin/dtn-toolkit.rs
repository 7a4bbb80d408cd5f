fn main() {
    std::process::exit(dtn_toolkit::cli::main());
}
