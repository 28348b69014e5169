fn main() {
    std::process::exit(gridvad::cli::main());
}
