fn main() {
    std::process::exit(qlevy::cli::main());
}
