fn main() {
    std::process::exit(motvol::cli::main());
}
