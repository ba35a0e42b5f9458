fn main() {
    std::process::exit(amc_cli::main_with(std::env::args().collect()));
}
