fn main() {
    std::process::exit(quant_core::cli::main());
}
