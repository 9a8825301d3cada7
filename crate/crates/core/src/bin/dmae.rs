fn main() {
    std::process::exit(dmae_core::cli::main(std::env::args_os()));
}
