fn main() {
    std::process::exit(trident::cli::main_with_args(std::env::args_os()));
}
