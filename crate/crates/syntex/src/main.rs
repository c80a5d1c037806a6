fn main() {
    std::process::exit(syntex::cli::main_with(std::env::args_os()));
}
