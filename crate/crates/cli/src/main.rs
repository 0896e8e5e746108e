fn main() {
    std::process::exit(hartree_cli::commands::main_with_args(std::env::args_os()));
}
