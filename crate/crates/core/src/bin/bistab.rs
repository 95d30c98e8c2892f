fn main() {
    std::process::exit(bistab_core::cli_io::main_entry(std::env::args_os()));
}
