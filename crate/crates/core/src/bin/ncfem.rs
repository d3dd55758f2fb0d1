fn main() {
    std::process::exit(aniso_ncfem::cli::main_with_args(std::env::args_os()));
}
