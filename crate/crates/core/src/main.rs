fn main() {
    std::process::exit(mech::cli::main_with_args(std::env::args_os()));
}
