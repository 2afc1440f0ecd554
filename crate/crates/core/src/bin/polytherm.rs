fn main() -> std::process::ExitCode {
    polytherm::cli::main_with_args(std::env::args_os())
}
