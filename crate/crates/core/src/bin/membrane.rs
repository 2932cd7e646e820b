fn main() -> std::process::ExitCode {
    membrane_stress::cli::main()
}
