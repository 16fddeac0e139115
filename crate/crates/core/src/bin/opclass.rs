fn main() -> std::process::ExitCode {
    opclass::cli::main()
}
