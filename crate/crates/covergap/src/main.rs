fn main() -> std::process::ExitCode {
    covergap::cli::main()
}
