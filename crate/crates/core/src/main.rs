fn main() -> std::process::ExitCode {
    fairmetric::cli::main()
}
