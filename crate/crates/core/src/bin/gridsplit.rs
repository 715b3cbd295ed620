fn main() -> std::process::ExitCode {
    gridsplit::cli::main()
}
