fn main() -> std::process::ExitCode {
    qjam::cli::main()
}
