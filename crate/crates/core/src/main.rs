use std::process::ExitCode;

fn main() -> ExitCode {
    qfiport::cli::main()
}
