use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DMFLOW_LOG", "warn")).init();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = dmflow_core::cli::main_with_args(std::env::args_os(), &mut out);
    let _ = out.flush();
    std::process::exit(code);
}
