fn main() {
    if let Err(e) = orbitforge::exec::init_thread_pool_from_env() {
        eprintln!("error: {e}");
        std::process::exit(orbitforge::cli::EXIT_CONFIG);
    }
    std::process::exit(orbitforge::cli::run(std::env::args_os()));
}
