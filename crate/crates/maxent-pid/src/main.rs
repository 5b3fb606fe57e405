fn main() {
    std::process::exit(maxent_pid::cli::main());
}
