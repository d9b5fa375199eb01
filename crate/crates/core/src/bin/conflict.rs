fn main() {
    std::process::exit(conflict_sets::cli::run(std::env::args_os()));
}
