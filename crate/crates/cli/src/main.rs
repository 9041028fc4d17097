fn main() {
    std::process::exit(bakesynth_cli::run(std::env::args_os()));
}
