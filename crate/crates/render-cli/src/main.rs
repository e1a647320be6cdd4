fn main() {
    std::process::exit(render_cli::cli::main_with(std::env::args_os().collect()));
}
