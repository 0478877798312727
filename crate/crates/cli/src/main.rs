fn main() {
    std::process::exit(isostream_cli::main_with_args(std::env::args_os()));
}
