fn main() {
    std::process::exit(walsh_fup_cli::run(std::env::args_os()));
}
