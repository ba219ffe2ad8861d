fn main() {
    std::process::exit(sympcalc::cli::cli_main(std::env::args_os()));
}
