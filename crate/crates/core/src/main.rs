fn main() {
    std::process::exit(sievebound::cli::run(std::env::args_os()));
}
