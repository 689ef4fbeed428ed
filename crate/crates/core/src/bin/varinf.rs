fn main() {
    std::process::exit(varinf::cli::run(std::env::args_os()));
}
