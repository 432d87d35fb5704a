fn main() {
    std::process::exit(usertype_cli::dispatch(std::env::args_os()));
}
