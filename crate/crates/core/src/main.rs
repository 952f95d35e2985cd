fn main() {
    std::process::exit(coinflip::cli::dispatch(std::env::args_os()));
}
