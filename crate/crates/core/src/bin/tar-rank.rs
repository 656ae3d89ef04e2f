fn main() {
    std::process::exit(tar_rank::cli::main_with_args(std::env::args_os()));
}
