fn main() {
    std::process::exit(bosonmc::cli::main_with_args(std::env::args_os()));
}
