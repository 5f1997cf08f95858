fn main() {
    std::process::exit(kernelforge::cli::main_with_args(std::env::args_os()));
}
