fn main() {
    std::process::exit(shoeprint::commands::main_with_args(std::env::args_os()));
}
