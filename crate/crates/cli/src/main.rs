fn main() {
    std::process::exit(homodyne_lab::run(std::env::args_os()));
}
