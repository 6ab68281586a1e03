fn main() {
    std::process::exit(vineyard_nav::cli::run());
}
