fn main() {
    std::process::exit(transtorsion::cli::run());
}
