fn main() {
    std::process::exit(cgeom::cli::run(std::env::args_os()));
}
