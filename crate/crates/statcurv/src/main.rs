fn main() {
    std::process::exit(statcurv::cli::run(std::env::args()));
}
