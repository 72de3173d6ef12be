fn main() {
    std::process::exit(spiked_spectra::cli::run(std::env::args_os()));
}
