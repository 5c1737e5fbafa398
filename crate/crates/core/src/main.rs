fn main() {
    std::process::exit(dzt_otfs::cli::run(std::env::args_os()));
}
