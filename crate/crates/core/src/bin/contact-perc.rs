fn main() {
    std::process::exit(contact_perc::harness::main_with_args(std::env::args_os()));
}
