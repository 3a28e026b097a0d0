fn main() {
    std::process::exit(dicke_critic_cli::run(std::env::args_os()));
}
