use clap::Parser;

fn main() {
    let cli = coldgan::cli::Cli::parse();
    let code = coldgan::cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
