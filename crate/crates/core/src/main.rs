use std::io::Write;

fn main() {
    let run = qinfogeom::cli::execute(std::env::args_os());
    std::io::stdout().write_all(run.stdout.as_bytes()).expect("stdout");
    std::io::stderr().write_all(run.stderr.as_bytes()).expect("stderr");
    std::process::exit(run.code);
}
