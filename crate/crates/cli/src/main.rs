use std::io::Write;

fn main() {
    let (out, message) = mq_anneal_cli::run_args(std::env::args_os());
    print!("{}", out.text);
    let _ = std::io::stdout().flush();
    if let Some(m) = message {
        eprint!("{m}");
        if !m.ends_with('\n') {
            eprintln!();
        }
    }
    std::process::exit(out.code);
}
