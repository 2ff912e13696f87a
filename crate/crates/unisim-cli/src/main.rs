use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, stdout) = unisim_cli::run(&args);
    if !stdout.is_empty() {
        println!("{stdout}");
    }
    ExitCode::from(code.clamp(0, 255) as u8)
}
