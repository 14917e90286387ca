use env_logger::{Builder, Env};
use nsfrac::cli;

fn main() -> anyhow::Result<()> {
    Builder::from_env(Env::default().filter_or("NSFRAC_LOG", "info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "-h" || a == "--help") {
        println!("{}", cli::USAGE);
        return Ok(());
    }
    let level = std::env::var("NSFRAC_LOG").ok();
    let cfg = cli::parse_args(&args, level.as_deref())?;
    let report = cli::execute(&cfg)?;
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}
