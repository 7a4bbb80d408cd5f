//! Runs a small experiment suite from an inline config and lists the report.

use dtn_toolkit::config::ExperimentConfig;
use dtn_toolkit::suite::run_suite;
use dtn_toolkit::Result;

const CONFIG: &str = r#"
seed = 11

[geometry]
kind = "annulus"
refinement = 1
inner = 0.4

[coefficients]
a = "1 + 0.3*x*x, 0, 0, 1"
d = "0.2"

[experiments]
list = ["dtn-spectrum", "robin-sweep", "wentzell-evolve"]
"#;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join("dtn-toolkit-suite");
    let report = run_suite(&cfg, &dir)?;
    for e in &report.entries {
        println!("{:<16} {:<32} {:?} {:?}", e.experiment, e.name, e.status, e.measured);
    }
    println!("artifacts in {}, exit code {}", dir.display(), report.exit_code());
    Ok(())
}
