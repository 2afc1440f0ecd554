//! Run configuration: TOML sections with dotted `--override` keys, and the
//! verify command driven from the library.

use polytherm::cli::{cmd_verify, RunConfig};

const CONFIG: &str = r#"
seed = 11

[grid]
d = 2

[law]
kind = "quadratic"
gamma = 0.2

[verify]
samples = 200
bound_samples = 2000
"#;

fn main() -> polytherm::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG, &["law.alpha=1.5".to_string(), "coeffs.k0=0.02".to_string()])?;
    let vc = cfg.verify_config()?;
    println!("law {:?}", vc.law);
    println!("coeffs mu0={} k0={}", vc.coeffs.mu0, vc.coeffs.k0);
    let out = std::env::temp_dir().join("polytherm-config-example");
    let outcome = cmd_verify(&cfg, &out)?;
    println!("exit code {}: {}", outcome.code, outcome.message);
    for f in outcome.files {
        println!("  {}", f.display());
    }
    Ok(())
}
