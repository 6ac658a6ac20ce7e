//! Drives the experiment harness from code: runs two experiments into a
//! scratch registry, then collates them.

use anyhow::Result;
use towerlab::harness::{self, ExperimentKind, Filter, Registry, RunConfig};

fn main() -> Result<()> {
    let root = std::env::temp_dir().join(format!("towerlab-example-{}", std::process::id()));
    let registry = Registry::open(&root)?;

    let params = RunConfig::from_json(r#"{ "kind": "params", "k": 3, "lambda": 1e-4 }"#)?;
    let mut scan = RunConfig::from_json_with(
        r#"{ "kind": "residual-scan", "sweep": { "from": 1e-2, "to": 1e-5, "points": 4 } }"#,
        &["k=2".to_string(), "p=[1]".to_string()],
    )?;
    scan.nodes_per_unit = 48.0;

    for config in [&params, &scan] {
        let (record, path) = harness::run(config, &registry)?;
        println!(
            "{} {} passed={} -> {}",
            record.kind(),
            record.short_id(),
            record.passed,
            path.display()
        );
        for v in &record.verdicts {
            println!("  {}", v.describe());
        }
    }

    let bundle = harness::report(
        &registry,
        &Filter {
            kind: Some(ExperimentKind::ResidualScan),
            ..Filter::default()
        },
    )?;
    for (kind, csv) in &bundle.tables {
        println!("\n## {kind}\n{csv}");
    }
    std::fs::remove_dir_all(&root)?;
    Ok(())
}
