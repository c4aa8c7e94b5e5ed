// Full run over the synthetic fixture. Output goes to DISCOURSE_OUT_DIR if
// set, otherwise to a directory under the system temp dir.
//
// cargo run --example run_pipeline

use std::path::Path;

use discourse::report::{self, ReportBundle, RunConfig};

pub fn run_example() -> discourse::Result<ReportBundle> {
    let mut cfg =
        RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/run.toml"))?;
    cfg.output_dir = std::env::temp_dir().join(format!("discourse-example-{}", std::process::id()));
    let cfg = cfg.with_env_overrides();
    let bundle = report::run(&cfg)?;

    println!("output: {}", cfg.output_dir.display());
    println!("seeds: {:?}", bundle.seeds.match_terms());
    println!("relevant documents: {}", bundle.filter_stats.relevant);
    for row in &bundle.topic_table {
        println!(
            "topic #{} {} size={} mean_rel={:.3}",
            row.rank, row.label, row.size, row.mean_rel
        );
    }
    for r in &bundle.analytics {
        println!(
            "{:<22} trend={:<10} peaks={:<2} change_points={:?}",
            r.series,
            r.trend.map_or("-", |t| t.direction.as_str()),
            r.peaks.peaks.len(),
            r.change_points.dates
        );
    }
    Ok(bundle)
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
