// Looks up phases and nearby policy events for a few dates using the
// shipped phase and event tables.
//
// cargo run --example align_events

use std::path::Path;

use discourse::analytics::{align, load_events, AlignmentReport, DetectedPoint, PhaseTable, PointKind};

pub fn run_example() -> discourse::Result<AlignmentReport> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let rki = PhaseTable::load(&data.join("phases_rki.csv"), "rki")?;
    let policy = PhaseTable::load(&data.join("phases_policy.csv"), "policy")?;
    let events = load_events(&data.join("events.csv"))?;

    let points = [
        DetectedPoint {
            kind: PointKind::Peak,
            date: "2021-03-15".parse().unwrap(),
        },
        DetectedPoint {
            kind: PointKind::Changepoint,
            date: "2021-11-20".parse().unwrap(),
        },
    ];
    let report = align(&points, &events, &[&rki, &policy], 3);
    for p in &report {
        println!("{} {} phases={:?}", p.kind.as_str(), p.date, p.phases);
        for m in &p.events {
            println!(
                "  {:+} d  {} {}  {}",
                m.distance_days, m.event.country, m.event.date, m.event.description
            );
        }
    }
    Ok(report)
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
