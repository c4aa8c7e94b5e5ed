// Dual-polarity scoring and daily aggregation.
//
// cargo run --example score_sentiment

use std::collections::BTreeMap;

use chrono::NaiveDate;

use discourse::corpus::tokenize;
use discourse::sentiment::{aggregate, label, score, DailySeries, Metric, SentimentLexicon};

pub fn run_example() -> discourse::Result<BTreeMap<Metric, DailySeries>> {
    let mut lex = SentimentLexicon::new();
    lex.add_term("endlich", 3)?;
    lex.add_term("froh", 2)?;
    lex.add_term("chaos", -3)?;
    lex.add_term("gefährlich", -4)?;
    lex.add_booster("sehr")?;
    lex.add_negator("nicht")?;

    let day = |d: u32| NaiveDate::from_ymd_opt(2021, 3, d).unwrap();
    let docs = [
        (day(1), "Endlich geimpft, sehr froh!"),
        (day(1), "Chaos bei der Terminvergabe"),
        (day(2), "Nicht gefährlich, aber Chaos"),
        (day(4), "Heute Impfung"),
    ];
    let mut scored = Vec::new();
    for (d, text) in docs {
        let s = score(&tokenize(text), &lex);
        println!(
            "{d} ({:>2},{:>3}) {:<14} {text}",
            s.pos,
            s.neg,
            format!("{:?}", label(s))
        );
        scored.push((d, s));
    }

    let mut all = BTreeMap::new();
    for m in Metric::ALL {
        let series = aggregate(&scored, m, day(1), day(4))?;
        println!("{m:<5} {:?}", series.values());
        all.insert(m, series);
    }
    println!("empty days: {:?}", all[&Metric::Rel].empty_days);
    Ok(all)
}

fn main() -> discourse::Result<()> {
    run_example().map(|_| ())
}
