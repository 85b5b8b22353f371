//! Aggregates the bundled per-shoe benchmark IoUs into per-category mIoU
//! tables, for the baseline and the augmented-training columns.
//!
//! `cargo run --release --example aggregate_tables`

use std::path::Path;

use shoeprint::metric::{aggregate, Category, EvalRecord};

#[derive(serde::Deserialize)]
struct Row {
    shoe_id: String,
    category: Category,
    baseline: f64,
    augmented: f64,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for file in ["benchmark_real_val.csv", "benchmark_fid_val.csv"] {
        let rows: Vec<Row> = csv::Reader::from_path(dir.join(file))?.deserialize().collect::<Result<_, _>>()?;
        for (label, pick) in [("baseline", (|r: &Row| r.baseline) as fn(&Row) -> f64), ("augmented", |r: &Row| r.augmented)] {
            let records: Vec<EvalRecord> = rows.iter().map(|r| EvalRecord::new(&r.shoe_id, r.category, pick(r))).collect();
            println!("{file} ({label}, {} shoes)", records.len());
            print!("{}", aggregate(&records)?.table());
        }
        println!();
    }
    Ok(())
}
