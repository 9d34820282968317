//! Runs every builtin problem with every applicable method and prints the
//! summary table. Set MMP_NLP_OUT to also write per-run traces.

use std::time::Instant;

use mmp_nlp::runner::{run_suite, suite_table, OUT_ENV};

fn main() {
    let dir = std::env::var_os(OUT_ENV).map(std::path::PathBuf::from);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let t = Instant::now();
    let rows = run_suite(dir.as_deref(), workers).expect("suite");
    print!("{}", suite_table(&rows));
    let bad = rows.iter().filter(|r| !r.as_expected()).count();
    println!("{} runs, {} unexpected, {:.2?}", rows.len(), bad, t.elapsed());
}
