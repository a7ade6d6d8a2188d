//! Runs the bundled case-1 scenario with and without adaptation.

use afsmc::scenario::preset;

fn main() {
    let sc = preset("case1").expect("bundled preset");
    for run in [sc.clone(), sc.baseline()] {
        let report = run.run().expect("case 1 runs");
        println!("{}\n{}", run.name, report.metrics.to_key_values());
    }
}
