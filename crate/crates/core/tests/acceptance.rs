//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//! Thresholds are pinned in `hyperbolization::tolerance`.

use hyperbolization::certify::{run_all, CertifyConfig};

fn main() {
    let cfg = CertifyConfig::default();
    let results = run_all(&cfg);
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        println!("{r} ({:.1}s)", r.seconds);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
