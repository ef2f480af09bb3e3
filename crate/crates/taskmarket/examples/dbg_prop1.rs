fn main() {
    let args: Vec<String> = std::env::args().collect();
    let draws: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(7);
    let start = std::time::Instant::now();
    let report = taskmarket::cutoff::verify_proposition1(draws, seed);
    println!(
        "draws={} kept={} passed={} elapsed={:?}",
        report.draws, report.kept, report.passed, start.elapsed()
    );
}
