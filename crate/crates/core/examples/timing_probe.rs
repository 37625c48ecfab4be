use secroute::experiment::{run_sweep, summarize, summary_to_csv, ExperimentConfig};
use secroute::routing::Scheme;

fn main() {
    // Power sweep shape.
    let cfg = ExperimentConfig {
        schemes: vec![Scheme::SecureOptimal, Scheme::SecureEqualPower, Scheme::DbrOptimal],
        m_plus_1: vec![10],
        pt_db: vec![100.0, 120.0, 140.0],
        trials: 60,
        n_subcarriers: 1024,
        ..ExperimentConfig::default()
    };
    let t0 = std::time::Instant::now();
    let records = run_sweep(&cfg).unwrap();
    println!("power sweep slice: {:?}", t0.elapsed());
    println!("{}", summary_to_csv(&summarize(&records).unwrap()));

    // Density sweep shape.
    let cfg = ExperimentConfig {
        schemes: vec![Scheme::SecureOptimal, Scheme::DbrOptimal],
        m_plus_1: vec![5, 10, 15, 20],
        pt_db: vec![110.0],
        trials: 60,
        n_subcarriers: 1024,
        ..ExperimentConfig::default()
    };
    let t0 = std::time::Instant::now();
    let records = run_sweep(&cfg).unwrap();
    println!("density sweep slice: {:?}", t0.elapsed());
    println!("{}", summary_to_csv(&summarize(&records).unwrap()));
}
