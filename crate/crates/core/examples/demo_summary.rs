//! Prints per-observable cluster centroids of the demo scan.
//!
//! `cargo run --release -p tempo-core --example demo_summary -- [seed] [k]`

use tempo_core::clustering::{cluster_scan, ClusterConfig};
use tempo_core::simgen::{generate_scan, GridSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let scan = generate_scan(&GridSpec::demo(), seed).expect("demo grid simulates");
    let cfg = ClusterConfig { k, seed, ..ClusterConfig::default() };
    let model = cluster_scan(&scan, &cfg).expect("clustering succeeds");
    let lr = scan.parameter_schema.index_of("nLRP6_lr").unwrap();
    for obs in &model.observables {
        println!("{} (inertia {:.1})", obs.observable, obs.inertia);
        for id in &obs.order {
            let c = obs.cluster(*id).unwrap();
            let peak = c.centroid.iter().cloned().fold(f64::MIN, f64::max);
            let end = *c.centroid.last().unwrap();
            let mut lrs: Vec<f64> = obs
                .members(*id)
                .iter()
                .map(|r| scan.run(r).unwrap().config[lr])
                .collect();
            lrs.sort_by(f64::total_cmp);
            lrs.dedup();
            let centroid: Vec<String> = c.centroid.iter().map(|v| format!("{v:.0}")).collect();
            println!(
                "  #{id} n={:3} end/peak={:.2} [{}] nLRP6_lr {:?}",
                c.size,
                end / peak,
                centroid.join(" "),
                lrs
            );
        }
    }
}
