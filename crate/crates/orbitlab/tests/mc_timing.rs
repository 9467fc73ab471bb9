use orbitlab::polymap::{monte_carlo_hyperbolicity, McConfig};
use std::time::Instant;

#[test]
#[ignore]
fn mc_thousand() {
    let cfg = McConfig {
        degree: 3,
        k_max: 3,
        samples: 1000,
        seed: 20260810,
        margin_tol: 1e-6,
        plants: vec![],
    };
    let t0 = Instant::now();
    let stats = monte_carlo_hyperbolicity(&cfg).unwrap();
    eprintln!(
        "elapsed {:?} flagged {} degenerate {} min_margin {:e}",
        t0.elapsed(),
        stats.flagged_count,
        stats.degenerate.len(),
        stats.min_margin
    );
}
