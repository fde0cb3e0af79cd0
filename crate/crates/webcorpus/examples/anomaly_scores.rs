//! Isolation-forest anomaly scoring on 5-dimensional page features:
//! an obvious outlier gets a clearly higher score than the inliers.

use rand::Rng;
use webcorpus::isoforest::{ForestConfig, IsolationForest};
use webcorpus::util::rng_from;

fn main() -> webcorpus::Result<()> {
    let mut rng = rng_from(7);
    // inliers: typical prose pages (sentence length ~12 +/- 3, few
    // short sentences, low uppercase/long-word stats)
    let mut points: Vec<[f64; 5]> = (0..500)
        .map(|_| {
            [
                rng.gen_range(9.0..15.0),
                rng.gen_range(2.0..4.0),
                rng.gen_range(0.0..0.1),
                rng.gen_range(0.01..0.05),
                rng.gen_range(8.0..14.0),
            ]
        })
        .collect();
    // one keyword-stuffed page: short shouty sentences, huge words
    let outlier = [2.0, 0.5, 0.9, 0.6, 45.0];
    points.push(outlier);

    let forest = IsolationForest::fit(&points, ForestConfig { seed: 1, ..ForestConfig::default() })?;

    let inlier_mean: f64 =
        points[..500].iter().map(|x| forest.anomaly_score(x)).sum::<f64>() / 500.0;
    let outlier_score = forest.anomaly_score(&outlier);
    println!("mean inlier anomaly score: {inlier_mean:.3}");
    println!("outlier anomaly score:     {outlier_score:.3}");
    println!(
        "outlier decision score:    {:.3} (removed below 0.05)",
        forest.decision_score(&outlier)
    );
    Ok(())
}
