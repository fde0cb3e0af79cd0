//! Isolation Forest anomaly detection, from scratch.
//!
//! Trees are grown on uniform subsamples of size `subsample_size` with
//! uniformly random split dimensions and split values; a point's anomaly
//! score is `2^(-E[h(x)] / c(psi))` where `h` is the path length and `c`
//! the average unsuccessful-search path length in a BST.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::util::{derive_seed, rng_from};
use crate::{Error, Result};

pub const N_FEATURES: usize = 5;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Exact harmonic sums are used up to this argument; the logarithmic
/// approximation beyond.
const EXACT_HARMONIC_LIMIT: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub subsample_size: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            subsample_size: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        dim: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    pub root: Node,
    pub height_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest {
    pub trees: Vec<IsolationTree>,
    pub config: ForestConfig,
}

/// Average unsuccessful-search path length `c(n)` in a BST of `n`
/// nodes: `2 H(n-1) - 2 (n-1)/n`, 0 for `n <= 1`.
pub fn avg_path_c(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let m = (n - 1) as u64;
    2.0 * harmonic(m) - 2.0 * m as f64 / n as f64
}

fn harmonic(i: u64) -> f64 {
    if i == 0 {
        0.0
    } else if i <= EXACT_HARMONIC_LIMIT {
        (1..=i).map(|k| 1.0 / k as f64).sum()
    } else {
        (i as f64).ln() + EULER_GAMMA
    }
}

fn height_limit(subsample_size: usize) -> usize {
    (subsample_size as f64).log2().ceil() as usize
}

fn build_node(data: &mut [[f64; N_FEATURES]], depth: usize, limit: usize, rng: &mut impl Rng) -> Node {
    if data.len() <= 1 || depth >= limit {
        return Node::Leaf { size: data.len() };
    }
    // redraw the dimension when it has no spread, then give up
    let mut split = None;
    for _ in 0..N_FEATURES {
        let dim = rng.gen_range(0..N_FEATURES);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in data.iter() {
            lo = lo.min(p[dim]);
            hi = hi.max(p[dim]);
        }
        if hi > lo {
            split = Some((dim, rng.gen_range(lo..hi)));
            break;
        }
    }
    let Some((dim, value)) = split else {
        return Node::Leaf { size: data.len() };
    };
    let mid = itertools_partition(data, |p| p[dim] < value);
    let (left_data, right_data) = data.split_at_mut(mid);
    let left = build_node(left_data, depth + 1, limit, rng);
    let right = build_node(right_data, depth + 1, limit, rng);
    Node::Split {
        dim,
        value,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// In-place stable-order-free partition; returns the number of elements
/// satisfying the predicate, moved to the front.
fn itertools_partition<T, F: Fn(&T) -> bool>(data: &mut [T], pred: F) -> usize {
    let mut i = 0;
    for j in 0..data.len() {
        if pred(&data[j]) {
            data.swap(i, j);
            i += 1;
        }
    }
    i
}

/// Path length of `x` in one tree: edges traversed plus the
/// `c(leaf size)` adjustment.
pub fn path_length(tree: &IsolationTree, x: &[f64; N_FEATURES]) -> f64 {
    let mut node = &tree.root;
    let mut depth = 0.0;
    loop {
        match node {
            Node::Leaf { size } => return depth + avg_path_c(*size),
            Node::Split {
                dim, value, left, right, ..
            } => {
                node = if x[*dim] < *value { left } else { right };
                depth += 1.0;
            }
        }
    }
}

impl IsolationForest {
    /// Fits `n_trees` trees, each on an independent uniform subsample
    /// of size `subsample_size`. Per-tree seeds are derived from the
    /// config seed, so the result is independent of worker count.
    pub fn fit(points: &[[f64; N_FEATURES]], config: ForestConfig) -> Result<Self> {
        if points.len() < config.subsample_size {
            return Err(Error::TooFewPoints {
                needed: config.subsample_size,
                got: points.len(),
            });
        }
        let limit = height_limit(config.subsample_size);
        let trees: Vec<IsolationTree> = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from(derive_seed(config.seed, t as u64));
                let idx = sample(&mut rng, points.len(), config.subsample_size);
                let mut data: Vec<[f64; N_FEATURES]> =
                    idx.iter().map(|i| points[i]).collect();
                IsolationTree {
                    root: build_node(&mut data, 0, limit, &mut rng),
                    height_limit: limit,
                }
            })
            .collect();
        Ok(IsolationForest { trees, config })
    }

    /// Canonical score `s = 2^(-E[h]/c(psi))` in (0, 1]; higher means
    /// more anomalous.
    pub fn anomaly_score(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mean_path: f64 = self
            .trees
            .iter()
            .map(|t| path_length(t, x))
            .sum::<f64>()
            / self.trees.len() as f64;
        2f64.powf(-mean_path / avg_path_c(self.config.subsample_size))
    }

    /// Centered score `0.5 - s`; pages are removed when it falls below
    /// the cleaning threshold.
    pub fn decision_score(&self, x: &[f64; N_FEATURES]) -> f64 {
        0.5 - self.anomaly_score(x)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), &VersionedForest::of(self))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let v: VersionedForest = serde_json::from_reader(BufReader::new(file))?;
        if v.format != FOREST_FORMAT {
            return Err(Error::Parse {
                line: 0,
                msg: format!("unsupported forest format {:?}", v.format),
            });
        }
        Ok(v.forest)
    }
}

const FOREST_FORMAT: &str = "isoforest-v1";

#[derive(Serialize, Deserialize)]
struct VersionedForest {
    format: String,
    forest: IsolationForest,
}

impl VersionedForest {
    fn of(f: &IsolationForest) -> Self {
        VersionedForest {
            format: FOREST_FORMAT.to_string(),
            forest: f.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    /// Brute-force harmonic-sum oracle.
    fn c_oracle(n: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        let h: f64 = (1..n).map(|k| 1.0 / k as f64).sum();
        2.0 * h - 2.0 * (n - 1) as f64 / n as f64
    }

    #[test]
    fn avg_path_c_small_values() {
        assert_eq!(avg_path_c(0), 0.0);
        assert_eq!(avg_path_c(1), 0.0);
        assert_eq!(avg_path_c(2), 1.0); // 2*H(1) - 2*1/2 = 2 - 1
        for n in 3..10 {
            assert!((avg_path_c(n) - c_oracle(n)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn avg_path_c_256_matches_harmonic_oracle() {
        assert!((avg_path_c(256) - c_oracle(256)).abs() < 1e-12);
    }

    fn pt(v: f64) -> [f64; N_FEATURES] {
        [v, v, v, v, v]
    }

    #[test]
    fn identical_points_give_single_leaf_trees_and_equal_scores() {
        let points = vec![pt(1.0); 512];
        let forest = IsolationForest::fit(&points, ForestConfig::default()).unwrap();
        for tree in &forest.trees {
            assert!(matches!(tree.root, Node::Leaf { size: 256 }));
        }
        let s0 = forest.anomaly_score(&pt(1.0));
        let s1 = forest.anomaly_score(&pt(1.0));
        assert_eq!(s0, s1);
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = rng_from(3);
        let points: Vec<[f64; N_FEATURES]> = (0..20)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        let cfg = ForestConfig {
            n_trees: 8,
            subsample_size: 16,
            seed: 42,
        };
        let f1 = IsolationForest::fit(&points, cfg).unwrap();
        let f2 = IsolationForest::fit(&points, cfg).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let points = vec![pt(0.0); 10];
        let err = IsolationForest::fit(&points, ForestConfig::default());
        assert!(matches!(err, Err(Error::TooFewPoints { .. })));
    }

    /// Gaussian cluster plus one far outlier: the outlier must score
    /// strictly higher than the cluster centroid for 10 distinct seeds.
    #[test]
    fn planted_outlier_scores_above_centroid() {
        for seed in 0..10u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut points: Vec<[f64; N_FEATURES]> = (0..1000)
                .map(|_| {
                    std::array::from_fn(|_| {
                        // Box-Muller standard normal
                        let u1: f64 = rng.gen_range(1e-12..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    })
                })
                .collect();
            let outlier = pt(25.0);
            points.push(outlier);
            let cfg = ForestConfig {
                seed,
                ..ForestConfig::default()
            };
            let forest = IsolationForest::fit(&points, cfg).unwrap();
            assert!(
                forest.anomaly_score(&outlier) > forest.anomaly_score(&pt(0.0)),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn single_leaf_path_lengths() {
        let leaf1 = IsolationTree {
            root: Node::Leaf { size: 1 },
            height_limit: 8,
        };
        assert_eq!(path_length(&leaf1, &pt(0.0)), 0.0);
        let leaf_psi = IsolationTree {
            root: Node::Leaf { size: 256 },
            height_limit: 8,
        };
        assert_eq!(path_length(&leaf_psi, &pt(0.0)), avg_path_c(256));
    }

    /// Direct recursive pencil oracle for a depth-2 hand-built tree.
    #[test]
    fn hand_built_tree_matches_recursive_oracle() {
        let tree = IsolationTree {
            root: Node::Split {
                dim: 0,
                value: 0.5,
                left: Box::new(Node::Split {
                    dim: 1,
                    value: -1.0,
                    left: Box::new(Node::Leaf { size: 1 }),
                    right: Box::new(Node::Leaf { size: 3 }),
                }),
                right: Box::new(Node::Leaf { size: 4 }),
            },
            height_limit: 2,
        };
        // x = (0.2, -2, ...): left at root, left again -> leaf size 1:
        // 2 edges + c(1) = 2.0
        assert_eq!(path_length(&tree, &[0.2, -2.0, 0.0, 0.0, 0.0]), 2.0);
        // x = (0.2, 0, ...): left, right -> leaf size 3: 2 + c(3)
        let expect = 2.0 + c_oracle(3);
        assert!((path_length(&tree, &[0.2, 0.0, 0.0, 0.0, 0.0]) - expect).abs() < 1e-12);
        // x = (0.9, ...): right -> leaf size 4: 1 + c(4)
        let expect = 1.0 + c_oracle(4);
        assert!((path_length(&tree, &[0.9, 0.0, 0.0, 0.0, 0.0]) - expect).abs() < 1e-12);
    }

    /// Two single-leaf trees: the score must equal the closed formula.
    #[test]
    fn two_tree_forest_matches_direct_formula() {
        let cfg = ForestConfig {
            n_trees: 2,
            subsample_size: 8,
            seed: 0,
        };
        let forest = IsolationForest {
            trees: vec![
                IsolationTree {
                    root: Node::Leaf { size: 8 },
                    height_limit: 3,
                },
                IsolationTree {
                    root: Node::Split {
                        dim: 0,
                        value: 0.0,
                        left: Box::new(Node::Leaf { size: 4 }),
                        right: Box::new(Node::Leaf { size: 4 }),
                    },
                    height_limit: 3,
                },
            ],
            config: cfg,
        };
        let x = pt(-1.0);
        let mean_h = (c_oracle(8) + 1.0 + c_oracle(4)) / 2.0;
        let expect = 2f64.powf(-mean_h / c_oracle(8));
        assert!((forest.anomaly_score(&x) - expect).abs() < 1e-12);
    }

    #[test]
    fn score_limits() {
        let cfg = ForestConfig {
            n_trees: 1,
            subsample_size: 256,
            seed: 0,
        };
        // E[h] == c(psi) -> s == 0.5 (leaf of size psi at the root).
        let forest = IsolationForest {
            trees: vec![IsolationTree {
                root: Node::Leaf { size: 256 },
                height_limit: 8,
            }],
            config: cfg,
        };
        assert!((forest.anomaly_score(&pt(0.0)) - 0.5).abs() < 1e-12);
        // E[h] -> 0 gives s -> 1.
        let s = 2f64.powf(-0.01 / avg_path_c(256));
        assert!(s > 0.99);
    }

    #[test]
    fn decision_score_is_centered() {
        let cfg = ForestConfig {
            n_trees: 1,
            subsample_size: 256,
            seed: 0,
        };
        let forest = IsolationForest {
            trees: vec![IsolationTree {
                root: Node::Leaf { size: 256 },
                height_limit: 8,
            }],
            config: cfg,
        };
        let x = pt(0.0);
        assert!((forest.decision_score(&x) - (0.5 - forest.anomaly_score(&x))).abs() < 1e-15);
        assert!(forest.decision_score(&x).abs() < 1e-12); // s = 0.5 here
    }

    #[test]
    fn path_length_is_bounded() {
        let mut rng = rng_from(9);
        let points: Vec<[f64; N_FEATURES]> = (0..300)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-5.0..5.0)))
            .collect();
        let cfg = ForestConfig {
            n_trees: 10,
            subsample_size: 64,
            seed: 5,
        };
        let forest = IsolationForest::fit(&points, cfg).unwrap();
        let bound = height_limit(64) as f64 + avg_path_c(64);
        for p in &points {
            for t in &forest.trees {
                assert!(path_length(t, p) <= bound + 1e-12);
            }
            let s = forest.anomaly_score(p);
            assert!(s > 0.0 && s <= 1.0);
        }
    }

    #[test]
    fn leaf_sizes_sum_to_subsample_size() {
        fn leaf_sum(node: &Node) -> usize {
            match node {
                Node::Leaf { size } => *size,
                Node::Split { left, right, .. } => leaf_sum(left) + leaf_sum(right),
            }
        }
        let mut rng = rng_from(11);
        let points: Vec<[f64; N_FEATURES]> = (0..400)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..1.0)))
            .collect();
        let cfg = ForestConfig {
            n_trees: 20,
            subsample_size: 128,
            seed: 13,
        };
        let forest = IsolationForest::fit(&points, cfg).unwrap();
        for tree in &forest.trees {
            assert_eq!(leaf_sum(&tree.root), 128);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = rng_from(21);
        let points: Vec<[f64; N_FEATURES]> = (0..64)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..1.0)))
            .collect();
        let cfg = ForestConfig {
            n_trees: 5,
            subsample_size: 32,
            seed: 77,
        };
        let forest = IsolationForest::fit(&points, cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.json");
        forest.save(&path).unwrap();
        let loaded = IsolationForest::load(&path).unwrap();
        assert_eq!(forest, loaded);
    }
}
