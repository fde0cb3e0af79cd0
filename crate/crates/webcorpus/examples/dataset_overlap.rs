//! Pairwise record overlap between dataset splits, with
//! whitespace-canonicalized multiset semantics.

use webcorpus::analysis::{render_intersection_table, split_intersections};

fn main() {
    let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let datasets = vec![
        ("train".to_string(), strings(&["bir iki üç", "dört beş", "altı yedi", "bir iki üç"])),
        ("dev".to_string(), strings(&["bir  iki  üç", "sekiz dokuz"])),
        ("test".to_string(), strings(&["dört beş", "on"])),
    ];
    let matrix = split_intersections(&datasets);
    print!("{}", render_intersection_table(&matrix));
    // "bir iki üç" matches despite differing whitespace; the duplicate
    // in train counts once because dev has only one copy
}
