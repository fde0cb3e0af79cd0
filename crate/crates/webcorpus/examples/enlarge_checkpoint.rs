//! Checkpoint depth-doubling: donor layer k lands at target layer
//! 2k-1, even target layers get fresh normal(0, 0.02) weights, and
//! everything else is copied bit-for-bit.

use webcorpus::enlarge::{apply_enlargement, plan_enlargement, TensorSource};
use webcorpus::manifest::TensorManifest;

fn main() -> webcorpus::Result<()> {
    // a toy 2-layer donor
    let mut donor = TensorManifest::default();
    for part in ["encoder", "decoder"] {
        for layer in 1..=2 {
            let base = (layer * 10) as f32;
            donor.push(
                &format!("{part}.layer.{layer}.attn.weight"),
                &[2, 2],
                &[base, base + 1.0, base + 2.0, base + 3.0],
            )?;
        }
    }
    donor.push("shared.embed.weight", &[4, 2], &[0.5; 8])?;

    let names: Vec<String> = donor.names().map(String::from).collect();
    let plan = plan_enlargement(2, 4, &names, 0.02)?;
    for (target, source) in &plan.mappings {
        match source {
            TensorSource::Copy { donor_name } => println!("{target:<28} <- copy {donor_name}"),
            TensorSource::Init { shape_like } => println!("{target:<28} <- init like {shape_like}"),
        }
    }

    let enlarged = apply_enlargement(&donor, &plan, 42)?;
    let copied = enlarged.tensor("encoder.layer.1.attn.weight")?;
    let fresh = enlarged.tensor("encoder.layer.2.attn.weight")?;
    println!("target layer 1 (copied): {copied:?}");
    println!("target layer 2 (fresh):  {fresh:?}");
    Ok(())
}
