//! Checkpoint depth-doubling: donor layer `k` lands at target layer
//! `2k-1` (1-based) for both encoder and decoder stacks, even target
//! layers are freshly initialized, and every non-layer tensor is copied
//! verbatim.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::manifest::TensorManifest;
use crate::util::{hash_bytes, rng_from};
use crate::{Error, Result};

/// Where one target tensor comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorSource {
    /// Bit-exact copy of a donor tensor.
    Copy { donor_name: String },
    /// Fresh draw; shape taken from the named donor tensor.
    /// 1-D tensors are zero-initialized, others normal(0, std).
    Init { shape_like: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargePlan {
    pub src_layers: usize,
    pub tgt_layers: usize,
    pub init_std: f64,
    /// `(target_name, source)`, in output order.
    pub mappings: Vec<(String, TensorSource)>,
}

/// Parsed layer tensor name: `{stack}.layer.{index}.{slot}`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerName<'a> {
    pub stack: &'a str,
    pub index: usize,
    pub slot: &'a str,
}

/// Splits a tensor name into its layer components, if it is a layer
/// tensor. Malformed layer names (bad index, missing slot) are errors.
pub fn parse_layer_name(name: &str) -> Result<Option<LayerName<'_>>> {
    for stack in ["encoder", "decoder"] {
        let prefix = format!("{stack}.layer.");
        if let Some(rest) = name.strip_prefix(prefix.as_str()) {
            let (index_str, slot) = rest.split_once('.').ok_or_else(|| {
                Error::NamingConventionViolation(name.to_string())
            })?;
            let index: usize = index_str
                .parse()
                .map_err(|_| Error::NamingConventionViolation(name.to_string()))?;
            if index == 0 || slot.is_empty() {
                return Err(Error::NamingConventionViolation(name.to_string()));
            }
            return Ok(Some(LayerName { stack, index, slot }));
        }
    }
    Ok(None)
}

/// Builds the interleaving plan: donor layer `k` to target layer
/// `2k-1`, fresh even layers, verbatim non-layer tensors.
pub fn plan_enlargement(
    src_layers: usize,
    tgt_layers: usize,
    tensor_names: &[String],
    init_std: f64,
) -> Result<EnlargePlan> {
    if tgt_layers != 2 * src_layers || src_layers == 0 {
        return Err(Error::LayerCountMismatch {
            src: src_layers,
            tgt: tgt_layers,
        });
    }
    let mut mappings = Vec::new();
    for name in tensor_names {
        match parse_layer_name(name)? {
            None => {
                mappings.push((
                    name.clone(),
                    TensorSource::Copy {
                        donor_name: name.clone(),
                    },
                ));
            }
            Some(layer) => {
                if layer.index > src_layers {
                    return Err(Error::NamingConventionViolation(format!(
                        "{name} exceeds source layer count {src_layers}"
                    )));
                }
                let odd = 2 * layer.index - 1;
                let even = 2 * layer.index;
                mappings.push((
                    format!("{}.layer.{}.{}", layer.stack, odd, layer.slot),
                    TensorSource::Copy {
                        donor_name: name.clone(),
                    },
                ));
                mappings.push((
                    format!("{}.layer.{}.{}", layer.stack, even, layer.slot),
                    TensorSource::Init {
                        shape_like: name.clone(),
                    },
                ));
            }
        }
    }
    Ok(EnlargePlan {
        src_layers,
        tgt_layers,
        init_std,
        mappings,
    })
}

fn normal_draws(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Vec<f32> {
    // Box-Muller, consuming pairs of uniforms
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        out.push((r * theta.cos() * std) as f32);
        if out.len() < n {
            out.push((r * theta.sin() * std) as f32);
        }
    }
    out
}

/// Applies an enlargement plan to a donor checkpoint. Copied tensors
/// are bit-identical; fresh tensors are seeded per target name, so the
/// output is independent of traversal order and parallelism.
pub fn apply_enlargement(
    donor: &TensorManifest,
    plan: &EnlargePlan,
    seed: u64,
) -> Result<TensorManifest> {
    let mut out = TensorManifest::default();
    for (target_name, source) in &plan.mappings {
        match source {
            TensorSource::Copy { donor_name } => {
                let entry = donor
                    .index
                    .get(donor_name)
                    .ok_or_else(|| Error::MissingTensor(donor_name.clone()))?;
                let data = donor.tensor(donor_name)?;
                out.push(target_name, &entry.shape, &data)?;
            }
            TensorSource::Init { shape_like } => {
                let entry = donor
                    .index
                    .get(shape_like)
                    .ok_or_else(|| Error::MissingTensor(shape_like.clone()))?;
                let n = entry.num_elements();
                let data = if entry.shape.len() <= 1 {
                    vec![0.0f32; n]
                } else {
                    let mut rng = rng_from(hash_bytes(seed, target_name.as_bytes()));
                    normal_draws(&mut rng, n, plan.init_std)
                };
                out.push(target_name, &entry.shape, &data)?;
            }
        }
    }
    Ok(out)
}
