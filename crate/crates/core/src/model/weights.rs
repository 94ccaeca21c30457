use std::path::Path;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{NetworkConfig, DECODER_DEPTH};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::nn::{BlockKind, BlockWeights, Tensor};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"RSRW";
pub const WEIGHTS_VERSION: u32 = 1;
const CHECKSUM_BYTES: usize = 32;
const PREAMBLE_BYTES: usize = 4 + 4 + 8;

/// Every block of the network keyed by its path, in execution order.
pub fn block_layout(cfg: &NetworkConfig) -> Vec<(String, BlockKind)> {
    let n = cfg.ssm_state;
    let stages = cfg.stages();
    let mut v = vec![(
        "embed".to_string(),
        BlockKind::PatchEmbed {
            dim: cfg.base_dim,
            patch: cfg.patch,
        },
    )];
    for (i, &depth) in cfg.depths.iter().enumerate() {
        let dim = cfg.stage_dim(i);
        for j in 0..depth {
            v.push((
                format!("encoder.{i}.block.{j}"),
                BlockKind::Vss { dim, state: n },
            ));
        }
        if i + 1 < stages {
            v.push((format!("encoder.{i}.down"), BlockKind::Downsample { dim }));
        }
    }
    for l in (0..stages - 1).rev() {
        let dim = cfg.stage_dim(l);
        v.push((
            format!("decoder.{l}.up"),
            BlockKind::Upsample { dim: 2 * dim },
        ));
        v.push((format!("decoder.{l}.fuse"), BlockKind::Fuse { dim }));
        for j in 0..DECODER_DEPTH {
            v.push((
                format!("decoder.{l}.block.{j}"),
                BlockKind::Vss { dim, state: n },
            ));
        }
    }
    v.push((
        "head".to_string(),
        BlockKind::Head {
            dim: cfg.base_dim,
            factor: cfg.head_factor(),
        },
    ));
    v
}

/// Parameters of a whole network, keyed by block path.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    blocks: IndexMap<String, BlockWeights>,
}

/// Deterministically initializes weights for `cfg`.
pub fn build(cfg: &NetworkConfig, seed: u64) -> Result<ModelWeights> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = block_layout(cfg)
        .into_iter()
        .map(|(path, kind)| {
            let w = BlockWeights::init(&kind, &mut rng);
            (path, w)
        })
        .collect();
    Ok(ModelWeights { blocks })
}

impl ModelWeights {
    pub fn block(&self, path: &str) -> Result<&BlockWeights> {
        self.blocks
            .get(path)
            .ok_or_else(|| Error::Config(format!("missing weights for block `{path}`")))
    }

    pub fn block_mut(&mut self, path: &str) -> Result<&mut BlockWeights> {
        self.blocks
            .get_mut(path)
            .ok_or_else(|| Error::Config(format!("missing weights for block `{path}`")))
    }

    pub fn block_paths(&self) -> impl Iterator<Item = &str> {
        self.blocks.keys().map(String::as_str)
    }

    pub fn param_count(&self) -> usize {
        self.blocks.values().map(BlockWeights::param_count).sum()
    }

    /// Flattened `(block/param, tensor)` pairs in storage order.
    pub fn tensors(&self) -> impl Iterator<Item = (String, &Tensor)> {
        self.blocks
            .iter()
            .flat_map(|(b, w)| w.iter().map(move |(p, t)| (format!("{b}/{p}"), t)))
    }

    /// Ensures the block set and every tensor shape match `cfg`.
    pub fn check_config(&self, cfg: &NetworkConfig) -> Result<()> {
        let layout = block_layout(cfg);
        for (path, kind) in &layout {
            self.block(path)?
                .check_layout(kind)
                .map_err(|e| Error::Config(format!("block `{path}`: {e}")))?;
        }
        if self.blocks.len() != layout.len() {
            let extra = self
                .blocks
                .keys()
                .find(|k| !layout.iter().any(|(p, _)| p == *k))
                .cloned()
                .unwrap_or_default();
            return Err(Error::Config(format!("unexpected block `{extra}`")));
        }
        Ok(())
    }

    /// SHA-256 over tensor names and values, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for (name, t) in self.tensors() {
            h.update(name.as_bytes());
            for v in t.data() {
                h.update(v.to_le_bytes());
            }
        }
        format!("{:x}", h.finalize())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config: NetworkConfig,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

/// Serializes weights.
///
/// Layout: `RSRW`, u32 version, u64 manifest length, JSON manifest (config
/// plus ordered tensor names and shapes), little-endian f32 payload, and a
/// SHA-256 of everything before it. Values must be exactly representable
/// as f32.
pub fn encode_weights(w: &ModelWeights, cfg: &NetworkConfig) -> Result<Vec<u8>> {
    w.check_config(cfg)?;
    let mut tensors = Vec::new();
    let mut payload = Vec::new();
    for (name, t) in w.tensors() {
        for &v in t.data() {
            let f = v as f32;
            if f as f64 != v && !v.is_nan() {
                return Err(Error::Input(format!(
                    "tensor `{name}` holds {v}, which is not exactly representable as f32"
                )));
            }
            payload.extend_from_slice(&f.to_le_bytes());
        }
        tensors.push(TensorEntry {
            name,
            shape: t.shape().to_vec(),
        });
    }
    let manifest = serde_json::to_vec(&Manifest {
        version: WEIGHTS_VERSION,
        config: cfg.clone(),
        tensors,
    })
    .expect("manifest serializes");
    let mut out =
        Vec::with_capacity(PREAMBLE_BYTES + manifest.len() + payload.len() + CHECKSUM_BYTES);
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
    out.extend_from_slice(&manifest);
    out.extend_from_slice(&payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    Ok(out)
}

pub fn decode_weights(bytes: &[u8]) -> Result<(ModelWeights, NetworkConfig)> {
    if bytes.len() < PREAMBLE_BYTES + CHECKSUM_BYTES {
        return Err(Error::Corruption(format!(
            "file is only {} bytes",
            bytes.len()
        )));
    }
    let (body, digest) = bytes.split_at(bytes.len() - CHECKSUM_BYTES);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Corruption("checksum mismatch".into()));
    }
    if &body[..4] != WEIGHTS_MAGIC {
        return Err(Error::Corruption("bad magic".into()));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != WEIGHTS_VERSION {
        return Err(Error::Incompatible(format!(
            "format version {version}, expected {WEIGHTS_VERSION}"
        )));
    }
    let mlen = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
    let rest = &body[PREAMBLE_BYTES..];
    if mlen > rest.len() {
        return Err(Error::Corruption("manifest length exceeds file".into()));
    }
    let manifest: Manifest = serde_json::from_slice(&rest[..mlen])
        .map_err(|e| Error::Corruption(format!("unreadable manifest: {e}")))?;
    let payload = &rest[mlen..];
    let cfg = manifest.config;
    cfg.validate()
        .map_err(|e| Error::Incompatible(format!("manifest config: {e}")))?;

    let expected: Vec<TensorEntry> = block_layout(&cfg)
        .into_iter()
        .flat_map(|(block, kind)| {
            kind.layout().into_iter().map(move |s| TensorEntry {
                name: format!("{block}/{}", s.name),
                shape: s.shape,
            })
        })
        .collect();
    if let Some(i) = (0..expected.len().max(manifest.tensors.len()))
        .find(|&i| expected.get(i) != manifest.tensors.get(i))
    {
        return Err(Error::Incompatible(divergence(
            &expected,
            &manifest.tensors,
            i,
        )));
    }

    let total: usize = expected
        .iter()
        .map(|e| e.shape.iter().product::<usize>())
        .sum();
    if payload.len() != 4 * total {
        return Err(Error::Corruption(format!(
            "payload is {} bytes, manifest needs {}",
            payload.len(),
            4 * total
        )));
    }
    let mut values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let mut blocks: IndexMap<String, BlockWeights> = IndexMap::new();
    let mut current: Option<(String, IndexMap<String, Tensor>)> = None;
    for e in expected {
        let (block, param) = e.name.split_once('/').expect("names are block/param");
        let n = e.shape.iter().product();
        let t = Tensor::new(e.shape, values.by_ref().take(n).collect())?;
        match &mut current {
            Some((b, map)) if b == block => {
                map.insert(param.to_string(), t);
            }
            _ => {
                if let Some((b, map)) = current.take() {
                    blocks.insert(b, BlockWeights::from_tensors(map));
                }
                let mut map = IndexMap::new();
                map.insert(param.to_string(), t);
                current = Some((block.to_string(), map));
            }
        }
    }
    if let Some((b, map)) = current {
        blocks.insert(b, BlockWeights::from_tensors(map));
    }
    Ok((ModelWeights { blocks }, cfg))
}

fn divergence(expected: &[TensorEntry], found: &[TensorEntry], i: usize) -> String {
    match (expected.get(i), found.get(i)) {
        (Some(e), Some(f)) if e.name == f.name => format!(
            "tensor `{}` has shape {:?}, config needs {:?}",
            f.name, f.shape, e.shape
        ),
        (Some(e), Some(f)) if expected.iter().any(|x| x.name == f.name) => {
            format!("missing tensor `{}`", e.name)
        }
        (_, Some(f)) => format!("unexpected tensor `{}`", f.name),
        (Some(e), None) => format!("missing tensor `{}`", e.name),
        (None, None) => unreachable!("divergence index past both lists"),
    }
}

pub fn save_weights(w: &ModelWeights, cfg: &NetworkConfig, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_weights(w, cfg)?)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<(ModelWeights, NetworkConfig)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}
