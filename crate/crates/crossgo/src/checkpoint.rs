//! Network descriptor files and binary checkpoints.
//!
//! Checkpoint layout (integers and floats little-endian):
//!
//! ```text
//! "CGPN" | version u8 | layer count u32 | descriptor length u32 | descriptor (TOML)
//! per layer: in u32 | out u32 | kernel u32 | stride u32 | pad u32
//!            | masked u8 | cross width u32
//!            | weights f32 × out·in·kernel² | bias f32 × out
//!            | mask bitmap, ceil(kernel²/8) bytes, LSB first (masked layers only)
//! ```
//!
//! Layers appear in [`PolicyNet::layers`] order. Loading rebuilds the
//! network from the embedded descriptor and checks every layer header and
//! mask against it.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crossgo_core::model::ModelError;
use crossgo_core::nn::ConvLayer;
use crossgo_core::{NetworkConfig, PolicyNet};

pub const MAGIC: &[u8; 4] = b"CGPN";
pub const VERSION: u8 = 1;
pub const DESCRIPTOR_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic)")]
    Magic,
    #[error("unsupported checkpoint version {0}")]
    Version(u8),
    #[error("checkpoint ends early")]
    Truncated,
    #[error("trailing bytes after the last layer")]
    Trailing,
    #[error("bad network descriptor: {0}")]
    Descriptor(String),
    #[error("layer {index}: {message}")]
    Layer { index: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Human-editable description of a network: either a preset scaled by a
/// width multiplier, or a full layer list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDescriptor {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_multiplier: Option<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkConfig>,
}

impl NetworkDescriptor {
    pub fn reference(width_multiplier: f32) -> NetworkDescriptor {
        NetworkDescriptor {
            version: DESCRIPTOR_VERSION,
            preset: Some("reference".to_string()),
            width_multiplier: Some(width_multiplier),
            network: None,
        }
    }

    pub fn explicit(config: NetworkConfig) -> NetworkDescriptor {
        NetworkDescriptor {
            version: DESCRIPTOR_VERSION,
            preset: None,
            width_multiplier: None,
            network: Some(config),
        }
    }

    pub fn resolve(&self) -> Result<NetworkConfig, CheckpointError> {
        if self.version != DESCRIPTOR_VERSION {
            return Err(CheckpointError::Descriptor(format!("unsupported version {}", self.version)));
        }
        let config = match (&self.network, self.preset.as_deref()) {
            (Some(net), None) => net.clone(),
            (None, None | Some("reference")) => NetworkConfig::reference(self.width_multiplier.unwrap_or(1.0)),
            (None, Some(other)) => return Err(CheckpointError::Descriptor(format!("unknown preset {other:?}"))),
            (Some(_), Some(_)) => return Err(CheckpointError::Descriptor("both preset and network given".into())),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<NetworkDescriptor, CheckpointError> {
        toml::from_str(text).map_err(|e| CheckpointError::Descriptor(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("descriptor serializes")
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn mask_bitmap(layer: &ConvLayer) -> Vec<u8> {
    let k2 = layer.kernel() * layer.kernel();
    let mut bits = vec![0u8; k2.div_ceil(8)];
    if let Some(mask) = layer.mask() {
        for (i, &on) in mask.cells().iter().enumerate() {
            if on {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
    }
    bits
}

pub fn encode_checkpoint(net: &PolicyNet) -> Vec<u8> {
    let descriptor = NetworkDescriptor::explicit(net.config().clone()).to_toml();
    let layers = net.layers();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    put_u32(&mut out, layers.len());
    put_u32(&mut out, descriptor.len());
    out.extend_from_slice(descriptor.as_bytes());
    for layer in layers {
        for v in [layer.in_channels(), layer.out_channels(), layer.kernel(), layer.stride(), layer.pad()] {
            put_u32(&mut out, v);
        }
        out.push(layer.mask().is_some() as u8);
        put_u32(&mut out, layer.mask().map_or(0, |m| m.width()));
        put_f32s(&mut out, layer.weights());
        put_f32s(&mut out, layer.bias());
        if layer.mask().is_some() {
            out.extend_from_slice(&mask_bitmap(layer));
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let out = self.bytes.get(self.pos..end).ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, CheckpointError> {
        let raw = self.take(n.checked_mul(4).ok_or(CheckpointError::Truncated)?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<PolicyNet, CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| CheckpointError::Magic)? != MAGIC {
        return Err(CheckpointError::Magic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let count = r.u32()?;
    let desc_len = r.u32()?;
    let text = std::str::from_utf8(r.take(desc_len)?).map_err(|e| CheckpointError::Descriptor(e.to_string()))?;
    let config = NetworkDescriptor::from_toml(text)?.resolve()?;
    let mut net = PolicyNet::new(config)?;
    let mut layers = net.layers_mut();
    if layers.len() != count {
        return Err(CheckpointError::Descriptor(format!(
            "descriptor has {} layers, file has {count}",
            layers.len()
        )));
    }
    for (index, layer) in layers.iter_mut().enumerate() {
        let bad = |message: String| CheckpointError::Layer { index, message };
        let header = [r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?];
        let expected = [layer.in_channels(), layer.out_channels(), layer.kernel(), layer.stride(), layer.pad()];
        if header != expected {
            return Err(bad(format!("shape {header:?}, expected {expected:?}")));
        }
        let masked = r.u8()? != 0;
        let width = r.u32()?;
        if masked != layer.mask().is_some() || width != layer.mask().map_or(0, |m| m.width()) {
            return Err(bad("mask does not match the descriptor".into()));
        }
        let [inc, out, k, _, _] = header;
        let weights = r.f32s(out * inc * k * k)?;
        let bias = r.f32s(out)?;
        if masked {
            let stored = r.take((k * k).div_ceil(8))?;
            if stored != mask_bitmap(layer) {
                return Err(bad("mask bitmap does not match the cross width".into()));
            }
            let cells = layer.mask().expect("masked").cells().to_vec();
            let stray = weights
                .chunks(k * k)
                .any(|f| f.iter().zip(&cells).any(|(&w, &on)| !on && w != 0.0));
            if stray {
                return Err(bad("nonzero weight under the mask".into()));
            }
        }
        layer.set_parameters(weights, bias).map_err(|e| bad(e.to_string()))?;
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Trailing);
    }
    Ok(net)
}

pub fn save_checkpoint(path: &Path, net: &PolicyNet) -> Result<(), CheckpointError> {
    fs::write(path, encode_checkpoint(net))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyNet, CheckpointError> {
    decode_checkpoint(&fs::read(path)?)
}
