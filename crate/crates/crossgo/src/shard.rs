//! Bit-packed training shards.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "CGSH" | version u8 | board size u8 | plane count u8 | record count u64
//! record*: plane count × ceil(size²/8) bytes of bits, then label u16
//! ```
//!
//! Each plane is packed row-major, least significant bit first, and padded
//! to a whole byte (46 bytes for 19×19). Records have a fixed size, so any
//! record can be read directly by index.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crossgo_core::{Planes, NET_BOARD_SIZE, NUM_PLANES};

pub const MAGIC: &[u8; 4] = b"CGSH";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 15;
pub const EXTENSION: &str = "cgsh";

#[derive(Debug, thiserror::Error)]
pub enum ShardError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a shard file (bad magic)")]
    Magic,
    #[error("unsupported shard version {0}")]
    Version(u8),
    #[error("shard holds {expected} records by header but {got} bytes of records")]
    Truncated { expected: u64, got: usize },
    #[error("record shape {got:?} differs from {expected:?}")]
    Shape { expected: (usize, usize), got: (usize, usize) },
    #[error("label {label} out of range for {points} points")]
    Label { label: u16, points: usize },
}

/// A position's feature planes and the index of the move played from it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateMovePair {
    pub planes: Planes,
    pub label: u16,
}

pub fn plane_bytes(size: usize) -> usize {
    (size * size).div_ceil(8)
}

pub fn record_bytes(size: usize, planes: usize) -> usize {
    planes * plane_bytes(size) + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u8,
    pub board_size: u8,
    pub planes: u8,
    pub records: u64,
}

impl ShardHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[..4].copy_from_slice(MAGIC);
        out[4] = self.version;
        out[5] = self.board_size;
        out[6] = self.planes;
        out[7..].copy_from_slice(&self.records.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<ShardHeader, ShardError> {
        if bytes.len() < HEADER_BYTES || &bytes[..4] != MAGIC {
            return Err(ShardError::Magic);
        }
        if bytes[4] != VERSION {
            return Err(ShardError::Version(bytes[4]));
        }
        Ok(ShardHeader {
            version: bytes[4],
            board_size: bytes[5],
            planes: bytes[6],
            records: u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes")),
        })
    }
}

pub fn encode_record(pair: &StateMovePair, out: &mut Vec<u8>) {
    let area = pair.planes.area();
    let pb = plane_bytes(pair.planes.size());
    for p in 0..pair.planes.count() {
        let start = out.len();
        out.resize(start + pb, 0);
        for (i, &bit) in pair.planes.plane(p).iter().enumerate().take(area) {
            if bit != 0 {
                out[start + i / 8] |= 1 << (i % 8);
            }
        }
    }
    out.extend_from_slice(&pair.label.to_le_bytes());
}

pub fn decode_record(bytes: &[u8], size: usize, planes: usize) -> Result<StateMovePair, ShardError> {
    let area = size * size;
    let pb = plane_bytes(size);
    let need = record_bytes(size, planes);
    if bytes.len() != need {
        return Err(ShardError::Truncated {
            expected: 1,
            got: bytes.len(),
        });
    }
    let mut bits = Vec::with_capacity(planes * area);
    for p in 0..planes {
        let plane = &bytes[p * pb..(p + 1) * pb];
        bits.extend((0..area).map(|i| (plane[i / 8] >> (i % 8)) & 1));
    }
    let label = u16::from_le_bytes([bytes[need - 2], bytes[need - 1]]);
    if label as usize >= area {
        return Err(ShardError::Label { label, points: area });
    }
    let planes = Planes::from_bits(planes, size, bits).expect("length computed above");
    Ok(StateMovePair { planes, label })
}

/// Serializes a whole shard.
pub fn encode_shard(pairs: &[StateMovePair]) -> Result<Vec<u8>, ShardError> {
    let (size, planes) = pairs
        .first()
        .map(|p| (p.planes.size(), p.planes.count()))
        .unwrap_or((NET_BOARD_SIZE, NUM_PLANES));
    let header = ShardHeader {
        version: VERSION,
        board_size: size as u8,
        planes: planes as u8,
        records: pairs.len() as u64,
    };
    let mut out = Vec::with_capacity(HEADER_BYTES + pairs.len() * record_bytes(size, planes));
    out.extend_from_slice(&header.to_bytes());
    for pair in pairs {
        let got = (pair.planes.size(), pair.planes.count());
        if got != (size, planes) {
            return Err(ShardError::Shape {
                expected: (size, planes),
                got,
            });
        }
        encode_record(pair, &mut out);
    }
    Ok(out)
}

pub fn write_shard(path: &Path, pairs: &[StateMovePair]) -> Result<(), ShardError> {
    let bytes = encode_shard(pairs)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// A shard held in memory with O(1) access to any record.
#[derive(Clone, Debug)]
pub struct Shard {
    header: ShardHeader,
    data: Vec<u8>,
}

impl Shard {
    pub fn from_bytes(data: Vec<u8>) -> Result<Shard, ShardError> {
        let header = ShardHeader::parse(&data)?;
        let rb = record_bytes(header.board_size as usize, header.planes as usize);
        let body = data.len() - HEADER_BYTES;
        if body as u64 != header.records * rb as u64 {
            return Err(ShardError::Truncated {
                expected: header.records,
                got: body,
            });
        }
        Ok(Shard { header, data })
    }

    pub fn open(path: &Path) -> Result<Shard, ShardError> {
        Shard::from_bytes(fs::read(path)?)
    }

    pub fn header(&self) -> ShardHeader {
        self.header
    }

    pub fn len(&self) -> usize {
        self.header.records as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: usize) -> Result<StateMovePair, ShardError> {
        let (size, planes) = (self.header.board_size as usize, self.header.planes as usize);
        let rb = record_bytes(size, planes);
        let start = HEADER_BYTES + index * rb;
        decode_record(&self.data[start..start + rb], size, planes)
    }

    pub fn records(&self) -> Result<Vec<StateMovePair>, ShardError> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

/// Shard files in `dir` whose names start with `prefix`, sorted by name.
pub fn list_shards(dir: &Path, prefix: &str) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with(prefix) && path.extension().and_then(|e| e.to_str()) == Some(EXTENSION) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Every record of every matching shard in `dir`, in file order.
pub fn load_pairs(dir: &Path, prefix: &str) -> Result<Vec<StateMovePair>, ShardError> {
    let mut pairs = Vec::new();
    for path in list_shards(dir, prefix)? {
        pairs.extend(Shard::open(&path)?.records()?);
    }
    Ok(pairs)
}
