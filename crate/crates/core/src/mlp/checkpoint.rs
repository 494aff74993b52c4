//! Binary model checkpoints.
//!
//! Layout, all integers `u32` and all reals `f64`, little-endian:
//!
//! ```text
//! magic            8 bytes  "SGMLP\0\0\0"
//! version          u32      = 1
//! input_dim        u32
//! n_hidden         u32
//! hidden widths    n_hidden × u32
//! elu_alpha        f64
//! dropout_rate     f64
//! dropout_after    u32
//! x_mean, x_std    3 × f64 each
//! y_mean, y_std    f64 each
//! per layer (hidden layers, then output):
//!   weights        n_out × n_in f64, row-major
//!   bias           n_out f64
//! ```
//!
//! Values are stored bit-for-bit, so a round trip is exact.

use std::io::Write;
use std::path::Path;

use super::{NetworkConfig, NetworkParams, Standardizer, TrainedModel};
use crate::error::{Error, Result};
use crate::io::create;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SGMLP\0\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode(model: &TrainedModel) -> Vec<u8> {
    let cfg = &model.params.config;
    let s = &model.standardizer;
    let mut out = Vec::with_capacity(64 + 8 * model.params.n_params());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    let u32s = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    let f64s = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    u32s(&mut out, cfg.input_dim);
    u32s(&mut out, cfg.hidden.len());
    for &w in &cfg.hidden {
        u32s(&mut out, w);
    }
    f64s(&mut out, cfg.elu_alpha);
    f64s(&mut out, cfg.dropout_rate);
    u32s(&mut out, cfg.dropout_after);
    for v in s.x_mean.iter().chain(&s.x_std).chain([&s.y_mean, &s.y_std]) {
        f64s(&mut out, *v);
    }
    for layer in &model.params.layers {
        for v in layer.weights.iter().chain(&layer.bias) {
            f64s(&mut out, *v);
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> std::result::Result<&[u8], String> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(format!("truncated at byte {}", self.pos));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(buf: &[u8]) -> std::result::Result<TrainedModel, String> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err("not a model checkpoint (bad magic)".into());
    }
    let version = r.u32()? as u32;
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let input_dim = r.u32()?;
    let n_hidden = r.u32()?;
    if n_hidden > 1024 {
        return Err(format!("implausible layer count {n_hidden}"));
    }
    let hidden = (0..n_hidden).map(|_| r.u32()).collect::<std::result::Result<Vec<_>, _>>()?;
    let config =
        NetworkConfig { input_dim, hidden, elu_alpha: r.f64()?, dropout_rate: r.f64()?, dropout_after: r.u32()? };
    config.validate().map_err(|e| e.to_string())?;
    let mut std_vals = [0.0; 8];
    for v in &mut std_vals {
        *v = r.f64()?;
    }
    let standardizer = Standardizer {
        x_mean: [std_vals[0], std_vals[1], std_vals[2]],
        x_std: [std_vals[3], std_vals[4], std_vals[5]],
        y_mean: std_vals[6],
        y_std: std_vals[7],
    };
    let mut params = NetworkParams::zeros(&config).map_err(|e| e.to_string())?;
    for layer in &mut params.layers {
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = r.f64()?;
        }
    }
    if r.pos != buf.len() {
        return Err(format!("{} trailing bytes", buf.len() - r.pos));
    }
    Ok(TrainedModel { params, standardizer, loss_trace: Vec::new() })
}

/// Writes a checkpoint, creating parent directories as needed.
pub fn write_checkpoint(path: &Path, model: &TrainedModel) -> Result<()> {
    create(path)?.write_all(&encode(model)).map_err(|e| Error::io(path, e))
}

/// Loads a checkpoint. The loss trace is not stored and comes back empty.
pub fn read_checkpoint(path: &Path) -> Result<TrainedModel> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf).map_err(|reason| Error::Format { path: path.to_path_buf(), reason })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TrainedModel {
        let mut params = NetworkParams::init(&NetworkConfig::default(), 21).unwrap();
        params.layers[1].bias[3] = -0.0;
        params.layers[3].bias[0] = f64::MIN_POSITIVE / 3.0;
        TrainedModel {
            params,
            standardizer: Standardizer {
                x_mean: [300.1, 49.9, 15.02],
                x_std: [25.3, 5.01, 0.99],
                y_mean: 7.38,
                y_std: 1.13,
            },
            loss_trace: vec![],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let back = decode(&encode(&m)).unwrap();
        assert_eq!(encode(&back), encode(&m));
        assert_eq!(back.params.config, m.params.config);
        assert_eq!(back.standardizer, m.standardizer);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let bytes = encode(&model());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).is_err());
        let mut bad_version = bytes;
        bad_version[8] = 9;
        assert!(decode(&bad_version).unwrap_err().contains("version"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        write_checkpoint(&path, &model()).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.params, model().params);
        assert!(matches!(read_checkpoint(&dir.path().join("nope")), Err(Error::Io { .. })));
    }
}
