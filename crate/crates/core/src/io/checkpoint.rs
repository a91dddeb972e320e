use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde_json::{json, Value};

use super::binary::{magic, Reader};
use crate::error::{Error, Result};
use crate::nn::{DdfNetwork, NetConfig};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DDFN";
pub const CHECKPOINT_VERSION: u16 = 1;

/// Header, JSON echo `{"net": NetConfig, "run": extra}`, then every parameter block in
/// canonical order as `{u16 name length, name, u8 ndim, u32 dims…, f32 data}`.
pub fn write_checkpoint<W: Write>(w: &mut W, net: &DdfNetwork<f32>, extra: &Value) -> Result<()> {
    let echo = serde_json::to_vec(&json!({ "net": net.config(), "run": extra }))?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(echo.len() as u32).to_le_bytes())?;
    w.write_all(&echo)?;
    let params = net.params();
    w.write_all(&(params.len() as u32).to_le_bytes())?;
    for (name, p) in net.param_names().iter().zip(params) {
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&[2u8])?;
        for d in p.shape() {
            w.write_all(&(*d as u32).to_le_bytes())?;
        }
        for v in p.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Returns the network and the `run` part of the JSON echo.
pub fn read_checkpoint<R: Read>(r: R) -> Result<(DdfNetwork<f32>, Value)> {
    let mut r = Reader::new(r);
    magic(&mut r, CHECKPOINT_MAGIC)?;
    let version = r.u16("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let len = r.u32("config length")? as usize;
    let echo: Value = serde_json::from_slice(&r.vec(len, "config")?)?;
    let config: NetConfig = serde_json::from_value(echo.get("net").cloned().ok_or_else(|| Error::Format("config echo lacks `net`".into()))?)?;
    let expected = DdfNetwork::<f32>::new(config, 0)?;
    let names = expected.param_names();
    let count = r.u32("parameter count")? as usize;
    if count != names.len() {
        return Err(Error::Format(format!("expected {} parameter blocks, found {count}", names.len())));
    }
    let mut params = Vec::with_capacity(count);
    for (name, slot) in names.iter().zip(expected.params()) {
        let n = r.u16("block name length")? as usize;
        let got = String::from_utf8(r.vec(n, "block name")?).map_err(|_| Error::Format("block name is not UTF-8".into()))?;
        if &got != name {
            return Err(Error::Format(format!("block `{got}` found where `{name}` was expected")));
        }
        let ndim = r.u8("block rank")? as usize;
        let dims = (0..ndim).map(|_| r.u32("block shape").map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if dims != slot.shape() {
            return Err(Error::Format(format!("block `{name}` has shape {dims:?}, expected {:?}", slot.shape())));
        }
        let data = (0..slot.len()).map(|_| r.f32("block data")).collect::<Result<Vec<_>>>()?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("block `{name}` contains non-finite values")));
        }
        params.push(Array2::from_shape_vec((dims[0], dims[1]), data).expect("shape checked"));
    }
    r.finish()?;
    let net = DdfNetwork::from_params(config, params)?;
    Ok((net, echo.get("run").cloned().unwrap_or(Value::Null)))
}

pub fn save_checkpoint(path: impl AsRef<Path>, net: &DdfNetwork<f32>, extra: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut w, net, extra)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(DdfNetwork<f32>, Value)> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
