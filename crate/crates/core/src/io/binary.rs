use std::io::Read;

use crate::error::{Error, Result};

/// Little-endian reader that turns short reads into a format error naming the field.
pub(crate) struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }

    pub fn bytes<const N: usize>(&mut self, field: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated file while reading {field}")),
            _ => Error::Io(e),
        })?;
        Ok(buf)
    }

    pub fn vec(&mut self, n: usize, field: &str) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated file while reading {field}")),
            _ => Error::Io(e),
        })?;
        Ok(buf)
    }

    pub fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.bytes::<1>(field)?[0])
    }

    pub fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes(field)?))
    }

    pub fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(field)?))
    }

    pub fn u64(&mut self, field: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(field)?))
    }

    pub fn f32(&mut self, field: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes(field)?))
    }

    /// Fails unless the stream is exhausted.
    pub fn finish(mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(Error::Format("trailing bytes after the last record".into())),
        }
    }
}

pub(crate) fn magic<R: Read>(r: &mut Reader<R>, expected: &[u8; 4]) -> Result<()> {
    let got = r.bytes::<4>("magic")?;
    if &got != expected {
        return Err(Error::Format(format!("bad magic: expected {:?}", String::from_utf8_lossy(expected))));
    }
    Ok(())
}
