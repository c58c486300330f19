//! Shared layout of the on-disk formats: a line-oriented ASCII header
//! followed by a little-endian binary payload.
//!
//! ```text
//! <FORMAT NAME>\n
//! version=<integer>\n
//! key=value\n            (any number of lines)
//! end\n
//! <payload bytes>
//! ```

use crate::error::{Error, Result};

pub(crate) struct HeaderWriter {
    buf: Vec<u8>,
}

impl HeaderWriter {
    pub fn new(format: &str, version: u32) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(format.as_bytes());
        buf.push(b'\n');
        buf.extend_from_slice(format!("version={version}\n").as_bytes());
        Self { buf }
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.buf.extend_from_slice(format!("{key}={value}\n").as_bytes());
        self
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.buf.extend_from_slice(b"end\n");
        self.buf
    }
}

pub(crate) struct Header {
    entries: Vec<(String, String, usize)>,
    /// Byte offset of the first payload byte.
    pub payload_offset: usize,
}

pub(crate) fn parse_header(
    bytes: &[u8],
    format: &'static str,
    expected_version: u32,
) -> Result<Header> {
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Result<(usize, String)> {
        let start = *pos;
        let rest = &bytes[start..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format(bytes.len(), "header ended before `end` line"))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::format(start, "header line is not valid UTF-8"))?;
        *pos = start + end + 1;
        Ok((start, line.to_owned()))
    };

    let (_, magic) = next_line(&mut pos)?;
    if magic != format {
        return Err(Error::format(0, format!("expected format name `{format}`, found `{magic}`")));
    }
    let (off, version) = next_line(&mut pos)?;
    let tag = version
        .strip_prefix("version=")
        .ok_or_else(|| Error::format(off, "second header line must be `version=<n>`"))?;
    if tag.parse::<u32>().ok() != Some(expected_version) {
        return Err(Error::Version {
            format,
            found: tag.to_owned(),
            expected: expected_version,
        });
    }
    let mut entries = Vec::new();
    loop {
        let (off, line) = next_line(&mut pos)?;
        if line == "end" {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(off, format!("expected `key=value`, found `{line}`")))?;
        entries.push((k.to_owned(), v.to_owned(), off));
    }
    Ok(Header {
        entries,
        payload_offset: pos,
    })
}

impl Header {
    pub fn opt(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    fn located(&self, key: &str) -> Result<(&str, usize)> {
        self.entries
            .iter()
            .find(|e| e.0 == key)
            .map(|e| (e.1.as_str(), e.2))
            .ok_or_else(|| Error::format(self.payload_offset, format!("missing header key `{key}`")))
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.located(key).map(|(v, _)| v)
    }

    pub fn parse<V: std::str::FromStr>(&self, key: &str) -> Result<V> {
        let (v, off) = self.located(key)?;
        v.parse()
            .map_err(|_| Error::format(off, format!("cannot parse `{key}` value `{v}`")))
    }

    pub fn parse_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let (v, off) = self.located(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::format(off, format!("cannot parse `{key}` entry `{s}`")))
            })
            .collect()
    }
}

pub(crate) struct PayloadReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    pub fn new(bytes: &'a [u8], pos: usize) -> Self {
        Self { bytes, pos }
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.bytes.len() {
            return Err(Error::format(
                self.bytes.len(),
                format!("payload truncated while reading {what} at byte {}", self.pos),
            ));
        }
        let mut out = [0u8; N];
        out.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(out)
    }

    pub fn f64(&mut self, what: &str) -> Result<f64> {
        let at = self.pos;
        let x = f64::from_le_bytes(self.take::<8>(what)?);
        if !x.is_finite() {
            return Err(Error::format(at, format!("non-finite {what}")));
        }
        Ok(x)
    }

    pub fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take::<4>(what)?))
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.pos,
                format!("{} unexpected trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}
