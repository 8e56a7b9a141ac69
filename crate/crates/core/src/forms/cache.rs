//! On-disk coefficient tables.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "SYMSIGNC"
//! version    u32      1
//! name_len   u16, then name_len bytes of UTF-8
//! weight     u32
//! level      u64
//! X          u64
//! X records  u32 byte length, then that many bytes of two's-complement
//!            little-endian a_f(n), n = 1..=X
//! ```

use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;

use super::{expand, CoefficientSeries, FormDescriptor};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"SYMSIGNC";
pub const FORMAT_VERSION: u32 = 1;

/// Header fields of a cache file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub name: String,
    pub weight: u32,
    pub level: u64,
    pub precision: u64,
}

pub fn write_series<W: Write>(series: &CoefficientSeries, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let form = series.form();
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let name = form.name().as_bytes();
    w.write_all(&(name.len() as u16).to_le_bytes())?;
    w.write_all(name)?;
    w.write_all(&form.weight().to_le_bytes())?;
    w.write_all(&form.level().to_le_bytes())?;
    w.write_all(&(series.precision() as u64).to_le_bytes())?;
    for a in series.coefficients() {
        let bytes = a.to_signed_bytes_le();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf)
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Cache("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_header<R: Read>(r: &mut R) -> Result<CacheHeader> {
    if read_array::<8, _>(r)? != MAGIC {
        return Err(Error::Cache("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Cache(format!("unsupported format version {version}")));
    }
    let name_len = u16::from_le_bytes(read_array(r)?) as usize;
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name).map_err(truncated)?;
    let name = String::from_utf8(name).map_err(|_| Error::Cache("form name is not UTF-8".into()))?;
    Ok(CacheHeader {
        name,
        weight: u32::from_le_bytes(read_array(r)?),
        level: u64::from_le_bytes(read_array(r)?),
        precision: u64::from_le_bytes(read_array(r)?),
    })
}

/// Reads a table and checks it belongs to `form`.
pub fn read_series<R: Read>(form: &FormDescriptor, input: R) -> Result<CoefficientSeries> {
    let mut r = BufReader::new(input);
    let header = read_header(&mut r)?;
    if header.name != form.name() || header.weight != form.weight() || header.level != form.level() {
        return Err(Error::Cache(format!(
            "cache holds {} (k={}, N={}), expected {} (k={}, N={})",
            header.name,
            header.weight,
            header.level,
            form.name(),
            form.weight(),
            form.level()
        )));
    }
    let x = usize::try_from(header.precision).map_err(|_| Error::Cache("precision overflows".into()))?;
    if x == 0 {
        return Err(Error::Cache("precision is zero".into()));
    }
    let mut coeffs = Vec::with_capacity(x);
    let mut buf = Vec::new();
    for _ in 0..x {
        let len = u32::from_le_bytes(read_array(&mut r)?) as usize;
        buf.resize(len, 0);
        r.read_exact(&mut buf).map_err(truncated)?;
        coeffs.push(BigInt::from_signed_bytes_le(&buf));
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Cache("trailing bytes after the last record".into()));
    }
    CoefficientSeries::from_parts(form.clone(), coeffs)
}

/// `<dir>/<name>_X<precision>.coef`
pub fn cache_path(dir: &Path, form: &FormDescriptor, x: usize) -> PathBuf {
    dir.join(format!("{}_X{}.coef", form.name(), x))
}

/// Where a table came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Cache,
    Expanded,
}

/// Loads `(form, X)` from `dir`, or expands and writes it.
pub fn load_or_expand(
    form: &FormDescriptor,
    x: usize,
    dir: &Path,
) -> Result<(CoefficientSeries, Provenance)> {
    let path = cache_path(dir, form, x);
    if path.exists() {
        let series = read_series(form, fs::File::open(&path)?)?;
        return Ok((series, Provenance::Cache));
    }
    let series = expand(form, x)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("coef.tmp");
    write_series(&series, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, &path)?;
    Ok((series, Provenance::Expanded))
}
