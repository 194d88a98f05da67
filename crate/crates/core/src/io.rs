//! Binary field files.
//!
//! Little-endian header: magic `STRF`, version `u32`, `n_time u32`, `n_space u32`,
//! `n_components u32`, `box_len f64`, `period f64`, domain flag `u8` (0 physical,
//! 1 spectral). The body is `(re, im)` pairs of `f64` in storage order.
//! Time-independent box fields are written with `n_time = 1` and `period = 0`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{BoxField, BoxSpectrum, PhysicalField, SpectralField};
use crate::grid::{BoxGrid, GridSpec};

const MAGIC: &[u8; 4] = b"STRF";
const VERSION: u32 = 1;

/// Any field kind the format can carry.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Physical(PhysicalField),
    Spectral(SpectralField),
    Box(BoxField),
    BoxSpectrum(BoxSpectrum),
}

impl From<PhysicalField> for FieldData {
    fn from(f: PhysicalField) -> Self {
        FieldData::Physical(f)
    }
}
impl From<SpectralField> for FieldData {
    fn from(f: SpectralField) -> Self {
        FieldData::Spectral(f)
    }
}
impl From<BoxField> for FieldData {
    fn from(f: BoxField) -> Self {
        FieldData::Box(f)
    }
}
impl From<BoxSpectrum> for FieldData {
    fn from(f: BoxSpectrum) -> Self {
        FieldData::BoxSpectrum(f)
    }
}

struct Header {
    n_time: u32,
    n_space: u32,
    n_components: u32,
    box_len: f64,
    period: f64,
    spectral: bool,
}

impl FieldData {
    fn header_and_data(&self) -> (Header, &[Complex64]) {
        let (n_time, period, bg, nc, spectral, data) = match self {
            FieldData::Physical(f) => (f.grid().n_time, f.grid().period, f.grid().box_grid(), f.n_components(), false, f.data()),
            FieldData::Spectral(f) => (f.grid().n_time, f.grid().period, f.grid().box_grid(), f.n_components(), true, f.data()),
            FieldData::Box(f) => (1, 0.0, *f.grid(), f.n_components(), false, f.data()),
            FieldData::BoxSpectrum(f) => (1, 0.0, *f.grid(), f.n_components(), true, f.data()),
        };
        (
            Header {
                n_time: n_time as u32,
                n_space: bg.n as u32,
                n_components: nc as u32,
                box_len: bg.box_len,
                period,
                spectral,
            },
            data,
        )
    }
}

pub fn write_field_to(mut w: impl Write, field: &FieldData) -> Result<()> {
    let (h, data) = field.header_and_data();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&h.n_time.to_le_bytes())?;
    w.write_all(&h.n_space.to_le_bytes())?;
    w.write_all(&h.n_components.to_le_bytes())?;
    w.write_all(&h.box_len.to_le_bytes())?;
    w.write_all(&h.period.to_le_bytes())?;
    w.write_all(&[h.spectral as u8])?;
    for v in data {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(buf)
}

pub fn read_field_from(mut r: impl Read) -> Result<FieldData> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected STRF".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_time = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let n_space = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let nc = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let box_len = f64::from_le_bytes(read_array(&mut r)?);
    let period = f64::from_le_bytes(read_array(&mut r)?);
    let domain = read_array::<1>(&mut r)?[0];
    if domain > 1 {
        return Err(Error::Format(format!("unknown domain flag {domain}")));
    }
    let bg = BoxGrid::new(box_len, n_space)?;
    let count = n_time
        .checked_mul(bg.len())
        .and_then(|v| v.checked_mul(nc))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 16 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            count * 16,
            bytes.len()
        )));
    }
    let data: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(match (n_time, domain) {
        (1, 0) => FieldData::Box(BoxField::from_data(bg, nc, data)?),
        (1, _) => FieldData::BoxSpectrum(BoxSpectrum::from_data(bg, nc, data)?),
        (_, d) => {
            let grid = GridSpec::new(period, box_len, n_space, n_time)?;
            if d == 0 {
                FieldData::Physical(PhysicalField::from_data(grid, nc, data)?)
            } else {
                FieldData::Spectral(SpectralField::from_data(grid, nc, data)?)
            }
        }
    })
}

pub fn write_field(path: impl AsRef<Path>, field: &FieldData) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    write_field_to(BufWriter::new(file), field)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FieldData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    read_field_from(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_kinds() {
        let g = GridSpec::new(2.5, 3.0, 4, 2).unwrap();
        let p = PhysicalField::from_fn(g, 3, |t, x, o| {
            o[0] = Complex64::new(t, x[0]);
            o[2] = Complex64::new(x[1], -x[2]);
        });
        let fields: Vec<FieldData> = vec![
            p.clone().into(),
            crate::spectral::to_spectral(&p).into(),
            p.slice(1).into(),
            crate::spectral::box_to_spectral(&p.slice(0)).into(),
        ];
        for f in fields {
            let mut buf = Vec::new();
            write_field_to(&mut buf, &f).unwrap();
            assert_eq!(read_field_from(&buf[..]).unwrap(), f);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_field_from(&b"NOPE"[..]).is_err());
        let g = GridSpec::new(1.0, 1.0, 4, 2).unwrap();
        let mut buf = Vec::new();
        write_field_to(&mut buf, &PhysicalField::zeros(g, 1).into()).unwrap();
        buf.pop();
        assert!(matches!(read_field_from(&buf[..]), Err(Error::Format(_))));
    }
}
