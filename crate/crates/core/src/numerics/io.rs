//! `SEM2` binary tensor files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! 0..4   magic  53 45 4D 32 ("SEM2")
//! 4      version = 1
//! 5      rank (1..=4)
//! 6..8   zero
//! 8..    rank × u32 dims
//! ..     product(dims) × f32, row-major
//! ```
//!
//! Several records may be concatenated in one file (see [`read_all`]).

use super::Tensor;
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"SEM2";
pub const VERSION: u8 = 1;

pub fn write_tensor<W: Write>(w: &mut W, t: &Tensor) -> Result<()> {
    let mut header = Vec::with_capacity(8 + 4 * t.rank());
    header.extend_from_slice(&MAGIC);
    header.push(VERSION);
    header.push(t.rank() as u8);
    header.extend_from_slice(&[0, 0]);
    for &d in t.shape() {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        header.extend_from_slice(&d.to_le_bytes());
    }
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(4 * t.len());
    for &v in t.data() {
        body.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

/// Reads one record. Returns `None` on a clean end of stream.
pub fn read_tensor<R: Read>(r: &mut R) -> Result<Option<Tensor>> {
    let mut head = [0u8; 8];
    let mut got = 0;
    while got < head.len() {
        let n = r.read(&mut head[got..])?;
        if n == 0 {
            break;
        }
        got += n;
    }
    if got == 0 {
        return Ok(None);
    }
    if got < head.len() {
        return Err(Error::Format("truncated header".into()));
    }
    if head[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:02X?}", &head[..4])));
    }
    if head[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", head[4])));
    }
    let rank = head[5] as usize;
    if !(1..=Tensor::MAX_RANK).contains(&rank) {
        return Err(Error::Format(format!("rank {rank} outside 1..=4")));
    }
    if head[6] != 0 || head[7] != 0 {
        return Err(Error::Format("non-zero header padding".into()));
    }
    let mut dims_buf = vec![0u8; 4 * rank];
    read_exact_or(r, &mut dims_buf, "dimensions")?;
    let shape: Vec<usize> = dims_buf
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let n = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format(format!("shape {shape:?} overflows")))?;
    let mut body = vec![0u8; 4 * n];
    read_exact_or(r, &mut body, "tensor data")?;
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Tensor::new(shape, data).map(Some)
}

/// Reads every concatenated record until end of stream.
pub fn read_all<R: Read>(r: &mut R) -> Result<Vec<Tensor>> {
    let mut out = Vec::new();
    while let Some(t) = read_tensor(r)? {
        out.push(t);
    }
    Ok(out)
}

pub fn save(path: &Path, t: &Tensor) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_tensor(&mut f, t)?;
    f.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Tensor> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_tensor(&mut f)?.ok_or_else(|| Error::Format(format!("{} is empty", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_bytes() {
        let t = Tensor::new(vec![2, 1], vec![1.0, -2.5]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        assert_eq!(
            buf,
            [0x53, 0x45, 0x4D, 0x32, 1, 2, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0x80, 0x3F, 0, 0, 0x20, 0xC0]
        );
    }

    #[test]
    fn rejects_corrupt_input() {
        let t = Tensor::full(&[3], 1.0);
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_tensor(&mut bad.as_slice()), Err(Error::Format(_))));

        let mut bad = buf.clone();
        bad[5] = 5;
        assert!(matches!(read_tensor(&mut bad.as_slice()), Err(Error::Format(_))));

        let short = &buf[..buf.len() - 2];
        assert!(matches!(read_tensor(&mut &short[..]), Err(Error::Format(_))));

        assert!(read_tensor(&mut &[][..]).unwrap().is_none());
    }

    fn tensor_strategy() -> impl Strategy<Value = Tensor> {
        prop::collection::vec(1usize..5, 1..=4).prop_flat_map(|shape| {
            let n: usize = shape.iter().product();
            prop::collection::vec(-1e6f32..1e6, n)
                .prop_map(move |d| Tensor::new(shape.clone(), d.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn concatenated_records_round_trip(ts in prop::collection::vec(tensor_strategy(), 0..4)) {
            let mut buf = Vec::new();
            for t in &ts {
                write_tensor(&mut buf, t).unwrap();
            }
            let back = read_all(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back, ts);
        }
    }
}
