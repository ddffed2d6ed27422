//! Binary checkpoint files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `SMCF` |
//! | 4     | format version (u32) |
//! | 4     | dimension `d` (u32) |
//! | 4     | points per axis `n` (u32) |
//! | 8     | box length `L` (f64) |
//! | 8     | time `t` (f64) |
//! | 8     | step index (u64) |
//! | 16·n^d | `ψ` as `(re, im)` f64 pairs, row-major |
//! | 8     | carry word count `m` (u64, 0 when absent) |
//! | 8·m   | carry words (f64) |
//! | 8     | CRC-64/XZ of the `ψ` and carry bytes |

use std::fs;
use std::io::Write;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};
use smcf_core::evolution::Carry;
use smcf_core::{Complex64, Field, Grid};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"SMCF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8 + 8;
const CRC: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub d: usize,
    pub n: usize,
    pub length: f64,
    pub t: f64,
    pub step: u64,
    pub psi: Vec<Complex64>,
    /// Evolution carry needed for an exact resume.
    pub carry: Option<Vec<f64>>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                CliError::checkpoint(format!(
                    "truncated file: need {n} bytes at offset {}",
                    self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

impl Checkpoint {
    pub fn new(psi: &Field, t: f64, step: u64, carry: Option<&Carry>) -> Self {
        let g = psi.grid();
        Self {
            d: g.dim(),
            n: g.n(),
            length: g.length(),
            t,
            step,
            psi: psi.values().to_vec(),
            carry: carry.map(Carry::to_words),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let carry = self.carry.as_deref().unwrap_or(&[]);
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.psi.len() + 8 * carry.len() + 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.d as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&self.length.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        let body_start = out.len();
        for z in &self.psi {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out.extend_from_slice(&(carry.len() as u64).to_le_bytes());
        for w in carry {
            out.extend_from_slice(&w.to_le_bytes());
        }
        let sum = CRC.checksum(&out[body_start..]);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> CliResult<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(CliError::checkpoint("bad magic, not an SMCF checkpoint"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CliError::checkpoint(format!(
                "unsupported format version {version}"
            )));
        }
        let d = r.u32()? as usize;
        let n = r.u32()? as usize;
        let length = r.f64()?;
        let t = r.f64()?;
        let step = r.u64()?;
        let count = n
            .checked_pow(d as u32)
            .filter(|&c| c <= smcf_core::spectral::MAX_POINTS)
            .ok_or_else(|| CliError::checkpoint(format!("implausible grid {n}^{d}")))?;
        let body_start = r.pos;
        let mut psi = Vec::with_capacity(count);
        for _ in 0..count {
            let re = r.f64()?;
            let im = r.f64()?;
            psi.push(Complex64::new(re, im));
        }
        let m = r.u64()? as usize;
        if m > buf.len() / 8 {
            return Err(CliError::checkpoint(format!(
                "implausible carry length {m}"
            )));
        }
        let carry: Vec<f64> = (0..m).map(|_| r.f64()).collect::<CliResult<_>>()?;
        let body_end = r.pos;
        let stored = r.u64()?;
        if r.pos != buf.len() {
            return Err(CliError::checkpoint(format!(
                "{} trailing bytes after checksum",
                buf.len() - r.pos
            )));
        }
        let sum = CRC.checksum(&buf[body_start..body_end]);
        if sum != stored {
            return Err(CliError::checkpoint(format!(
                "checksum mismatch: stored {stored:016x}, computed {sum:016x}"
            )));
        }
        Ok(Self {
            d,
            n,
            length,
            t,
            step,
            psi,
            carry: (m > 0).then_some(carry),
        })
    }

    /// Writes to a sibling temporary file and renames it into place, so an
    /// interrupted write never leaves a truncated checkpoint behind.
    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        };
        write().map_err(|e| CliError::io("checkpoint", path, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let buf = fs::read(path).map_err(|e| CliError::io("checkpoint", path, e))?;
        Self::from_bytes(&buf).map_err(|mut e| {
            e.message = format!("{}: {}", path.display(), e.message);
            e
        })
    }

    pub fn check_grid(&self, grid: &Grid) -> CliResult<()> {
        if self.d != grid.dim() || self.n != grid.n() || self.length != grid.length() {
            return Err(CliError::checkpoint(format!(
                "checkpoint grid d={} n={} L={} does not match target d={} n={} L={}",
                self.d,
                self.n,
                self.length,
                grid.dim(),
                grid.n(),
                grid.length()
            )));
        }
        Ok(())
    }

    pub fn psi(&self, grid: &Grid) -> CliResult<Field> {
        self.check_grid(grid)?;
        Field::from_vec(grid, self.psi.clone()).map_err(|e| CliError::checkpoint(e.to_string()))
    }

    pub fn carry(&self, grid: &Grid) -> CliResult<Option<Carry>> {
        self.carry
            .as_ref()
            .map(|w| Carry::from_words(w, grid).map_err(|e| CliError::checkpoint(e.to_string())))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let grid = Grid::new(1, 8, 1.0).unwrap();
        let psi = Field::from_fn(&grid, |x| Complex64::new(x[0], -x[0] * 0.5));
        let mut c = Checkpoint::new(&psi, 0.25, 7, None);
        c.carry = Some(vec![1.0, 2.0, f64::MIN_POSITIVE]);
        c
    }

    #[test]
    fn header_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..4], b"SMCF");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), VERSION);
        assert_eq!(b.len(), HEADER_LEN + 16 * 8 + 8 + 3 * 8 + 8);
    }

    #[test]
    fn corruption_is_detected() {
        let c = sample();
        let mut b = c.to_bytes();
        assert_eq!(Checkpoint::from_bytes(&b).unwrap(), c);
        b[HEADER_LEN + 3] ^= 1;
        let e = Checkpoint::from_bytes(&b).unwrap_err();
        assert!(e.message.contains("checksum"));
        assert_eq!(e.exit_code(), 5);
        let b = c.to_bytes();
        assert!(Checkpoint::from_bytes(&b[..b.len() - 1]).is_err());
        let mut b = c.to_bytes();
        b[0] = b'X';
        assert!(Checkpoint::from_bytes(&b).is_err());
    }
}
