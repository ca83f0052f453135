//! Little-endian primitives for the versioned model containers.

use crate::error::FormatError;
use crate::scalar::Scalar;

#[derive(Default)]
pub(crate) struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    /// Starts a container with its text header line, e.g. `sast-triage-embed v1`.
    pub fn with_header(header: &str) -> Self {
        let mut buf = Vec::with_capacity(256);
        buf.extend_from_slice(header.as_bytes());
        buf.push(b'\n');
        Encoder { buf }
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn scalar<T: Scalar>(&mut self, v: T) {
        v.write_le(&mut self.buf);
    }

    pub fn scalars<T: Scalar>(&mut self, vs: &[T]) {
        self.usize(vs.len());
        for &v in vs {
            self.scalar(v);
        }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.usize(b.len());
        self.buf.extend_from_slice(b);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    /// Checks the `<magic> v<version>[ <rest>]` header line and returns the rest.
    pub fn open(
        data: &'a [u8],
        magic: &str,
        version: u32,
    ) -> Result<(Decoder<'a>, String), FormatError> {
        if data.is_empty() {
            return Err(FormatError::Empty);
        }
        let nl = data
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(FormatError::Truncated { offset: data.len() })?;
        let line = String::from_utf8_lossy(&data[..nl]).into_owned();
        let mut parts = line.splitn(3, ' ');
        let found_magic = parts.next().unwrap_or_default();
        if found_magic != magic {
            return Err(FormatError::BadMagic {
                expected: magic.to_string(),
                found: found_magic.to_string(),
            });
        }
        let found_version = parts.next().unwrap_or_default();
        if found_version != format!("v{version}") {
            return Err(FormatError::Version {
                expected: format!("v{version}"),
                found: found_version.to_string(),
            });
        }
        let rest = parts.next().unwrap_or_default().to_string();
        Ok((Decoder { data, pos: nl + 1 }, rest))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.data.len() - self.pos < n {
            return Err(FormatError::Truncated {
                offset: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize, FormatError> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| FormatError::Corrupt(format!("length {v} out of range")))
    }

    /// A length that must fit in what is left of the payload, given the
    /// minimum encoded size of one element.
    pub fn len(&mut self, elem_size: usize) -> Result<usize, FormatError> {
        let n = self.usize()?;
        let remaining = self.data.len() - self.pos;
        if n.saturating_mul(elem_size.max(1)) > remaining {
            return Err(FormatError::Truncated {
                offset: self.data.len(),
            });
        }
        Ok(n)
    }

    pub fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn scalar<T: Scalar>(&mut self) -> Result<T, FormatError> {
        Ok(T::read_le(self.take(T::WIDTH as usize)?))
    }

    pub fn scalars<T: Scalar>(&mut self) -> Result<Vec<T>, FormatError> {
        let n = self.len(T::WIDTH as usize)?;
        (0..n).map(|_| self.scalar()).collect()
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], FormatError> {
        let n = self.len(1)?;
        self.take(n)
    }

    pub fn string(&mut self) -> Result<String, FormatError> {
        let b = self.bytes()?;
        String::from_utf8(b.to_vec()).map_err(|_| FormatError::Corrupt("invalid utf-8".into()))
    }

    /// Checks the scalar width byte written by [`Encoder`] users.
    pub fn expect_width<T: Scalar>(&mut self) -> Result<(), FormatError> {
        let w = self.u8()?;
        if w != T::WIDTH {
            return Err(FormatError::ScalarWidth {
                expected: T::WIDTH,
                found: w,
            });
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), FormatError> {
        if self.pos != self.data.len() {
            return Err(FormatError::Corrupt(format!(
                "{} trailing bytes",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}
