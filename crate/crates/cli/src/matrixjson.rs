//! The matrix interchange schema `{dims, real[], imag[]}`: row-major entries
//! with `dims = [rows, cols]`. Kets use `dims = [len, 1]`.

use fastdrive_core::qstate::{C64, CMat, CVec};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dims: [usize; 2],
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl MatrixJson {
    pub fn validate(&self) -> Result<(), String> {
        let n = self.dims[0] * self.dims[1];
        if self.real.len() != n || self.imag.len() != n {
            return Err(format!(
                "matrix data length {} / {} does not match dims {:?}",
                self.real.len(),
                self.imag.len(),
                self.dims
            ));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<CMat, String> {
        self.validate()?;
        Ok(Array2::from_shape_fn(
            (self.dims[0], self.dims[1]),
            |(r, c)| {
                let k = r * self.dims[1] + c;
                C64::new(self.real[k], self.imag[k])
            },
        ))
    }

    pub fn to_ket(&self) -> Result<CVec, String> {
        self.validate()?;
        if self.dims[1] != 1 {
            return Err(format!("ket must have dims [n, 1], got {:?}", self.dims));
        }
        Ok(Array1::from_shape_fn(self.dims[0], |r| {
            C64::new(self.real[r], self.imag[r])
        }))
    }

    pub fn from_matrix(m: &CMat) -> Self {
        MatrixJson {
            dims: [m.nrows(), m.ncols()],
            real: m.iter().map(|z| z.re).collect(),
            imag: m.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_ket(k: &CVec) -> Self {
        MatrixJson {
            dims: [k.len(), 1],
            real: k.iter().map(|z| z.re).collect(),
            imag: k.iter().map(|z| z.im).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let m = Array2::from_shape_fn((2, 3), |(r, c)| C64::new(r as f64, c as f64));
        let j = MatrixJson::from_matrix(&m);
        let back = j.to_matrix().unwrap();
        assert_eq!(m, back);
        assert!(j.to_ket().is_err());
    }
}
