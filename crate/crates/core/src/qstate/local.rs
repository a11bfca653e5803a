use super::dense;
use super::geometry::LatticeGeometry;
use super::CMat;
use crate::error::{Error, Result};

/// An operator with declared support on a lattice. The matrix lives on the
/// tensor product of the support sites in ascending site order.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub support: Vec<usize>,
    pub matrix: CMat,
}

impl LocalOperator {
    pub fn new(support: Vec<usize>, matrix: CMat) -> Self {
        let mut s = support;
        s.sort_unstable();
        LocalOperator { support: s, matrix }
    }

    /// Check the matrix dimension against the geometry.
    pub fn validate(&self, geom: &LatticeGeometry) -> Result<()> {
        if !geom.contains_sites(&self.support) {
            return Err(Error::UnknownSites(self.support.clone()));
        }
        let want = geom.dim_of(&self.support);
        if self.matrix.nrows() != want || self.matrix.ncols() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                got: self.matrix.nrows(),
            });
        }
        Ok(())
    }

    pub fn embed(&self, geom: &LatticeGeometry) -> Result<CMat> {
        dense::embed(&self.matrix, &self.support, geom)
    }

    pub fn norm(&self) -> f64 {
        dense::operator_norm(&self.matrix)
    }

    /// Whether the support is fully contained in `region`.
    pub fn supported_in(&self, region: &[usize]) -> bool {
        self.support.iter().all(|s| region.contains(s))
    }

    /// Re-express this operator on a sub-geometry spanned by `region`
    /// (which must contain the support): the support sites are re-indexed by
    /// their position in the sorted region.
    pub fn restrict_to(&self, region: &[usize]) -> Result<LocalOperator> {
        let mut sorted = region.to_vec();
        sorted.sort_unstable();
        let mapped: Option<Vec<usize>> = self
            .support
            .iter()
            .map(|s| sorted.iter().position(|r| r == s))
            .collect();
        match mapped {
            Some(new_support) => Ok(LocalOperator {
                support: new_support,
                matrix: self.matrix.clone(),
            }),
            None => Err(Error::UnknownSites(self.support.clone())),
        }
    }
}
