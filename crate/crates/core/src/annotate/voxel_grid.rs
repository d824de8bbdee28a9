use crate::error::{Error, Result};
use crate::scene::{GridSpec, SemanticLabel, VoxelIndex};

/// Dense label array over a [`GridSpec`], x fastest, then y, then z.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    spec: GridSpec,
    labels: Vec<SemanticLabel>,
}

impl VoxelGrid {
    pub fn empty(spec: GridSpec) -> Self {
        Self {
            labels: vec![SemanticLabel::EMPTY; spec.voxel_count()],
            spec,
        }
    }

    pub fn from_labels(spec: GridSpec, labels: Vec<SemanticLabel>) -> Result<Self> {
        if labels.len() != spec.voxel_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for a grid of shape {:?}",
                labels.len(),
                spec.shape()
            )));
        }
        Ok(Self { spec, labels })
    }

    /// Builds a grid from raw codes, rejecting codes outside the registry.
    pub fn from_codes(spec: GridSpec, codes: &[u8]) -> Result<Self> {
        let labels = codes
            .iter()
            .map(|&c| SemanticLabel::new(c).ok_or(Error::BadLabel(c)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_labels(spec, labels)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn shape(&self) -> VoxelIndex {
        self.spec.shape()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [SemanticLabel] {
        &mut self.labels
    }

    pub fn into_labels(self) -> Vec<SemanticLabel> {
        self.labels
    }

    pub fn codes(&self) -> impl Iterator<Item = u8> + '_ {
        self.labels.iter().map(|l| l.code())
    }

    #[inline]
    pub fn get(&self, idx: VoxelIndex) -> SemanticLabel {
        self.labels[self.spec.linear(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: VoxelIndex, label: SemanticLabel) {
        let lin = self.spec.linear(idx);
        self.labels[lin] = label;
    }

    pub fn count_non_empty(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_empty()).count()
    }

    pub fn count(&self, label: SemanticLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Fails unless both grids describe the same lattice.
    pub fn check_same_spec(&self, other: &VoxelGrid) -> Result<()> {
        if self.spec.approx_eq(&other.spec) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "shape {:?} @ {} m vs shape {:?} @ {} m",
                self.shape(),
                self.spec.resolution(),
                other.shape(),
                other.spec.resolution()
            )))
        }
    }
}

/// Dense boolean mask over a [`GridSpec`], same layout as [`VoxelGrid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    shape: VoxelIndex,
    bits: Vec<bool>,
}

impl Mask {
    pub fn filled(spec: &GridSpec, value: bool) -> Self {
        Self {
            shape: spec.shape(),
            bits: vec![value; spec.voxel_count()],
        }
    }

    pub fn from_bits(spec: &GridSpec, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != spec.voxel_count() {
            return Err(Error::ShapeMismatch(format!(
                "mask of {} entries for a grid of shape {:?}",
                bits.len(),
                spec.shape()
            )));
        }
        Ok(Self {
            shape: spec.shape(),
            bits,
        })
    }

    pub fn shape(&self) -> VoxelIndex {
        self.shape
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    #[inline]
    pub fn get(&self, lin: usize) -> bool {
        self.bits[lin]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True where every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn check_matches(&self, spec: &GridSpec) -> Result<()> {
        if self.shape == spec.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "mask shape {:?} vs grid shape {:?}",
                self.shape,
                spec.shape()
            )))
        }
    }
}
