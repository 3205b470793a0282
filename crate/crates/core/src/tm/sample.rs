use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binarized feature vector, packed 64 bits per word, with an optional
/// binary label.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "SampleRepr", try_from = "SampleRepr")]
pub struct BinarySample {
    words: Vec<u64>,
    len: usize,
    label: Option<u8>,
}

impl BinarySample {
    /// Packs `bits`; any nonzero entry is treated as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_iter_len(bits.iter().map(|&b| b != 0), bits.len())
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_iter_len(bits.iter().copied(), bits.len())
    }

    /// Bits of `value`, least significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self::from_iter_len((0..len).map(|i| value >> i & 1 == 1), len)
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
            label: None,
        }
    }

    fn from_iter_len(bits: impl Iterator<Item = bool>, len: usize) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for (i, b) in bits.enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self {
            words,
            len,
            label: None,
        }
    }

    pub fn with_label(mut self, label: u8) -> Self {
        assert!(label <= 1, "labels are binary");
        self.label = Some(label);
        self
    }

    pub fn set_label(&mut self, label: Option<u8>) {
        assert!(label.is_none_or(|l| l <= 1), "labels are binary");
        self.label = label;
    }

    pub fn label(&self) -> Option<u8> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Concatenates blocks in order; the label is dropped.
    pub fn concat(blocks: &[BinarySample]) -> Self {
        let len = blocks.iter().map(|b| b.len).sum();
        let bits = blocks.iter().flat_map(|b| (0..b.len).map(move |i| b.get(i)));
        Self::from_iter_len(bits, len)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bit_string(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Data(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    bits: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
}

impl From<BinarySample> for SampleRepr {
    fn from(s: BinarySample) -> Self {
        SampleRepr {
            bits: s.to_bit_string(),
            label: s.label,
        }
    }
}

impl TryFrom<SampleRepr> for BinarySample {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        if r.label.is_some_and(|l| l > 1) {
            return Err(Error::Data("labels are binary".into()));
        }
        let mut s = BinarySample::parse_bit_string(&r.bits)?;
        s.label = r.label;
        Ok(s)
    }
}
