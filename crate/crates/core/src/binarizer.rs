//! Thermometer binarization of real-valued contexts.
//!
//! Each numeric feature is cut by an ascending list of thresholds and emits
//! one bit per threshold, set when the value is `>=` the threshold. A feature
//! with thresholds `[1, 2, 3]` encodes 2.5 as `110`. Categorical features emit
//! one bit per retained category instead.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tm::BinarySample;

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureEncoding {
    /// Strictly increasing cut points.
    Thermometer(Vec<f64>),
    /// Category codes, most frequent first; bit set on equality.
    OneHot(Vec<f64>),
}

impl FeatureEncoding {
    pub fn width(&self) -> usize {
        match self {
            FeatureEncoding::Thermometer(t) | FeatureEncoding::OneHot(t) => t.len(),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            FeatureEncoding::Thermometer(t) | FeatureEncoding::OneHot(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SchemaRepr", try_from = "SchemaRepr")]
pub struct BinarizationSchema {
    features: Vec<FeatureEncoding>,
}

impl BinarizationSchema {
    pub fn new(features: Vec<FeatureEncoding>) -> Result<Self> {
        for (i, f) in features.iter().enumerate() {
            if let FeatureEncoding::Thermometer(t) = f {
                if t.iter().any(|v| !v.is_finite()) || t.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Data(format!(
                        "thresholds of feature {i} must be finite and strictly increasing"
                    )));
                }
            }
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[FeatureEncoding] {
        &self.features
    }

    /// Number of input features `M`.
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// Number of output bits `B`.
    pub fn width(&self) -> usize {
        self.features.iter().map(FeatureEncoding::width).sum()
    }

    /// Output bit range of each feature.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.features
            .iter()
            .map(|f| {
                let r = start..start + f.width();
                start = r.end;
                r
            })
            .collect()
    }

    pub fn transform(&self, context: &[f64]) -> Result<BinarySample> {
        if context.len() != self.features.len() {
            return Err(Error::Width {
                expected: self.features.len(),
                actual: context.len(),
            });
        }
        let mut out = BinarySample::zeros(self.width());
        let mut pos = 0;
        for (f, &value) in self.features.iter().zip(context) {
            match f {
                FeatureEncoding::Thermometer(t) => {
                    for &tau in t {
                        out.set(pos, value >= tau);
                        pos += 1;
                    }
                }
                FeatureEncoding::OneHot(codes) => {
                    for &c in codes {
                        out.set(pos, value == c);
                        pos += 1;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Fits a thermometer schema over numeric columns.
///
/// A column with at most `max_bits` distinct values uses those values as
/// thresholds. Otherwise the thresholds are the sample quantiles at levels
/// `0, 1/b, ..., (b-1)/b` (lower order statistic), with duplicates collapsed.
pub fn fit_schema(columns: &[Vec<f64>], max_bits: &[usize]) -> Result<BinarizationSchema> {
    fit_schema_with_kinds(columns, max_bits, &vec![false; columns.len()])
}

/// Like [`fit_schema`], with columns flagged `categorical` encoded one-hot
/// over their `max_bits` most frequent values.
pub fn fit_schema_with_kinds(
    columns: &[Vec<f64>],
    max_bits: &[usize],
    categorical: &[bool],
) -> Result<BinarizationSchema> {
    if max_bits.len() != columns.len() || categorical.len() != columns.len() {
        return Err(Error::Width {
            expected: columns.len(),
            actual: max_bits.len().min(categorical.len()),
        });
    }
    let mut features = Vec::with_capacity(columns.len());
    for (i, ((col, &bits), &cat)) in columns.iter().zip(max_bits).zip(categorical).enumerate() {
        if col.is_empty() {
            return Err(Error::Data(format!("feature {i} has no samples")));
        }
        if bits == 0 {
            return Err(Error::Config(format!("feature {i}: max bits must be >= 1")));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("feature {i} has non-finite values")));
        }
        features.push(if cat {
            FeatureEncoding::OneHot(top_categories(col, bits))
        } else {
            FeatureEncoding::Thermometer(thresholds(col, bits))
        });
    }
    BinarizationSchema::new(features)
}

fn thresholds(col: &[f64], bits: usize) -> Vec<f64> {
    let mut sorted = col.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut unique = sorted.clone();
    unique.dedup();
    if unique.len() <= bits {
        return unique;
    }
    let m = sorted.len();
    let mut out: Vec<f64> = (0..bits).map(|i| sorted[i * m / bits]).collect();
    out.dedup();
    out
}

fn top_categories(col: &[f64], bits: usize) -> Vec<f64> {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for v in col {
        *counts.entry(v.to_bits()).or_default() += 1;
    }
    let mut ranked: Vec<(f64, usize)> = counts
        .into_iter()
        .map(|(b, c)| (f64::from_bits(b), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.total_cmp(&b.0)));
    ranked.into_iter().take(bits).map(|(v, _)| v).collect()
}

/// One bit per pixel: set iff `pixel >= cutoff`.
pub fn threshold_binarize(pixels: &[i64], cutoff: i64) -> BinarySample {
    let bits: Vec<bool> = pixels.iter().map(|&p| p >= cutoff).collect();
    BinarySample::from_bools(&bits)
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    num_features: usize,
    /// feature index → ascending thresholds (or category codes)
    thresholds: BTreeMap<usize, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    categorical: Vec<usize>,
}

impl From<BinarizationSchema> for SchemaRepr {
    fn from(s: BinarizationSchema) -> Self {
        let mut categorical = Vec::new();
        let thresholds = s
            .features
            .into_iter()
            .enumerate()
            .map(|(i, f)| match f {
                FeatureEncoding::Thermometer(t) => (i, t),
                FeatureEncoding::OneHot(c) => {
                    categorical.push(i);
                    (i, c)
                }
            })
            .collect::<BTreeMap<_, _>>();
        SchemaRepr {
            num_features: thresholds.len(),
            thresholds,
            categorical,
        }
    }
}

impl TryFrom<SchemaRepr> for BinarizationSchema {
    type Error = Error;

    fn try_from(r: SchemaRepr) -> Result<Self> {
        let mut features = Vec::with_capacity(r.num_features);
        for i in 0..r.num_features {
            let t = r
                .thresholds
                .get(&i)
                .ok_or_else(|| Error::Data(format!("schema has no thresholds for feature {i}")))?
                .clone();
            features.push(if r.categorical.contains(&i) {
                FeatureEncoding::OneHot(t)
            } else {
                FeatureEncoding::Thermometer(t)
            });
        }
        BinarizationSchema::new(features)
    }
}
