use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// Values are codes `0..names.len()` into the category names.
    Categorical(Vec<String>),
}

/// A cleaned classification table. Labels are arm indices `0..K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    pub feature_names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl TabularDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.num_features()).map(|i| self.column(i)).collect()
    }

    pub fn categorical_mask(&self) -> Vec<bool> {
        self.kinds
            .iter()
            .map(|k| matches!(k, ColumnKind::Categorical(_)))
            .collect()
    }

    /// Writes the table back out with a `label` column holding class names.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, &label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row
                .iter()
                .zip(&self.kinds)
                .map(|(&v, kind)| match kind {
                    ColumnKind::Numeric => v.to_string(),
                    ColumnKind::Categorical(names) => names[v as usize].clone(),
                })
                .collect();
            rec.push(self.class_names[label].clone());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    #[default]
    Last,
    Name(String),
    Index(usize),
}

/// Column hints for [`load_csv`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvHints {
    pub label: LabelColumn,
    /// Columns forced to categorical even when every value parses as a number.
    pub categorical: Vec<String>,
    /// Columns to ignore entirely (e.g. row ids).
    pub drop: Vec<String>,
    /// Cell values treated as missing, in addition to empty cells.
    pub missing: Vec<String>,
}

impl Default for CsvHints {
    fn default() -> Self {
        Self {
            label: LabelColumn::Last,
            categorical: Vec::new(),
            drop: Vec::new(),
            missing: ["?", "NA", "N/A", "NaN", "nan", "null"]
                .map(String::from)
                .to_vec(),
        }
    }
}

/// Loads a headed CSV classification table.
///
/// Rows with any missing cell are dropped. Columns where every value parses
/// as a number are numeric; the rest are categorical with codes in order of
/// first appearance. Labels map to arms in order of first appearance.
pub fn load_csv(path: &Path, hints: &CsvHints) -> Result<TabularDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{}: missing header row", path.display())));
    }
    let label_idx = match &hints.label {
        LabelColumn::Last => header.len() - 1,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Config(format!("label column {i} out of range")));
        }
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column named {name:?}")))?,
    };
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_idx && !hints.drop.contains(&header[i]))
        .collect();
    if feature_idx.is_empty() {
        return Err(Error::Data("no feature columns".into()));
    }

    let is_missing = |cell: &str| cell.is_empty() || hints.missing.iter().any(|m| m == cell);
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let cells: Vec<String> = rec.iter().map(String::from).collect();
        if std::iter::once(label_idx)
            .chain(feature_idx.iter().copied())
            .any(|i| is_missing(&cells[i]))
        {
            continue;
        }
        records.push(cells);
    }
    if records.is_empty() {
        return Err(Error::Data(format!(
            "{}: no complete rows",
            path.display()
        )));
    }

    let mut kinds = Vec::with_capacity(feature_idx.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(feature_idx.len());
    for &i in &feature_idx {
        let forced = hints.categorical.contains(&header[i]);
        let parsed: Option<Vec<f64>> = if forced {
            None
        } else {
            records
                .iter()
                .map(|r| r[i].parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect()
        };
        match parsed {
            Some(col) => {
                kinds.push(ColumnKind::Numeric);
                columns.push(col);
            }
            None => {
                let (codes, names) = encode_first_appearance(records.iter().map(|r| r[i].as_str()));
                kinds.push(ColumnKind::Categorical(names));
                columns.push(codes.into_iter().map(|c| c as f64).collect());
            }
        }
    }
    let (labels, class_names) = encode_first_appearance(records.iter().map(|r| r[label_idx].as_str()));
    if class_names.len() < 2 {
        return Err(Error::Data(format!(
            "{}: label column {:?} has a single class",
            path.display(),
            header[label_idx]
        )));
    }
    let rows = (0..records.len())
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    Ok(TabularDataset {
        feature_names: feature_idx.iter().map(|&i| header[i].clone()).collect(),
        kinds,
        rows,
        labels,
        class_names,
    })
}

fn encode_first_appearance<'a>(values: impl Iterator<Item = &'a str>) -> (Vec<usize>, Vec<String>) {
    let mut index: HashMap<&'a str, usize> = HashMap::new();
    let mut names = Vec::new();
    let codes = values
        .map(|v| {
            *index.entry(v).or_insert_with(|| {
                names.push(v.to_string());
                names.len() - 1
            })
        })
        .collect();
    (codes, names)
}
