//! Reference sets: flattened entity trees as positional-column tuples.
//!
//! File formats (UTF-8, `\n` line endings):
//!
//! * CSV: header `attribute0,...,attributeK` (or relabeled names), one row
//!   per tuple, an empty field for a null. Standard CSV quoting.
//! * JSON Lines: one object per tuple, keys in column order, `null` for a
//!   missing value, no spaces: `{"attribute0":"honda","attribute1":"civic"}`.
//!
//! An empty reference set serializes to an empty file in both formats.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::corpus::Term;
use crate::error::{Error, Result};

pub type Tuple = Vec<Option<Term>>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReferenceSet {
    columns: Vec<String>,
    tuples: Vec<Tuple>,
}

pub fn default_label(index: usize) -> String {
    format!("attribute{index}")
}

impl ReferenceSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Tuples are padded or checked to `width`, then sorted and deduplicated.
    pub fn new(width: usize, mut tuples: Vec<Tuple>) -> Self {
        for row in &mut tuples {
            debug_assert!(row.len() <= width);
            row.resize(width, None);
        }
        tuples.retain(|r| r.iter().any(Option::is_some));
        tuples.sort();
        tuples.dedup();
        ReferenceSet {
            columns: (0..width).map(default_label).collect(),
            tuples,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    /// Replaces the first labels with `names`; remaining columns keep
    /// their default label.
    pub fn relabel(&mut self, names: &[String]) {
        for (col, name) in self.columns.iter_mut().zip(names) {
            *col = name.clone();
        }
    }

    /// Distinct values in one column.
    pub fn column_values(&self, column: usize) -> BTreeSet<&Term> {
        self.tuples
            .iter()
            .filter_map(|r| r.get(column).and_then(Option::as_ref))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.width() == 0 {
            return Ok(());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.tuples {
            w.write_record(row.iter().map(|v| v.as_ref().map_or("", Term::as_str)))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for row in &self.tuples {
            let mut line = String::from("{");
            for (i, (label, value)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&serde_json::to_string(label)?);
                line.push(':');
                match value {
                    Some(v) => line.push_str(&serde_json::to_string(v.as_str())?),
                    None => line.push_str("null"),
                }
            }
            line.push_str("}\n");
            out.write_all(line.as_bytes()).map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("jsonl output is UTF-8")
    }

    /// Reads the CSV layout above. Values are normalized like post text,
    /// so a hand-written gold table may use any casing. Column labels are
    /// kept as given.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let width = columns.len();
        let mut tuples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut row: Tuple = rec.iter().take(width).map(Term::parse).collect();
            row.resize(width, None);
            tuples.push(row);
        }
        let mut rs = ReferenceSet::new(width, tuples);
        rs.columns = columns;
        Ok(rs)
    }
}

/// Column agreement between a mined reference set and a trusted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Homogeneity {
    /// Distinct `(value, mined column)` pairs whose value occurs in gold.
    pub matched: usize,
    /// Of those, pairs where gold never places the value in that column.
    pub misplaced: usize,
}

impl Homogeneity {
    /// Misplaced fraction; 0 when nothing matched.
    pub fn fraction(&self) -> f64 {
        if self.matched == 0 {
            0.0
        } else {
            self.misplaced as f64 / self.matched as f64
        }
    }
}

/// Fraction of mined values that sit in a different column than in `gold`.
/// Values absent from `gold` are ignored.
pub fn column_homogeneity(mined: &ReferenceSet, gold: &ReferenceSet) -> Result<Homogeneity> {
    if gold.is_empty() {
        return Err(Error::InvalidConfig("gold reference set is empty".into()));
    }
    let mut gold_columns: BTreeMap<&Term, BTreeSet<usize>> = BTreeMap::new();
    for row in gold.tuples() {
        for (col, v) in row.iter().enumerate() {
            if let Some(v) = v {
                gold_columns.entry(v).or_default().insert(col);
            }
        }
    }
    let mut mined_pairs: BTreeSet<(&Term, usize)> = BTreeSet::new();
    for row in mined.tuples() {
        for (col, v) in row.iter().enumerate() {
            if let Some(v) = v {
                mined_pairs.insert((v, col));
            }
        }
    }
    let mut h = Homogeneity {
        matched: 0,
        misplaced: 0,
    };
    for (value, col) in mined_pairs {
        if let Some(cols) = gold_columns.get(value) {
            h.matched += 1;
            if !cols.contains(&col) {
                h.misplaced += 1;
            }
        }
    }
    Ok(h)
}
