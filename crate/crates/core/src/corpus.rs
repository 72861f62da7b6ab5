//! Publication records, external journal metrics, and their file formats.
//!
//! Publications are read from delimited text with the columns
//! `paper_id,unit_id,citations,categories`, where `categories` holds a
//! `;`-separated list of subject labels, or from JSON lines carrying the same
//! four fields (`categories` as an array). Fields containing the delimiter are
//! quoted with `"`, and embedded quotes are doubled, as in RFC 4180.
//!
//! Metrics are read from delimited text with the columns
//! `unit_id,n_pub,n_cit,jif2,jif5`; an empty cell marks an absent value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separator between category labels inside the `categories` column.
pub const CATEGORY_SEPARATOR: char = ';';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub paper_id: String,
    pub unit_id: String,
    pub citations: u64,
    pub categories: Vec<String>,
}

impl PublicationRecord {
    pub fn new(
        paper_id: impl Into<String>,
        unit_id: impl Into<String>,
        citations: u64,
        categories: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            paper_id: paper_id.into(),
            unit_id: unit_id.into(),
            citations,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    /// Category labels with repeats removed, in first-seen order.
    pub fn distinct_categories(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.categories
            .iter()
            .filter(|c| seen.insert(c.as_str()))
            .map(String::as_str)
            .collect()
    }
}

/// An immutable, indexed collection of publication records.
///
/// Records are held in canonical order (sorted by `paper_id`), so every
/// aggregate computed from a corpus is independent of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    units: BTreeMap<String, Vec<usize>>,
    categories: BTreeMap<String, Vec<usize>>,
    pub publication_year: Option<i32>,
    pub citation_window_end: Option<i32>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate paper ids and blank identifiers.
    pub fn from_records(records: Vec<PublicationRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            check_record(r).map_err(|reason| Error::MalformedRow {
                row: i as u64 + 1,
                reason,
            })?;
        }
        let mut indexed: Vec<(usize, PublicationRecord)> =
            records.into_iter().enumerate().collect();
        indexed.sort_by(|a, b| a.1.paper_id.cmp(&b.1.paper_id));
        if let Some(w) = indexed
            .windows(2)
            .find(|w| w[0].1.paper_id == w[1].1.paper_id)
        {
            let row = w[0].0.max(w[1].0) as u64 + 1;
            return Err(Error::DuplicatePaperId {
                row,
                paper_id: w[0].1.paper_id.clone(),
            });
        }
        let records: Vec<PublicationRecord> = indexed.into_iter().map(|(_, r)| r).collect();

        let mut units: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut categories: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            units.entry(r.unit_id.clone()).or_default().push(i);
            for c in r.distinct_categories() {
                categories.entry(c.to_string()).or_default().push(i);
            }
        }
        Ok(Self {
            records,
            units,
            categories,
            publication_year: None,
            citation_window_end: None,
        })
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.keys().map(String::as_str)
    }

    pub fn category_labels(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn contains_unit(&self, unit_id: &str) -> bool {
        self.units.contains_key(unit_id)
    }

    /// Records of one unit in canonical order; empty if the unit is unknown.
    pub fn unit_records(&self, unit_id: &str) -> impl Iterator<Item = &PublicationRecord> + Clone {
        self.units
            .get(unit_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.records[i])
    }

    pub fn unit_size(&self, unit_id: &str) -> usize {
        self.units.get(unit_id).map_or(0, Vec::len)
    }

    /// Records listing `label` among their categories, in canonical order.
    pub fn category_records(
        &self,
        label: &str,
    ) -> impl Iterator<Item = &PublicationRecord> + Clone {
        self.categories
            .get(label)
            .into_iter()
            .flatten()
            .map(move |&i| &self.records[i])
    }

    pub fn unit_sizes(&self) -> BTreeMap<String, usize> {
        self.units
            .iter()
            .map(|(k, v)| (k.clone(), v.len()))
            .collect()
    }

    pub fn citations(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.citations).collect()
    }

    /// Sum of citations received by a unit's papers.
    pub fn unit_citations(&self, unit_id: &str) -> u64 {
        self.unit_records(unit_id).map(|r| r.citations).sum()
    }
}

fn check_record(r: &PublicationRecord) -> std::result::Result<(), String> {
    if r.paper_id.trim().is_empty() {
        return Err("empty paper_id".into());
    }
    if r.unit_id.trim().is_empty() {
        return Err(format!("paper `{}` has an empty unit_id", r.paper_id));
    }
    if let Some(bad) = r
        .categories
        .iter()
        .find(|c| c.trim().is_empty() || c.contains(CATEGORY_SEPARATOR))
    {
        return Err(format!(
            "paper `{}` has invalid category label `{bad}`",
            r.paper_id
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// Comma-separated text with a header row.
    #[default]
    Delimited,
    /// One JSON object per line.
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Abort the whole ingest on the first repeated `paper_id`.
    #[default]
    Reject,
    /// Keep the first occurrence and skip later ones.
    KeepFirst,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    pub format: InputFormat,
    pub duplicates: DuplicatePolicy,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    pub rows_read: u64,
    pub duplicates_skipped: u64,
}

/// Reads publication records.
pub fn ingest_publications<R: Read>(source: R, options: IngestOptions) -> Result<Ingested> {
    let rows = match options.format {
        InputFormat::Delimited => read_delimited_publications(source)?,
        InputFormat::JsonLines => read_json_publications(source)?,
    };
    if rows.is_empty() {
        return Err(Error::EmptySource);
    }
    let rows_read = rows.len() as u64;

    let mut seen: BTreeMap<String, u64> = BTreeMap::new();
    let mut records = Vec::with_capacity(rows.len());
    let mut duplicates_skipped = 0;
    for (row, record) in rows {
        if seen.contains_key(&record.paper_id) {
            match options.duplicates {
                DuplicatePolicy::Reject => {
                    return Err(Error::DuplicatePaperId {
                        row,
                        paper_id: record.paper_id,
                    })
                }
                DuplicatePolicy::KeepFirst => {
                    duplicates_skipped += 1;
                    continue;
                }
            }
        }
        seen.insert(record.paper_id.clone(), row);
        records.push(record);
    }
    Ok(Ingested {
        corpus: Corpus::from_records(records)?,
        rows_read,
        duplicates_skipped,
    })
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn read_delimited_publications<R: Read>(source: R) -> Result<Vec<(u64, PublicationRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = match reader.headers() {
        Ok(h) if h.iter().all(|f| f.trim().is_empty()) => return Err(Error::EmptySource),
        Ok(h) => h.clone(),
        Err(e) => return Err(utf8_or_csv(e, 1)),
    };
    let cols = [
        column_index(&headers, "paper_id")?,
        column_index(&headers, "unit_id")?,
        column_index(&headers, "citations")?,
        column_index(&headers, "categories")?,
    ];

    let mut out = Vec::new();
    for result in reader.records() {
        let rec = match result {
            Ok(rec) => rec,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(utf8_or_csv(e, line));
            }
        };
        let row = rec.position().map_or(out.len() as u64 + 2, |p| p.line());
        let field = |i: usize| rec.get(cols[i]).unwrap_or("").trim();
        let record = parse_publication(
            row,
            field(0),
            field(1),
            field(2),
            split_categories(field(3)),
        )?;
        out.push((row, record));
    }
    Ok(out)
}

fn utf8_or_csv(e: csv::Error, row: u64) -> Error {
    match e.kind() {
        csv::ErrorKind::Utf8 { .. } => Error::MalformedRow {
            row,
            reason: "invalid UTF-8".into(),
        },
        csv::ErrorKind::UnequalLengths {
            len, expected_len, ..
        } => Error::MalformedRow {
            row,
            reason: format!("expected {expected_len} fields, found {len}"),
        },
        _ => Error::Csv(e),
    }
}

fn split_categories(cell: &str) -> Vec<String> {
    if cell.is_empty() {
        return Vec::new();
    }
    cell.split(CATEGORY_SEPARATOR)
        .map(|c| c.trim().to_string())
        .collect()
}

fn parse_publication(
    row: u64,
    paper_id: &str,
    unit_id: &str,
    citations: &str,
    categories: Vec<String>,
) -> Result<PublicationRecord> {
    let malformed = |reason: String| Error::MalformedRow { row, reason };
    if paper_id.is_empty() {
        return Err(malformed("empty paper_id".into()));
    }
    if unit_id.is_empty() {
        return Err(malformed("empty unit_id".into()));
    }
    let citations: u64 = citations.parse().map_err(|_| {
        malformed(format!(
            "citations `{citations}` is not a non-negative integer"
        ))
    })?;
    if categories.is_empty() {
        return Err(malformed("no categories".into()));
    }
    if categories.iter().any(|c| c.is_empty()) {
        return Err(malformed("empty category label".into()));
    }
    Ok(PublicationRecord {
        paper_id: paper_id.to_string(),
        unit_id: unit_id.to_string(),
        citations,
        categories,
    })
}

#[derive(Deserialize)]
struct JsonPublication {
    paper_id: String,
    unit_id: String,
    citations: serde_json::Number,
    categories: Vec<String>,
}

fn read_json_publications<R: Read>(source: R) -> Result<Vec<(u64, PublicationRecord)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let row = i as u64 + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::MalformedRow {
                row,
                reason: "invalid UTF-8".into(),
            },
            _ => Error::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonPublication =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                row,
                reason: e.to_string(),
            })?;
        let categories = raw
            .categories
            .iter()
            .map(|c| c.trim().to_string())
            .collect();
        let record = parse_publication(
            row,
            raw.paper_id.trim(),
            raw.unit_id.trim(),
            &raw.citations.to_string(),
            categories,
        )?;
        out.push((row, record));
    }
    Ok(out)
}

/// Writes records in the delimited publications format.
pub fn write_publications<W: Write>(corpus: &Corpus, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["paper_id", "unit_id", "citations", "categories"])?;
    for r in corpus.records() {
        let cats = r.categories.join(&CATEGORY_SEPARATOR.to_string());
        w.write_record([
            r.paper_id.as_str(),
            &r.unit_id,
            &r.citations.to_string(),
            &cats,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records as JSON lines.
pub fn write_publications_json<W: Write>(corpus: &Corpus, mut sink: W) -> Result<()> {
    for r in corpus.records() {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExternalMetricsRecord {
    pub unit_id: String,
    pub n_pub: Option<u64>,
    pub n_cit: Option<u64>,
    pub jif2: Option<f64>,
    pub jif5: Option<f64>,
}

pub type MetricsTable = BTreeMap<String, ExternalMetricsRecord>;

/// Reads per-unit external metrics. An empty source yields an empty table.
pub fn ingest_metrics<R: Read>(source: R) -> Result<MetricsTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(utf8_or_csv(e, 1)),
    };
    let mut table = MetricsTable::new();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Ok(table);
    }
    let unit_col = column_index(&headers, "unit_id")?;
    let opt_col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (pub_col, cit_col, jif2_col, jif5_col) = (
        opt_col("n_pub"),
        opt_col("n_cit"),
        opt_col("jif2"),
        opt_col("jif5"),
    );

    for result in reader.records() {
        let rec = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            utf8_or_csv(e, line)
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        let cell = |col: Option<usize>| {
            col.and_then(|c| rec.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
        };
        let unit_id = cell(Some(unit_col)).ok_or(Error::MalformedRow {
            row,
            reason: "empty unit_id".into(),
        })?;
        let record = ExternalMetricsRecord {
            unit_id: unit_id.to_string(),
            n_pub: cell(pub_col)
                .map(|v| parse_count(row, "n_pub", v))
                .transpose()?,
            n_cit: cell(cit_col)
                .map(|v| parse_count(row, "n_cit", v))
                .transpose()?,
            jif2: cell(jif2_col)
                .map(|v| parse_real(row, "jif2", v))
                .transpose()?,
            jif5: cell(jif5_col)
                .map(|v| parse_real(row, "jif5", v))
                .transpose()?,
        };
        if table.contains_key(unit_id) {
            return Err(Error::DuplicateUnitId {
                row,
                unit_id: unit_id.to_string(),
            });
        }
        table.insert(unit_id.to_string(), record);
    }
    Ok(table)
}

fn parse_count(row: u64, column: &str, value: &str) -> Result<u64> {
    value.parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("{column} `{value}` is not a non-negative integer"),
    })
}

fn parse_real(row: u64, column: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(Error::MalformedRow {
            row,
            reason: format!("{column} `{value}` is not a non-negative number"),
        }),
    }
}

pub fn write_metrics<W: Write>(table: &MetricsTable, sink: W) -> Result<()> {
    fn show<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["unit_id", "n_pub", "n_cit", "jif2", "jif5"])?;
    for m in table.values() {
        w.write_record([
            m.unit_id.clone(),
            show(m.n_pub),
            show(m.n_cit),
            show(m.jif2),
            show(m.jif5),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    EmptyCategories { paper_id: String },
    DuplicateCategory { paper_id: String, label: String },
    UnmatchedUnit { unit_id: String },
}

impl fmt::Display for Anomaly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anomaly::EmptyCategories { paper_id } => {
                write!(f, "paper `{paper_id}` has no categories")
            }
            Anomaly::DuplicateCategory { paper_id, label } => {
                write!(
                    f,
                    "paper `{paper_id}` lists category `{label}` more than once"
                )
            }
            Anomaly::UnmatchedUnit { unit_id } => {
                write!(
                    f,
                    "warning: metrics name unit `{unit_id}` which has no records"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub anomalies: Vec<Anomaly>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.anomalies.is_empty()
    }
}

/// Lists anomalies in a corpus and, optionally, its companion metrics table.
pub fn validate(corpus: &Corpus, metrics: Option<&MetricsTable>) -> ValidationReport {
    let mut anomalies = Vec::new();
    for r in corpus.records() {
        if r.categories.is_empty() {
            anomalies.push(Anomaly::EmptyCategories {
                paper_id: r.paper_id.clone(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for c in &r.categories {
            if !seen.insert(c) && reported.insert(c) {
                anomalies.push(Anomaly::DuplicateCategory {
                    paper_id: r.paper_id.clone(),
                    label: c.clone(),
                });
            }
        }
    }
    if let Some(metrics) = metrics {
        for unit_id in metrics.keys().filter(|u| !corpus.contains_unit(u)) {
            anomalies.push(Anomaly::UnmatchedUnit {
                unit_id: unit_id.clone(),
            });
        }
    }
    ValidationReport { anomalies }
}
