//! Record files and annual count tables.
//!
//! Record files are CSV with header `y,l,r[,weight]`. Count tables are
//! small JSON documents holding yearly foundation and closure counts, which
//! are expanded into weighted records using the mid-year event convention.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::ObservedRecord;
use crate::model::StudyWindow;

/// The 2018-2019 enterprise table shipped with the crate.
pub const ENTERPRISE_TABLE_JSON: &str = include_str!("../data/enterprise_2018_2019.json");

/// Parse a record CSV. Line numbers in errors refer to the input text.
pub fn parse_records<R: Read>(reader: R) -> Result<Vec<ObservedRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect::<Vec<_>>();
    let with_weight = match header.as_slice() {
        [y, l, r] if y == "y" && l == "l" && r == "r" => false,
        [y, l, r, wt] if y == "y" && l == "l" && r == "r" && wt == "weight" => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `y,l,r[,weight]`, found `{}`",
                    header.join(",")
                ),
            })
        }
    };

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let fail = |message: String| Error::Parse { line, message };
        let expected = if with_weight { 3..=4 } else { 3..=3 };
        if !expected.contains(&row.len()) {
            return Err(fail(format!(
                "expected {} fields, found {}",
                expected.end(),
                row.len()
            )));
        }
        let y: f64 = row[0]
            .parse()
            .map_err(|_| fail(format!("malformed number `{}` for y", &row[0])))?;
        if !y.is_finite() {
            return Err(fail(format!("y must be finite, got `{}`", &row[0])));
        }
        let l = parse_indicator(&row[1])
            .ok_or_else(|| fail(format!("l must be 0 or 1, got `{}`", &row[1])))?;
        let r = parse_indicator(&row[2])
            .ok_or_else(|| fail(format!("r must be 0 or 1, got `{}`", &row[2])))?;
        if l && r {
            return Err(fail("(l, r) = (1, 1) is never observed".into()));
        }
        let weight = match row.get(3) {
            Some(text) if !text.is_empty() => {
                let wt: f64 = text
                    .parse()
                    .map_err(|_| fail(format!("malformed number `{text}` for weight")))?;
                if !(wt >= 0.0 && wt.is_finite()) {
                    return Err(fail(format!("weight must be non-negative, got `{text}`")));
                }
                wt
            }
            _ => 1.0,
        };
        records.push(ObservedRecord::new(y, l, r, weight));
    }
    Ok(records)
}

fn parse_indicator(text: &str) -> Option<bool> {
    match text {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Read a record CSV from a file.
pub fn read_records(path: &Path) -> Result<Vec<ObservedRecord>> {
    let file = File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(std::io::BufReader::new(file))
}

/// Write records as CSV. Values are printed in shortest round-trip form,
/// so parsing the output reproduces the records exactly.
pub fn write_records<W: Write>(records: &[ObservedRecord], mut out: W) -> Result<()> {
    writeln!(out, "y,l,r,weight")?;
    for rec in records {
        let t = &rec.triple;
        writeln!(out, "{},{},{},{}", t.y, t.l as u8, t.r as u8, rec.weight)?;
    }
    out.flush()?;
    Ok(())
}

/// Closures in the study of units founded in the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InStudyClosures {
    pub founded: i32,
    pub closed: i32,
    pub count: u64,
}

/// Yearly counts of foundations and closures over the study years.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnualCountsTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Consecutive calendar years of the study.
    pub study_years: Vec<i32>,
    /// Closures of units founded during the study (uncensored lifespans).
    pub closures_founded_in_study: Vec<InStudyClosures>,
    /// Per study year: closures of units founded before the study.
    pub closures_founded_before: Vec<u64>,
    /// Per study year: foundations (right-censored unless closed in the study).
    pub foundations: Vec<u64>,
    /// The foundation counts also contain the units that closed during the
    /// study, which must be subtracted to leave only censored units.
    #[serde(alias = "exclusion_note")]
    pub foundations_include_uncensored: bool,
}

impl AnnualCountsTable {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .map_err(|source| Error::Open {
                path: path.to_path_buf(),
                source,
            })?
            .read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    fn year_index(&self, year: i32) -> Option<usize> {
        self.study_years.iter().position(|&y| y == year)
    }
}

/// Expand a count table into weighted records, assuming every event happens
/// mid-year and the study begins at the start of its first year:
///
/// * founded in year `a` and closed in year `b` of the study: `(b - a, 0, 0)`;
/// * founded before the study, closed in study year `k` (1-based): `(k - 0.5, 1, 0)`;
/// * founded in study year `k`, still active at study end: `(s - k + 0.5, 0, 1)`.
///
/// Zero counts produce no record.
pub fn expand_annual_counts(t: &AnnualCountsTable, w: &StudyWindow) -> Result<Vec<ObservedRecord>> {
    let years = t.study_years.len();
    if years == 0 {
        return Err(Error::InvalidTable("no study years".into()));
    }
    if t.study_years.windows(2).any(|p| p[1] != p[0] + 1) {
        return Err(Error::InvalidTable(format!(
            "study years must be consecutive, got {:?}",
            t.study_years
        )));
    }
    if (w.s() - years as f64).abs() > 1e-9 {
        return Err(Error::InvalidTable(format!(
            "study length s = {} does not match {} study years",
            w.s(),
            years
        )));
    }
    if t.closures_founded_before.len() != years || t.foundations.len() != years {
        return Err(Error::InvalidTable(format!(
            "per-year count lists must have {years} entries"
        )));
    }

    let mut uncensored_by_founding = vec![0u64; years];
    let mut records = Vec::new();
    for c in &t.closures_founded_in_study {
        let (a, b) = match (t.year_index(c.founded), t.year_index(c.closed)) {
            (Some(a), Some(b)) if b >= a => (a, b),
            _ => {
                return Err(Error::InvalidTable(format!(
                    "closure entry founded {} / closed {} is not inside the study",
                    c.founded, c.closed
                )))
            }
        };
        uncensored_by_founding[a] += c.count;
        if c.count > 0 {
            records.push(ObservedRecord::new(
                (b - a) as f64,
                false,
                false,
                c.count as f64,
            ));
        }
    }
    for (k, &count) in t.closures_founded_before.iter().enumerate() {
        if count > 0 {
            records.push(ObservedRecord::new(
                k as f64 + 0.5,
                true,
                false,
                count as f64,
            ));
        }
    }
    for (k, &raw) in t.foundations.iter().enumerate() {
        let count = if t.foundations_include_uncensored {
            raw.checked_sub(uncensored_by_founding[k]).ok_or_else(|| {
                Error::InvalidTable(format!(
                    "foundations in {} ({raw}) are fewer than their closures ({})",
                    t.study_years[k], uncensored_by_founding[k]
                ))
            })?
        } else {
            raw
        };
        if count > 0 {
            let y = w.s() - (k as f64 + 1.0) + 0.5;
            records.push(ObservedRecord::new(y, false, true, count as f64));
        }
    }
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(records)
}

/// The bundled enterprise table.
pub fn enterprise_table() -> Result<AnnualCountsTable> {
    AnnualCountsTable::from_json(ENTERPRISE_TABLE_JSON)
}

/// Records of the bundled enterprise table (study length 2 years). The
/// expansion does not depend on the cohort span.
pub fn enterprise_records() -> Result<Vec<ObservedRecord>> {
    let w = StudyWindow::new(2.0, 3.0)?;
    expand_annual_counts(&enterprise_table()?, &w)
}
