use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{ContentCatalog, DemandMatrix};
use crate::constellation::csv_to_error as csv_error;
use crate::{Error, Result};

const TRACE_HEADER: [&str; 4] = ["slot", "user_node", "content", "demand"];
const CATALOG_HEADER: [&str; 2] = ["content", "size_mb"];
const DEFAULT_SIZE_MB: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    /// Valid user node ids; when set, unknown ids are an error and the matrix
    /// has one row per listed user in this order.
    pub known_users: Option<Vec<String>>,
    /// Inclusive `(first, last)` slot window; kept slots are renumbered from 1.
    pub window: Option<(usize, usize)>,
    /// Keep only the `k` contents with the highest total demand.
    pub top_k: Option<usize>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            known_users: None,
            window: None,
            top_k: Some(10),
        }
    }
}

fn parse_err(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

/// Reads a `content,size_mb` catalog.
pub fn load_catalog(path: &Path) -> Result<ContentCatalog> {
    let mut reader = open(path)?;
    check_header(path, &mut reader, &CATALOG_HEADER)?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        let size: f64 = record[1]
            .parse()
            .map_err(|e| parse_err(path, line, format!("size_mb `{}`: {e}", &record[1])))?;
        if !(size > 0.0) || !size.is_finite() {
            return Err(parse_err(path, line, format!("size_mb must be positive, got {size}")));
        }
        entries.push((record[0].to_string(), size));
    }
    ContentCatalog::new(entries)
}

pub fn save_catalog(path: &Path, catalog: &ContentCatalog) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CATALOG_HEADER)?;
    for (c, s) in catalog.contents.iter().zip(&catalog.sizes_mb) {
        w.write_record([c.as_str(), &s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a normalised `slot,user_node,content,demand` trace.
///
/// Contents missing from `catalog` get a 1 MB default size. Repeated rows
/// for the same key accumulate.
pub fn load_trace(
    path: &Path,
    catalog: Option<&ContentCatalog>,
    opts: &TraceOptions,
) -> Result<(ContentCatalog, DemandMatrix)> {
    let mut reader = open(path)?;
    check_header(path, &mut reader, &TRACE_HEADER)?;
    let known: Option<HashMap<&str, usize>> = opts
        .known_users
        .as_ref()
        .map(|users| users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect());

    // (slot, user, content) -> demand, collected before the axes are fixed.
    let mut rows: Vec<(usize, String, String, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(path, line, format!("expected 4 fields, found {}", record.len())));
        }
        let slot: usize = record[0]
            .parse()
            .map_err(|e| parse_err(path, line, format!("slot `{}`: {e}", &record[0])))?;
        if slot == 0 {
            return Err(parse_err(path, line, "slots are 1-based"));
        }
        let user = &record[1];
        if let Some(k) = &known {
            if !k.contains_key(user) {
                return Err(parse_err(path, line, format!("unknown user node `{user}`")));
            }
        }
        let demand: f64 = record[3]
            .parse()
            .map_err(|e| parse_err(path, line, format!("demand `{}`: {e}", &record[3])))?;
        if !(demand >= 0.0) || !demand.is_finite() {
            return Err(parse_err(path, line, format!("demand must be finite and >= 0, got {demand}")));
        }
        if let Some(cat) = catalog {
            if cat.position(&record[2]).is_none() {
                return Err(parse_err(path, line, format!("content `{}` not in catalog", &record[2])));
            }
        }
        rows.push((slot, user.to_string(), record[2].to_string(), demand));
    }

    if let Some((first, last)) = opts.window {
        if first == 0 || last < first {
            return Err(Error::param("window", format!("invalid slot window {first}..={last}")));
        }
        rows.retain(|r| r.0 >= first && r.0 <= last);
        for r in &mut rows {
            r.0 = r.0 - first + 1;
        }
    }
    let slots = match opts.window {
        Some((first, last)) => last - first + 1,
        None => rows.iter().map(|r| r.0).max().unwrap_or(0),
    };

    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for r in &rows {
        *totals.entry(r.2.as_str()).or_default() += r.3;
    }
    let mut ranked: Vec<(&str, f64)> = totals.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if let Some(k) = opts.top_k {
        ranked.truncate(k);
    }
    let contents: Vec<String> = ranked.iter().map(|(c, _)| c.to_string()).collect();
    let sizes = contents
        .iter()
        .map(|c| {
            catalog
                .and_then(|cat| cat.position(c).map(|i| cat.size(i)))
                .unwrap_or(DEFAULT_SIZE_MB)
        })
        .collect();
    let out_catalog = ContentCatalog {
        contents: contents.clone(),
        sizes_mb: sizes,
    };

    let users: Vec<String> = match &opts.known_users {
        Some(u) => u.clone(),
        None => {
            let mut u: Vec<String> = rows.iter().map(|r| r.1.clone()).collect();
            u.sort();
            u.dedup();
            u
        }
    };
    let user_pos: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let content_pos: HashMap<&str, usize> = contents.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut matrix = DemandMatrix::zeros(users.clone(), contents.clone(), slots);
    for (slot, user, content, demand) in &rows {
        if let Some(&c) = content_pos.get(content.as_str()) {
            matrix.add(*slot, c, user_pos[user.as_str()], *demand);
        }
    }
    Ok((out_catalog, matrix))
}

/// Writes every nonzero entry, ordered by slot, content, user.
pub fn save_trace(path: &Path, demand: &DemandMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(TRACE_HEADER)?;
    for t in 1..=demand.slots() {
        for (c, content) in demand.contents().iter().enumerate() {
            for (u, user) in demand.users().iter().enumerate() {
                let v = demand.get(t, c, u);
                if v > 0.0 {
                    w.write_record([t.to_string(), user.clone(), content.clone(), v.to_string()])?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
