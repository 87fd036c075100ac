//! Raw dataset parsers.
//!
//! Two families are supported: delimiter-separated ratings files in the
//! MovieLens style (`user::item::rating::timestamp`, delimiter and field
//! order configurable) and newline-delimited JSON review records in the
//! Amazon style. Malformed lines are counted and sampled rather than
//! fatal, unless they exceed 1% of the file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Interaction, RatingScale};

const MALFORMED_SAMPLE_LIMIT: usize = 5;
/// Lines beyond this malformed fraction abort the parse.
const MALFORMED_FATAL_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    User,
    Item,
    Rating,
    Timestamp,
}

/// Field layout of a delimiter-separated ratings file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingsFormat {
    pub delimiter: String,
    pub field_order: Vec<FieldKind>,
}

impl Default for RatingsFormat {
    fn default() -> Self {
        RatingsFormat {
            delimiter: "::".into(),
            field_order: vec![
                FieldKind::User,
                FieldKind::Item,
                FieldKind::Rating,
                FieldKind::Timestamp,
            ],
        }
    }
}

impl RatingsFormat {
    pub fn validate(&self) -> Result<()> {
        if self.delimiter.is_empty() {
            return Err(Error::Config("ratings delimiter must be non-empty".into()));
        }
        for required in [FieldKind::User, FieldKind::Item, FieldKind::Rating] {
            if !self.field_order.contains(&required) {
                return Err(Error::Config(format!(
                    "ratings field order must include {required:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Counters from one parse run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub total_lines: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub samples: Vec<String>,
}

impl ParseStats {
    fn record_malformed(&mut self, line_no: usize, line: &str, why: &str) {
        self.malformed += 1;
        if self.samples.len() < MALFORMED_SAMPLE_LIMIT {
            self.samples.push(format!("line {line_no}: {why}: {line}"));
        }
    }

    fn check_fatal(&self, path: &Path) -> Result<()> {
        if self.total_lines > 0
            && self.malformed as f64 > MALFORMED_FATAL_FRACTION * self.total_lines as f64
        {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!(
                    "{} of {} lines malformed (>{}%); samples:\n{}",
                    self.malformed,
                    self.total_lines,
                    MALFORMED_FATAL_FRACTION * 100.0,
                    self.samples.join("\n")
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct ParsedRatings {
    pub interactions: Vec<Interaction>,
    pub stats: ParseStats,
}

/// Parse a delimiter-separated ratings file (MovieLens style).
pub fn parse_movielens(
    path: impl AsRef<Path>,
    scale: RatingScale,
    format: &RatingsFormat,
) -> Result<ParsedRatings> {
    format.validate()?;
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut stats = ParseStats::default();
    let mut interactions = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        stats.total_lines += 1;
        match parse_ratings_line(&line, scale, format) {
            Ok(x) => interactions.push(x),
            Err(why) => stats.record_malformed(idx + 1, &line, &why),
        }
    }
    stats.check_fatal(path)?;
    if stats.malformed > 0 {
        warn!(
            "{}: skipped {} malformed of {} lines",
            path.display(),
            stats.malformed,
            stats.total_lines
        );
    }
    Ok(ParsedRatings {
        interactions,
        stats,
    })
}

fn parse_ratings_line(
    line: &str,
    scale: RatingScale,
    format: &RatingsFormat,
) -> std::result::Result<Interaction, String> {
    let fields: Vec<&str> = line.split(format.delimiter.as_str()).collect();
    if fields.len() < format.field_order.len() {
        return Err(format!(
            "expected {} fields, found {}",
            format.field_order.len(),
            fields.len()
        ));
    }
    let mut user = None;
    let mut item = None;
    let mut rating = None;
    let mut timestamp = 0i64;
    for (kind, raw) in format.field_order.iter().zip(&fields) {
        match kind {
            FieldKind::User => user = Some(raw.trim()),
            FieldKind::Item => item = Some(raw.trim()),
            FieldKind::Rating => {
                let r: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad rating `{raw}`"))?;
                if !scale.contains(r) {
                    return Err(format!(
                        "rating {r} outside scale [{}, {}]",
                        scale.min, scale.max
                    ));
                }
                rating = Some(r as f32);
            }
            FieldKind::Timestamp => {
                timestamp = raw
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad timestamp `{raw}`"))?;
            }
        }
    }
    let user = user.filter(|s| !s.is_empty()).ok_or("empty user id")?;
    let item = item.filter(|s| !s.is_empty()).ok_or("empty item id")?;
    Ok(Interaction {
        user_id: user.to_string(),
        item_id: item.to_string(),
        rating: rating.ok_or("missing rating")?,
        timestamp,
    })
}

/// Result of parsing an Amazon review file: deduplicated interactions plus
/// whatever item metadata the records carried inline.
#[derive(Debug)]
pub struct AmazonParse {
    pub interactions: Vec<Interaction>,
    /// item id -> category labels found inline, if any
    pub labels: HashMap<String, Vec<String>>,
    pub stats: ParseStats,
}

#[derive(Deserialize)]
struct AmazonRecord {
    #[serde(rename = "reviewerID")]
    reviewer_id: String,
    asin: String,
    overall: f64,
    #[serde(rename = "unixReviewTime", default)]
    unix_review_time: i64,
    #[serde(default)]
    category: Option<Vec<String>>,
    #[serde(default)]
    categories: Option<Vec<Vec<String>>>,
}

/// Parse newline-delimited Amazon review records (JSON lines).
///
/// Duplicate (reviewer, item) pairs are collapsed here, keeping the record
/// with the latest review time (ties: the later record).
pub fn parse_amazon(path: impl AsRef<Path>) -> Result<AmazonParse> {
    let path = path.as_ref();
    let scale = RatingScale::five_star();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut stats = ParseStats::default();
    let mut labels: HashMap<String, Vec<String>> = HashMap::new();
    let mut slot: HashMap<(String, String), usize> = HashMap::new();
    let mut interactions: Vec<Interaction> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        stats.total_lines += 1;
        let record: AmazonRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                stats.record_malformed(idx + 1, &line, &format!("bad json: {e}"));
                continue;
            }
        };
        if record.reviewer_id.is_empty() || record.asin.is_empty() {
            stats.record_malformed(idx + 1, &line, "empty reviewer or item id");
            continue;
        }
        if !scale.contains(record.overall) {
            stats.record_malformed(
                idx + 1,
                &line,
                &format!("rating {} outside [1, 5]", record.overall),
            );
            continue;
        }

        let mut found: Vec<String> = record.category.unwrap_or_default();
        if let Some(nested) = record.categories {
            found.extend(nested.into_iter().flatten());
        }
        if !found.is_empty() {
            let entry = labels.entry(record.asin.clone()).or_default();
            entry.extend(found);
            entry.sort();
            entry.dedup();
        }

        let x = Interaction {
            user_id: record.reviewer_id,
            item_id: record.asin,
            rating: record.overall as f32,
            timestamp: record.unix_review_time,
        };
        let key = (x.user_id.clone(), x.item_id.clone());
        match slot.get(&key) {
            None => {
                slot.insert(key, interactions.len());
                interactions.push(x);
            }
            Some(&at) => {
                stats.duplicates += 1;
                if x.timestamp >= interactions[at].timestamp {
                    interactions[at] = x;
                }
            }
        }
    }
    stats.check_fatal(path)?;
    if stats.malformed > 0 || stats.duplicates > 0 {
        warn!(
            "{}: {} malformed, {} duplicate records",
            path.display(),
            stats.malformed,
            stats.duplicates
        );
    }
    Ok(AmazonParse {
        interactions,
        labels,
        stats,
    })
}

/// One sidecar entry of item metadata.
#[derive(Debug, Clone, Default)]
pub struct SidecarEntry {
    pub title: Option<String>,
    pub labels: Vec<String>,
}

/// Item metadata keyed by raw item id.
pub type LabelSidecar = HashMap<String, SidecarEntry>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidecarFormat {
    /// `id::Title::Genre1|Genre2` lines (MovieLens `movies.dat`).
    MovielensDat,
    /// JSON lines with `asin`/`id`, optional `title`, and
    /// `category`/`categories`/`labels`.
    JsonLines,
}

#[derive(Deserialize)]
struct SidecarRecord {
    #[serde(alias = "asin", alias = "item_id")]
    id: String,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    category: Option<Vec<String>>,
    #[serde(default)]
    categories: Option<Vec<Vec<String>>>,
}

/// Parse a genre/category sidecar file.
pub fn parse_label_sidecar(path: impl AsRef<Path>, format: SidecarFormat) -> Result<LabelSidecar> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = LabelSidecar::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match format {
            SidecarFormat::MovielensDat => {
                let parts: Vec<&str> = line.splitn(3, "::").collect();
                if parts.len() < 3 {
                    return Err(Error::Format {
                        path: path.to_path_buf(),
                        reason: format!("line {}: expected id::title::genres", idx + 1),
                    });
                }
                let labels: Vec<String> = parts[2]
                    .split('|')
                    .map(str::trim)
                    .filter(|g| !g.is_empty() && *g != "(no genres listed)")
                    .map(String::from)
                    .collect();
                out.insert(
                    parts[0].trim().to_string(),
                    SidecarEntry {
                        title: Some(parts[1].trim().to_string()),
                        labels,
                    },
                );
            }
            SidecarFormat::JsonLines => {
                let r: SidecarRecord =
                    serde_json::from_str(&line).map_err(|e| Error::Format {
                        path: path.to_path_buf(),
                        reason: format!("line {}: {e}", idx + 1),
                    })?;
                let mut labels = r.labels.unwrap_or_default();
                labels.extend(r.category.unwrap_or_default());
                labels.extend(r.categories.unwrap_or_default().into_iter().flatten());
                labels.sort();
                labels.dedup();
                out.insert(
                    r.id,
                    SidecarEntry {
                        title: r.title,
                        labels,
                    },
                );
            }
        }
    }
    Ok(out)
}
