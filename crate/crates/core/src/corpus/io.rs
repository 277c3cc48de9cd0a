use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    format_timestamp, parse_timestamp, CategoryPath, CategoryTaxonomy, Corpus, CorpusBuilder, CorpusError, LatLon,
    Origin, Venue,
};

/// One line of the check-in JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckInRecord {
    pub user: String,
    pub venue: String,
    pub ts: String,
}

/// One line of the venue JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueRecord {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// `Root/Specific`.
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyRecord {
    pub types: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_types: Option<Vec<String>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

fn file_label(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Yields `(line_number, line)` for every non-blank line.
fn jsonl_lines(path: &Path) -> Result<Vec<(usize, String)>, CorpusError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn read_taxonomy(path: &Path) -> Result<CategoryTaxonomy, CorpusError> {
    let file = File::open(path).map_err(io_err(path))?;
    let record: TaxonomyRecord = serde_json::from_reader(BufReader::new(file)).map_err(|e| CorpusError::Parse {
        file: file_label(path),
        line: e.line(),
        message: e.to_string(),
    })?;
    let event = record.event_types.map(|v| v.into_iter().collect::<BTreeSet<_>>());
    CategoryTaxonomy::new(record.types, event)
}

/// Loads and validates the four input files into an immutable corpus.
pub fn load_corpus(
    checkin_path: &Path,
    venue_path: &Path,
    social_path: &Path,
    taxonomy_path: &Path,
) -> Result<Corpus, CorpusError> {
    let taxonomy = read_taxonomy(taxonomy_path)?;
    let mut builder = CorpusBuilder::new(taxonomy);

    let label = file_label(venue_path);
    for (line, text) in jsonl_lines(venue_path)? {
        let parse_err = |message: String| CorpusError::Parse { file: label.clone(), line, message };
        let rec: VenueRecord = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        let category = CategoryPath::parse(&rec.category)
            .ok_or_else(|| parse_err(format!("category {:?} is not of the form Root/Specific", rec.category)))?;
        let venue = Venue { id: rec.id, name: rec.name, location: LatLon::new(rec.lat, rec.lon), category };
        builder.add_venue(venue, Origin::new(&label, line))?;
    }

    let label = file_label(checkin_path);
    for (line, text) in jsonl_lines(checkin_path)? {
        let parse_err = |message: String| CorpusError::Parse { file: label.clone(), line, message };
        let rec: CheckInRecord = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        let ts = parse_timestamp(&rec.ts).map_err(parse_err)?;
        builder.add_checkin(&rec.user, &rec.venue, ts, Origin::new(&label, line))?;
    }

    let label = file_label(social_path);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(social_path)
        .map_err(|e| CorpusError::Parse { file: label.clone(), line: 1, message: e.to_string() })?;
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Parse { file: label.clone(), line: 1, message: e.to_string() })?
        .clone();
    if headers.len() != 2 || &headers[0] != "user_a" || &headers[1] != "user_b" {
        return Err(CorpusError::Parse {
            file: label,
            line: 1,
            message: format!(
                "expected header `user_a,user_b`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::Parse {
            file: label.clone(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(CorpusError::Parse { file: label, line, message: "expected two columns".into() });
        }
        builder.add_friendship(&record[0], &record[1], Origin::new(&label, line))?;
    }

    Ok(builder.build())
}

impl Corpus {
    pub fn venue_records(&self) -> Vec<VenueRecord> {
        self.venues()
            .iter()
            .map(|v| VenueRecord {
                id: v.id.clone(),
                name: v.name.clone(),
                lat: v.location.lat,
                lon: v.location.lon,
                category: v.category.to_string(),
            })
            .collect()
    }

    /// Check-ins in canonical `(user, timestamp, venue)` order.
    pub fn checkin_records(&self) -> Vec<CheckInRecord> {
        self.checkins()
            .iter()
            .map(|c| CheckInRecord {
                user: self.user_id(c.user).to_string(),
                venue: self.venue(c.venue).id.clone(),
                ts: format_timestamp(c.ts),
            })
            .collect()
    }

    pub fn taxonomy_record(&self) -> TaxonomyRecord {
        let tax = self.taxonomy();
        TaxonomyRecord {
            types: tax.entries().map(|(s, r)| (s.to_string(), r.to_string())).collect(),
            event_types: Some(tax.event_types().map(str::to_string).collect()),
        }
    }

    /// Writes the corpus back out in canonical form: venues by id,
    /// check-ins by `(user, time, venue)`, edges sorted.
    pub fn export_canonical(&self, dir: &Path) -> Result<(), CorpusError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_venues(&dir.join("venues.jsonl"), &self.venue_records())?;
        write_checkins(&dir.join("checkins.jsonl"), &self.checkin_records())?;
        let edges: Vec<(String, String)> = self.social().edges().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        write_social(&dir.join("social.csv"), &edges)?;
        write_taxonomy(&dir.join("taxonomy.json"), &self.taxonomy_record())
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| io_err(path)(e.into()))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_venues(path: &Path, venues: &[VenueRecord]) -> Result<(), CorpusError> {
    write_jsonl(path, venues)
}

pub fn write_checkins(path: &Path, checkins: &[CheckInRecord]) -> Result<(), CorpusError> {
    write_jsonl(path, checkins)
}

pub fn write_social(path: &Path, edges: &[(String, String)]) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path)(e.into()))?;
    let to_io = |e: csv::Error| io_err(path)(e.into());
    w.write_record(["user_a", "user_b"]).map_err(to_io)?;
    for (a, b) in edges {
        w.write_record([a, b]).map_err(to_io)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_taxonomy(path: &Path, taxonomy: &TaxonomyRecord) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer_pretty(&mut w, taxonomy).map_err(|e| io_err(path)(e.into()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}
