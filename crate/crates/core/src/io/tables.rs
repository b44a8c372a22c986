use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{AnnotationStore, LandmarkKey, Point3, PredictionStore, Weights};
use crate::radii::{CurveSample, HitRateCurve};

use super::{format_sig6, write_file};

pub const ANNOTATIONS_HEADER: [&str; 6] = [
    "image_id",
    "landmark_id",
    "annotator_id",
    "x_mm",
    "y_mm",
    "z_mm",
];
pub const PREDICTIONS_HEADER: [&str; 6] = [
    "algorithm_id",
    "image_id",
    "landmark_id",
    "x_mm",
    "y_mm",
    "z_mm",
];
pub const RUNTIMES_HEADER: [&str; 2] = ["algorithm_id", "seconds"];
pub const WEIGHTS_HEADER: [&str; 2] = ["annotator_id", "lambda"];
pub const CURVES_HEADER: [&str; 4] = ["algorithm_id", "mu", "radius_mm", "hit_rate"];

/// File name of the runtimes sidecar next to a predictions file.
pub const RUNTIMES_SIDECAR: &str = "runtimes.csv";

struct Table<'p> {
    path: &'p Path,
    reader: csv::Reader<Box<dyn Read + 'p>>,
}

struct Row {
    line: u64,
    record: csv::StringRecord,
}

impl<'p> Table<'p> {
    fn open(path: &'p Path, reader: Box<dyn Read + 'p>, header: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let found = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if found.is_empty() || found.iter().ne(header.iter().copied()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!(
                    "missing or unexpected header, expected `{}`",
                    header.join(",")
                ),
            });
        }
        Ok(Self { path, reader })
    }

    fn rows(&mut self, width: usize) -> Result<Vec<Row>> {
        let path = self.path;
        self.reader
            .records()
            .map(|r| {
                let record = r.map_err(|e| csv_error(path, e))?;
                let line = record.position().map_or(0, |p| p.line());
                if record.len() != width {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        line,
                        message: format!("expected {width} fields, found {}", record.len()),
                    });
                }
                Ok(Row { line, record })
            })
            .collect()
    }

    fn error(&self, row: &Row, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_owned(),
            line: row.line,
            message: message.into(),
        }
    }

    fn id(&self, row: &Row, i: usize) -> Result<String> {
        let v = &row.record[i];
        if v.is_empty() {
            return Err(self.error(row, format!("empty identifier in column {}", i + 1)));
        }
        Ok(v.to_owned())
    }

    fn number(&self, row: &Row, i: usize) -> Result<f64> {
        let raw = &row.record[i];
        match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(self.error(row, format!("non-finite number `{raw}`"))),
            Err(_) => Err(self.error(row, format!("invalid number `{raw}`"))),
        }
    }

    fn point(&self, row: &Row, first: usize) -> Result<Point3> {
        Ok(Point3::new(
            self.number(row, first)?,
            self.number(row, first + 1)?,
            self.number(row, first + 2)?,
        ))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_owned(),
        source: e,
    }
}

fn open(path: &Path) -> Result<Box<dyn Read + '_>> {
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read>)
        .map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
}

/// Parses an annotations table. `label` names the source in error messages.
pub fn read_annotations(reader: impl Read, label: &Path) -> Result<AnnotationStore> {
    let mut table = Table::open(label, Box::new(reader), &ANNOTATIONS_HEADER)?;
    let mut store = AnnotationStore::new();
    let rows: Vec<Row> = table.rows(6)?;
    for row in &rows {
        let key = LandmarkKey::new(table.id(row, 0)?, table.id(row, 1)?);
        let annotator = table.id(row, 2)?;
        let point = table.point(row, 3)?;
        store
            .insert(key, annotator, point)
            .map_err(|e| table.error(row, e.to_string()))?;
    }
    Ok(store)
}

pub fn parse_annotations(path: impl AsRef<Path>) -> Result<AnnotationStore> {
    let path = path.as_ref();
    read_annotations(open(path)?, path)
}

pub fn annotations_csv(store: &AnnotationStore) -> String {
    let mut out = ANNOTATIONS_HEADER.join(",");
    out.push('\n');
    for (key, list) in store.iter() {
        for a in list {
            push_row(
                &mut out,
                &[&key.image_id, &key.landmark_id, &a.annotator_id],
                a.point,
            );
        }
    }
    out
}

pub fn write_annotations(store: &AnnotationStore, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), annotations_csv(store).as_bytes())
}

pub fn read_predictions(reader: impl Read, label: &Path) -> Result<PredictionStore> {
    let mut table = Table::open(label, Box::new(reader), &PREDICTIONS_HEADER)?;
    let mut store = PredictionStore::new();
    let rows: Vec<Row> = table.rows(6)?;
    for row in &rows {
        let algorithm = table.id(row, 0)?;
        let key = LandmarkKey::new(table.id(row, 1)?, table.id(row, 2)?);
        let point = table.point(row, 3)?;
        store
            .insert(algorithm, key, point)
            .map_err(|e| table.error(row, e.to_string()))?;
    }
    Ok(store)
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_file_name(RUNTIMES_SIDECAR)
}

/// Parses a predictions table, attaching runtimes from a `runtimes.csv`
/// sidecar in the same directory when one exists.
pub fn parse_predictions(path: impl AsRef<Path>) -> Result<PredictionStore> {
    let path = path.as_ref();
    let mut store = read_predictions(open(path)?, path)?;
    let runtimes = sidecar(path);
    if runtimes.is_file() {
        store.set_runtimes(Some(parse_runtimes(&runtimes)?));
    }
    Ok(store)
}

pub fn predictions_csv(store: &PredictionStore) -> String {
    let mut out = PREDICTIONS_HEADER.join(",");
    out.push('\n');
    for (alg, key, p) in store.iter() {
        push_row(&mut out, &[alg, &key.image_id, &key.landmark_id], p);
    }
    out
}

/// Writes the predictions table, and the runtimes sidecar when the store has runtimes.
pub fn write_predictions(store: &PredictionStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_file(path, predictions_csv(store).as_bytes())?;
    if let Some(runtimes) = store.runtimes() {
        write_runtimes(runtimes, sidecar(path))?;
    }
    Ok(())
}

fn read_pairs(reader: impl Read, label: &Path, header: &[&str]) -> Result<Vec<(String, f64, u64)>> {
    let mut table = Table::open(label, Box::new(reader), header)?;
    let rows: Vec<Row> = table.rows(2)?;
    let mut seen = BTreeMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let id = table.id(row, 0)?;
        let value = table.number(row, 1)?;
        if value < 0.0 {
            return Err(table.error(row, format!("negative value {value} for `{id}`")));
        }
        if seen.insert(id.clone(), ()).is_some() {
            return Err(table.error(row, format!("duplicate entry for `{id}`")));
        }
        out.push((id, value, row.line));
    }
    Ok(out)
}

pub fn read_runtimes(reader: impl Read, label: &Path) -> Result<BTreeMap<String, f64>> {
    Ok(read_pairs(reader, label, &RUNTIMES_HEADER)?
        .into_iter()
        .map(|(id, v, _)| (id, v))
        .collect())
}

pub fn parse_runtimes(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    read_runtimes(open(path)?, path)
}

pub fn write_runtimes(runtimes: &BTreeMap<String, f64>, path: impl AsRef<Path>) -> Result<()> {
    write_file(
        path.as_ref(),
        pairs_csv(&RUNTIMES_HEADER, runtimes).as_bytes(),
    )
}

/// Parses reliability weights. Sums are checked later, per landmark.
pub fn read_weights(reader: impl Read, label: &Path) -> Result<Weights> {
    Ok(read_pairs(reader, label, &WEIGHTS_HEADER)?
        .into_iter()
        .map(|(id, v, _)| (id, v))
        .collect())
}

pub fn parse_weights(path: impl AsRef<Path>) -> Result<Weights> {
    let path = path.as_ref();
    read_weights(open(path)?, path)
}

pub fn write_weights(weights: &Weights, path: impl AsRef<Path>) -> Result<()> {
    write_file(
        path.as_ref(),
        pairs_csv(&WEIGHTS_HEADER, weights).as_bytes(),
    )
}

fn pairs_csv(header: &[&str], map: &BTreeMap<String, f64>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (id, v) in map {
        out.push_str(&escape(id));
        out.push(',');
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn curves_csv(curves: &[HitRateCurve]) -> String {
    let mut out = CURVES_HEADER.join(",");
    out.push('\n');
    for c in curves {
        for s in c.samples() {
            let mu = s.mu.map(format_sig6).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                escape(&c.algorithm_id),
                mu,
                format_sig6(s.radius),
                format_sig6(s.hit_rate)
            ));
        }
    }
    out
}

pub fn write_curves_csv(curves: &[HitRateCurve], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), curves_csv(curves).as_bytes())
}

/// Parses a curves table into one curve per algorithm, in algorithm order,
/// with samples sorted by radius.
pub fn read_curves(reader: impl Read, label: &Path) -> Result<Vec<HitRateCurve>> {
    let mut table = Table::open(label, Box::new(reader), &CURVES_HEADER)?;
    let rows: Vec<Row> = table.rows(4)?;
    let mut grouped: BTreeMap<String, Vec<CurveSample>> = BTreeMap::new();
    for row in &rows {
        let alg = table.id(row, 0)?;
        let mu = if row.record[1].trim().is_empty() {
            None
        } else {
            Some(table.number(row, 1)?)
        };
        let radius = table.number(row, 2)?;
        let hit_rate = table.number(row, 3)?;
        grouped.entry(alg).or_default().push(CurveSample {
            mu,
            radius,
            hit_rate,
        });
    }
    grouped
        .into_iter()
        .map(|(alg, mut samples)| {
            samples.sort_by(|a, b| a.radius.total_cmp(&b.radius));
            HitRateCurve::from_samples(alg, samples).map_err(|e| Error::Parse {
                path: label.to_owned(),
                line: 0,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn parse_curves(path: impl AsRef<Path>) -> Result<Vec<HitRateCurve>> {
    let path = path.as_ref();
    read_curves(open(path)?, path)
}

fn push_row(out: &mut String, ids: &[&str], p: Point3) {
    for id in ids {
        out.push_str(&escape(id));
        out.push(',');
    }
    out.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) || field.trim() != field {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn three_row_annotations() {
        let text = "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\n\
                    c1,l1,A,1,2,3\nc1,l1,B,1.5,2,3\nc1,l2,A,0,0,-1e-3\n";
        let s = read_annotations(text.as_bytes(), label()).unwrap();
        assert_eq!(s.annotation_count(), 3);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn nan_is_rejected_with_line() {
        let text =
            "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\nc1,l1,A,1,2,3\nc1,l2,A,nan,2,3\n";
        let err = read_annotations(text.as_bytes(), label()).unwrap_err();
        match err {
            Error::Parse {
                line, ref message, ..
            } => {
                assert_eq!(line, 3);
                assert!(message.contains("nan"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_rows_and_headers() {
        let missing_header = "c1,l1,A,1,2,3\n";
        assert!(matches!(
            read_annotations(missing_header.as_bytes(), label()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(read_annotations("".as_bytes(), label()).is_err());
        let short = "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\nc1,l1,A,1,2\n";
        assert!(matches!(
            read_annotations(short.as_bytes(), label()),
            Err(Error::Parse { line: 2, .. })
        ));
        let word = "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\nc1,l1,A,1,two,3\n";
        assert!(read_annotations(word.as_bytes(), label()).is_err());
        let empty_id = "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\nc1,,A,1,2,3\n";
        assert!(read_annotations(empty_id.as_bytes(), label()).is_err());
    }

    #[test]
    fn duplicate_triple_is_rejected() {
        let text =
            "image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm\nc1,l1,A,1,2,3\nc1,l1,A,1,2,4\n";
        let err = read_annotations(text.as_bytes(), label()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn predictions_parse_and_reject_duplicates() {
        let mut text = PREDICTIONS_HEADER.join(",") + "\n";
        for alg in ["a", "b"] {
            for l in 0..5 {
                text.push_str(&format!("{alg},img,l{l},{l},0,0\n"));
            }
        }
        let p = read_predictions(text.as_bytes(), label()).unwrap();
        assert_eq!(p.len(), 10);
        text.push_str("a,img,l0,9,9,9\n");
        assert!(read_predictions(text.as_bytes(), label()).is_err());
    }

    #[test]
    fn weights_and_runtimes() {
        let w = read_weights("annotator_id,lambda\nA,0.5\nB,0.5\n".as_bytes(), label()).unwrap();
        assert_eq!(w["A"], 0.5);
        assert!(read_weights("annotator_id,lambda\nA,-0.1\n".as_bytes(), label()).is_err());
        assert!(read_runtimes("algorithm_id,seconds\nx,-1\n".as_bytes(), label()).is_err());
        assert!(read_runtimes("algorithm_id,seconds\nx,1\nx,2\n".as_bytes(), label()).is_err());
    }

    #[test]
    fn curves_round_trip_to_printed_precision() {
        let c = HitRateCurve::from_samples(
            "alg,1",
            vec![
                CurveSample {
                    mu: Some(-2.0),
                    radius: 0.123456789,
                    hit_rate: 1.0 / 3.0,
                },
                CurveSample {
                    mu: None,
                    radius: 7.5,
                    hit_rate: 1.0,
                },
            ],
        )
        .unwrap();
        let text = curves_csv(std::slice::from_ref(&c));
        let back = read_curves(text.as_bytes(), label()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].algorithm_id, "alg,1");
        assert_eq!(back[0].samples()[0].radius, 0.123457);
        assert_eq!(back[0].samples()[0].hit_rate, 0.333333);
        assert_eq!(back[0].samples()[1].mu, None);
    }

    #[test]
    fn file_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = PredictionStore::new();
        p.insert(
            "a",
            LandmarkKey::new("i", "l"),
            Point3::new(0.1, -0.2, 1e-17),
        )
        .unwrap();
        p.set_runtimes(Some(BTreeMap::from([("a".to_owned(), 12.5)])));
        let path = dir.path().join("predictions.csv");
        write_predictions(&p, &path).unwrap();
        assert_eq!(parse_predictions(&path).unwrap(), p);
    }
}
