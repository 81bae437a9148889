//! CSV and JSON emission with fixed 17-significant-digit numbers.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ObservationSet;

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

/// `serde_json` formatter printing floats through [`fmt_num`].
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as one line of JSON followed by a newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

/// Reads a `t,y,observed` series file.
pub fn read_series_csv(path: &Path) -> Result<ObservationSet> {
    parse_series_csv(File::open(path)?)
}

/// Parses `t,y,observed` rows: `t` runs 1..N without gaps, `observed` is 0
/// or 1, `y` is required and nonnegative on observed rows and ignored
/// otherwise.
pub fn parse_series_csv<R: Read>(reader: R) -> Result<ObservationSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "y", "observed"] {
        return Err(Error::Csv {
            row: 1,
            message: format!(
                "expected header `t,y,observed`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut mask = Vec::new();
    let mut values = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        // header is row 1
        let row = idx + 2;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let bad = |message: String| Error::Csv { row, message };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let t: usize = rec[0]
            .parse()
            .map_err(|_| bad(format!("t = `{}` is not a positive integer", &rec[0])))?;
        if t != mask.len() + 1 {
            return Err(bad(format!(
                "t = {t} breaks the contiguous sequence; expected {}",
                mask.len() + 1
            )));
        }
        let observed = match &rec[2] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("observed = `{other}` must be 0 or 1"))),
        };
        let y = if observed {
            let y: f64 = rec[1]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| bad(format!("y = `{}` is not a finite number", &rec[1])))?;
            if y < 0.0 {
                return Err(bad(format!("y = {y} is negative")));
            }
            y
        } else {
            0.0
        };
        mask.push(observed);
        values.push(y);
    }
    if mask.is_empty() {
        return Err(Error::Csv {
            row: 2,
            message: "no data rows".into(),
        });
    }
    ObservationSet::from_mask(&mask, &values)
}

/// Writes an observation set in the `t,y,observed` format.
pub fn write_series_csv(path: &Path, obs: &ObservationSet) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "y", "observed"])?;
    for (i, v) in obs.dense().into_iter().enumerate() {
        let t = (i + 1).to_string();
        match v {
            Some(y) => w.write_record([t.as_str(), &fmt_num(y), "1"])?,
            None => w.write_record([t.as_str(), "", "0"])?,
        }
    }
    w.flush()?;
    Ok(())
}
