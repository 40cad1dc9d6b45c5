//! Serialization of report files: JSON and CSV with every float at 17
//! significant digits, plus the schema check run on each file before it is written.

use std::io;
use std::path::{Path, PathBuf};

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::CliError;

/// `{:.16e}`: 17 significant digits, exact round trip through parsing.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose floats go through [`fmt_f64`].
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::with_indent(b"  ")));
    serde::Serialize::serialize(value, &mut ser).expect("serializing a Value into memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// CSV text from a header and rows of floats.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of ASCII fields")
}

/// Minimal structural schema for the JSON outputs.
#[derive(Debug, Clone)]
pub enum Schema {
    Number,
    Integer,
    Bool,
    Str,
    /// Number or null (non-finite floats serialize as null).
    MaybeNumber,
    Array(Box<Schema>),
    /// Required keys; extra keys are allowed.
    Object(Vec<(&'static str, Schema)>),
    Any,
}

impl Schema {
    pub fn obj(fields: Vec<(&'static str, Schema)>) -> Self {
        Schema::Object(fields)
    }

    pub fn array(item: Schema) -> Self {
        Schema::Array(Box::new(item))
    }

    pub fn check(&self, value: &Value, at: &str) -> Result<(), String> {
        let fail = |what: &str| Err(format!("{at}: expected {what}"));
        match self {
            Schema::Number => if value.is_number() { Ok(()) } else { fail("number") },
            Schema::Integer => if value.is_u64() || value.is_i64() { Ok(()) } else { fail("integer") },
            Schema::Bool => if value.is_boolean() { Ok(()) } else { fail("boolean") },
            Schema::Str => if value.is_string() { Ok(()) } else { fail("string") },
            Schema::MaybeNumber => if value.is_number() || value.is_null() { Ok(()) } else { fail("number or null") },
            Schema::Any => Ok(()),
            Schema::Array(item) => {
                let Some(items) = value.as_array() else { return fail("array") };
                items.iter().enumerate().try_for_each(|(k, v)| item.check(v, &format!("{at}[{k}]")))
            }
            Schema::Object(fields) => {
                let Some(map) = value.as_object() else { return fail("object") };
                for (key, schema) in fields {
                    match map.get(*key) {
                        Some(v) => schema.check(v, &format!("{at}.{key}"))?,
                        None => return Err(format!("{at}: missing key {key}")),
                    }
                }
                Ok(())
            }
        }
    }
}

/// CSV shape check: the expected header and rows of parseable floats of the same width.
pub fn check_csv(text: &str, header: &[&str]) -> Result<usize, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let got: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if got != header {
        return Err(format!("CSV header {got:?}, expected {header:?}"));
    }
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        for field in rec.iter() {
            if !matches!(field, "NaN" | "inf" | "-inf") && field.parse::<f64>().is_err() {
                return Err(format!("CSV row {rows}: {field:?} is not a number"));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

/// Output files are collected, validated, and only then written.
#[derive(Debug, Default)]
pub struct Outputs {
    pub dir: PathBuf,
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Outputs { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn json(&mut self, name: &str, value: &Value, schema: &Schema) -> Result<(), CliError> {
        schema.check(value, name).map_err(|e| CliError::Internal(format!("schema violation in {e}")))?;
        self.files.push((self.dir.join(name), json_string(value)));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let text = csv_string(header, rows);
        check_csv(&text, header).map_err(|e| CliError::Internal(format!("schema violation in {name}: {e}")))?;
        self.files.push((self.dir.join(name), text));
        Ok(())
    }

    pub fn svg(&mut self, name: &str, text: String) -> Result<(), CliError> {
        if !(text.starts_with("<svg") && text.trim_end().ends_with("</svg>")) {
            return Err(CliError::Internal(format!("schema violation in {name}: not an svg document")));
        }
        self.files.push((self.dir.join(name), text));
        Ok(())
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        self.files.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn write(self) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        let mut written = Vec::new();
        for (path, text) in self.files {
            std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}
