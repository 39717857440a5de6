//! CSV and JSON emission. Every float carries 17 significant digits, so a
//! file round-trips exactly and repeated runs are byte-identical.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Floats as `{:.16e}`; everything else as the wrapped formatter does it.
struct Sig17<F>(F);

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // serde_json writes non-finite values as null before reaching here.
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_json<T: Serialize, F: Formatter>(value: &T, f: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(f));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn compact_json<T: Serialize>(value: &T) -> String {
    to_json(value, CompactFormatter)
}

pub fn pretty_json<T: Serialize>(value: &T) -> String {
    to_json(value, PrettyFormatter::with_indent(b"  "))
}

/// Provenance echoed at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new<C: Serialize>(command: &'static str, config: &C) -> Self {
        Self {
            tool: "kappa",
            version: VERSION,
            command,
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    fn comment_lines(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# config: {}\n",
            self.tool,
            self.version,
            self.command,
            compact_json(&self.config)
        )
    }
}

/// Where a command writes; remembers what it wrote.
pub struct Sink {
    dir: PathBuf,
    meta: Meta,
    pub written: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

impl Sink {
    /// Creates `dir` if needed; an unusable directory is a configuration
    /// error.
    pub fn new(dir: PathBuf, meta: Meta) -> CliResult<Self> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Validation(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self { dir, meta, written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, notes: &[String], columns: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut out = BufWriter::new(file);
        let mut head = self.meta.comment_lines();
        for n in notes {
            head.push_str(&format!("# {n}\n"));
        }
        out.write_all(head.as_bytes()).map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(out);
        let failed = |e: csv::Error| CliError::Io { path: path.clone(), source: io::Error::other(e) };
        w.write_record(columns).map_err(failed)?;
        for r in rows {
            w.write_record(r).map_err(failed)?;
        }
        w.flush().map_err(io_err(&path))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `{"meta": ..., <body fields>}`; JSON has no comments, so the
    /// header lives in the `meta` object.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> CliResult<()> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            meta: &'a Meta,
            #[serde(flatten)]
            body: &'a T,
        }
        let path = self.dir.join(name);
        let mut text = pretty_json(&Doc { meta: &self.meta, body });
        text.push('\n');
        std::fs::write(&path, text).map_err(io_err(&path))?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{s}");
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_floats_use_the_same_format() {
        let v = serde_json::json!({"a": 0.1, "b": [1.5, 2], "c": f64::NAN});
        let s = compact_json(&v);
        assert_eq!(s, r#"{"a":1.0000000000000001e-1,"b":[1.5000000000000000e0,2],"c":null}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
