//! Byte-stable CSV and JSON writers. Every float is written with 17
//! significant digits in scientific notation.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".into()
    }
}

/// Pretty JSON whose floats use [`fmt_f64`].
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
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

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

/// A CSV table built in memory and written in one go.
pub struct Csv {
    buf: String,
}

pub enum Cell<'a> {
    F(f64),
    U(usize),
    S(&'a str),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { buf: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            match c {
                Cell::F(v) => self.buf.push_str(&fmt_f64(*v)),
                Cell::U(v) => write!(self.buf, "{v}").unwrap(),
                Cell::S(s) => self.buf.push_str(s),
            }
        }
        self.buf.push('\n');
    }

    pub fn floats(&mut self, values: &[f64]) {
        let cells: Vec<Cell<'_>> = values.iter().map(|&v| Cell::F(v)).collect();
        self.row(&cells);
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }
}
