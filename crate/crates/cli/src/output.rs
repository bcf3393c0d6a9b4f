use std::io::Write;

use clap::ValueEnum;
use twocharge::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) => v.to_string(),
            Value::Text(v) => v.clone(),
            Value::Bool(v) => v.to_string(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => (*v).into(),
            // non-finite reals have no JSON number form
            Value::Real(v) if v.is_finite() => (*v).into(),
            Value::Real(v) => v.to_string().into(),
            Value::Text(v) => v.as_str().into(),
            Value::Bool(v) => (*v).into(),
            Value::Missing => serde_json::Value::Null,
        }
    }
}

/// A table with a fixed schema name. Complex columns expand to `_re`/`_im`.
pub struct Table {
    schema: &'static str,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

pub enum Column<'a> {
    Plain(&'a str),
    Complex(&'a str),
}

pub use Column::{Complex as C, Plain as P};

impl Table {
    pub fn new(schema: &'static str, columns: &[Column]) -> Self {
        let mut names = vec!["schema".to_owned()];
        for c in columns {
            match c {
                Column::Plain(n) => names.push((*n).to_owned()),
                Column::Complex(n) => {
                    names.push(format!("{n}_re"));
                    names.push(format!("{n}_im"));
                }
            }
        }
        Self { schema, columns: names, rows: Vec::new() }
    }

    /// Appends a row; complex cells are passed through [`complex`].
    pub fn push(&mut self, cells: Vec<Value>) {
        let mut row = vec![Value::from(self.schema)];
        row.extend(cells);
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.schema);
        self.rows.push(row);
    }
}

/// The two cells of a complex column.
pub fn complex(z: Complex64) -> [Value; 2] {
    [Value::Real(z.re), Value::Real(z.im)]
}

pub struct Emitter<W: Write> {
    format: Format,
    out: W,
    tables: usize,
}

impl<W: Write> Emitter<W> {
    pub fn new(format: Format, out: W) -> Self {
        Self { format, out, tables: 0 }
    }

    /// Writes a table. In CSV mode consecutive tables are separated by a
    /// blank line and each carries its own header.
    pub fn emit(&mut self, table: &Table) -> std::io::Result<()> {
        match self.format {
            Format::Csv => {
                if self.tables > 0 {
                    writeln!(self.out)?;
                }
                let mut w = csv::WriterBuilder::new().from_writer(&mut self.out);
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Value::csv_field))?;
                }
                w.flush()?;
            }
            Format::Json => {
                for row in &table.rows {
                    let obj: serde_json::Map<String, serde_json::Value> =
                        table.columns.iter().cloned().zip(row.iter().map(Value::json)).collect();
                    serde_json::to_writer(&mut self.out, &obj)?;
                    writeln!(self.out)?;
                }
            }
        }
        self.tables += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format, tables: &[Table]) -> String {
        let mut buf = Vec::new();
        let mut e = Emitter::new(format, &mut buf);
        for t in tables {
            e.emit(t).unwrap();
        }
        String::from_utf8(buf).unwrap()
    }

    fn sample() -> Table {
        let mut t = Table::new("demo", &[P("k"), C("z"), P("note")]);
        let [re, im] = complex(Complex64::new(1.5, -2.0));
        t.push(vec![3usize.into(), re, im, Value::Missing]);
        t
    }

    #[test]
    fn csv_has_header_and_split_complex() {
        let s = render(Format::Csv, &[sample(), sample()]);
        assert_eq!(s, "schema,k,z_re,z_im,note\ndemo,3,1.5,-2,\n\nschema,k,z_re,z_im,note\ndemo,3,1.5,-2,\n");
    }

    #[test]
    fn json_lines_carry_field_names() {
        let s = render(Format::Json, &[sample()]);
        let v: serde_json::Value = serde_json::from_str(s.trim()).unwrap();
        assert_eq!(v["schema"], "demo");
        assert_eq!(v["z_im"], -2.0);
        assert!(v["note"].is_null());
    }

    #[test]
    fn non_finite_reals_survive_json() {
        let mut t = Table::new("demo", &[P("x")]);
        t.push(vec![f64::NEG_INFINITY.into()]);
        assert!(render(Format::Json, &[t]).contains("\"-inf\""));
    }
}
