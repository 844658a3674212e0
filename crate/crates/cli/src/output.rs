//! Tabular output as CSV or JSON.
//!
//! Floats are written with 17 significant digits so a value parses back to
//! the same `f64`; non-finite values become `inf`, `-inf` or `nan`.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(&'static str),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<oqwalk::Scalar> for Cell {
    fn from(v: oqwalk::Scalar) -> Self {
        Cell::Float(v.to_f64())
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 {
        // No negative zero in files.
        format!("{:.16e}", 0.0)
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(v),
            Cell::Text(s) => s.to_string(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(v) => Value::from(v),
            Cell::Float(v) if v.is_finite() => Value::from(v),
            Cell::Float(v) => Value::from(format_float(v)),
            Cell::Text(s) => Value::from(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Append the rows of tables with the same columns, in order.
    pub fn concat(columns: Vec<&'static str>, parts: impl IntoIterator<Item = Table>) -> Self {
        let mut out = Table::new(columns);
        for part in parts {
            debug_assert_eq!(part.columns, out.columns);
            out.rows.extend(part.rows);
        }
        out
    }

    /// Prefix every row with a constant leading column.
    pub fn with_leading(mut self, name: &'static str, value: Cell) -> Self {
        self.columns.insert(0, name);
        for row in &mut self.rows {
            row.insert(0, value);
        }
        self
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::text).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// An array of objects keyed by column name.
    pub fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert((*name).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut *w, &records)?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, format: Format, w: &mut W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(format_float(-0.0), "0.0000000000000000e0");
    }

    #[test]
    fn csv_and_json_layouts() {
        let mut t = Table::new(vec!["m", "pi"]);
        t.push(vec![Cell::from(0usize), Cell::from(0.5)]);
        t.push(vec![Cell::from(1usize), Cell::from(f64::INFINITY)]);
        let t = t.with_leading("omega", Cell::from(0.5));
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "omega,m,pi\n5.0000000000000000e-1,0,5.0000000000000000e-1\n5.0000000000000000e-1,1,inf\n"
        );
        let mut json = Vec::new();
        t.write_json(&mut json).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[1]["pi"], Value::from("inf"));
        assert_eq!(v[0]["m"], Value::from(0));
    }
}
