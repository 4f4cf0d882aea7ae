//! JSON lines and CSV writers.

use std::io::{self, Write};

use serde_json::{Map, Value};

/// One output line: an object tagged with its `type`.
pub struct Record(Value);

impl Record {
    pub fn new(kind: &str, body: Value) -> Self {
        let mut obj = match body {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        obj.insert("type".into(), Value::String(kind.into()));
        Record(Value::Object(obj))
    }

    pub fn value(&self) -> &Value {
        &self.0
    }
}

/// A flat table for `--csv`.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn write_json_lines(out: &mut impl Write, records: &[Record]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r.value())?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_csv(out: &mut impl Write, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}
