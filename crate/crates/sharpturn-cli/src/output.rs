use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.11e}"),
            Cell::Num(x) => format!("{x}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // keep the 12 significant digits of the CSV
            Cell::Num(x) if x.is_finite() => json!(format!("{x:.11e}").parse::<f64>().unwrap()),
            Cell::Num(_) => Value::Null,
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

pub struct Table {
    /// File stem used when writing to a directory.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# {}", serde_json::to_string(cfg)?)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    fn write_json(&self, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({ "config": cfg, "columns": self.columns, "rows": rows });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }

    fn write(&self, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
        match cfg.format {
            Format::Csv => self.write_csv(cfg, out),
            Format::Json => self.write_json(cfg, out),
        }
    }
}

/// Writes the tables into the output directory, or the first one to stdout
/// when no directory is configured. Returns the paths written.
pub fn emit(cfg: &RunConfig, tables: &[Table]) -> io::Result<Vec<PathBuf>> {
    let Some(dir) = &cfg.out_dir else {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        if let Some(t) = tables.first() {
            t.write(cfg, &mut lock)?;
        }
        return Ok(Vec::new());
    };
    std::fs::create_dir_all(dir)?;
    let ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut paths = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.{ext}", t.name));
        let mut f = io::BufWriter::new(File::create(&path)?);
        t.write(cfg, &mut f)?;
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes a JSON document to the output directory or stdout.
pub fn emit_json(cfg: &RunConfig, name: &str, doc: &Value) -> io::Result<Option<PathBuf>> {
    let text = serde_json::to_string_pretty(doc)?;
    match &cfg.out_dir {
        None => {
            writeln!(io::stdout().lock(), "{text}")?;
            Ok(None)
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, text + "\n")?;
            Ok(Some(path))
        }
    }
}
