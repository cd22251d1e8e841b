//! CSV emission: comma-delimited, '.' decimal separator, 17 significant
//! digits for floats (lossless f64 round-trip), '#'-prefixed comment lines
//! carrying the tool version and the fully-resolved configuration.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Default)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Standard preamble: tool version plus the resolved configuration.
    pub fn with_config_echo(mut self, echo: &str) -> Self {
        self.comments
            .push(format!("anj {}", env!("CARGO_PKG_VERSION")));
        self.comments.push(format!("config: {echo}"));
        self
    }

    pub fn comment(&mut self, text: &str) {
        self.comments.push(text.to_string());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => s.clone(),
                    Cell::Num(v) => format!("{v:.16e}"),
                    Cell::Int(v) => format!("{v}"),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Write to the given path, or stdout when the path is "-" or absent.
pub fn emit(path: Option<&std::path::Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, content),
        _ => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())
        }
    }
}
