use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

/// One line of the tabular view.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub target: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn value(name: impl Into<String>, value: f64) -> Self {
        Row {
            name: name.into(),
            value,
            std_error: None,
            target: None,
            pass: None,
        }
    }

    pub fn err(mut self, std_error: f64) -> Self {
        self.std_error = Some(std_error);
        self
    }

    pub fn target(mut self, target: f64, pass: bool) -> Self {
        self.target = Some(target);
        self.pass = Some(pass);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: RunConfig,
    /// Origin of every constant table used.
    pub provenance: Vec<Value>,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
    pub details: Value,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
            provenance: Vec::new(),
            rows: Vec::new(),
            notes: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_vec_pretty(self)?;
                s.push(b'\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in &self.rows {
                    w.serialize(r)?;
                }
                w.into_inner().map_err(|e| e.into_error())
            }
            Format::Text => Ok(self.text().into_bytes()),
        }
    }

    fn text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut s = format!("{:<width$}  {:>14}  {:>11}  {:>14}  status\n", "name", "value", "std_error", "target");
        for r in &self.rows {
            let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$e}"));
            let status = match r.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "",
            };
            s += &format!(
                "{:<width$}  {:>14.8}  {:>11}  {:>14}  {status}\n",
                r.name,
                r.value,
                opt(r.std_error, 2),
                r.target.map_or("-".to_string(), |v| format!("{v:.8}")),
            );
        }
        for n in &self.notes {
            s += &format!("# {n}\n");
        }
        s
    }

    pub fn emit(&self) -> std::io::Result<()> {
        let bytes = self.render(self.config.format)?;
        match &self.config.output {
            Some(path) => std::fs::write(path, bytes),
            None => std::io::stdout().write_all(&bytes),
        }
    }
}
