//! Convergence logs: in-memory records plus an append-only CSV stream.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "iter,rel_err,q_dist,tv,residual,seconds";

/// One logged iteration. Missing quantities are empty in the CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub iter: usize,
    /// `||u_k - u_ref|| / ||u_ref||`, when a reference image is known.
    pub rel_err: Option<f64>,
    /// `||q_k - q*||`, filled in after the fact.
    pub q_dist: Option<f64>,
    pub tv: f64,
    /// `||A u_k - b||`.
    pub residual: f64,
    pub seconds: f64,
}

impl LogRecord {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        format!(
            "{},{},{},{:e},{:e},{:.6}",
            self.iter,
            opt(self.rel_err),
            opt(self.q_dist),
            self.tv,
            self.residual,
            self.seconds
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Format(format!("log line has {} fields: `{line}`", parts.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number `{s}` in log")))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        Ok(Self {
            iter: parts[0]
                .parse()
                .map_err(|_| Error::Format(format!("bad iteration `{}`", parts[0])))?,
            rel_err: opt(parts[1])?,
            q_dist: opt(parts[2])?,
            tv: num(parts[3])?,
            residual: num(parts[4])?,
            seconds: num(parts[5])?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLog {
    pub records: Vec<LogRecord>,
}

impl ConvergenceLog {
    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    pub fn rel_errors(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.rel_err).collect()
    }

    /// Attaches `||q_k - q*||` values, keyed by iteration number.
    pub fn attach_q_distances(&mut self, distances: &[(usize, f64)]) {
        let mut it = distances.iter().peekable();
        for record in &mut self.records {
            while let Some(&&(k, _)) = it.peek() {
                if k < record.iter {
                    it.next();
                } else {
                    break;
                }
            }
            if let Some(&&(k, dist)) = it.peek() {
                if k == record.iter {
                    record.q_dist = Some(dist);
                }
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads a CSV log. A truncated final line (from an interrupted run) is
    /// dropped; anything malformed before it is an error.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        match lines.first() {
            Some(h) if h.trim() == CSV_HEADER => {}
            _ => return Err(Error::Format(format!("{} lacks the log header", path.display()))),
        }
        let mut log = ConvergenceLog::default();
        let body = &lines[1..];
        for (i, line) in body.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match LogRecord::from_csv(line) {
                Ok(r) => log.push(r),
                Err(_) if i + 1 == body.len() => break,
                Err(e) => return Err(e),
            }
        }
        Ok(log)
    }
}

/// Streams records to a CSV file as they are produced. Each record is
/// flushed, so an interrupted run leaves a readable prefix.
pub struct LogWriter {
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<()> {
        writeln!(self.out, "{}", record.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}
