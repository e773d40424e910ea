//! Timed quantitative words: sampled logs of full valuations.

mod generate;

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::VarSpace;
use crate::numeric::{rational_from_decimal_string, Rational};

pub use generate::{generate_log, GenerateConfig, GenerateError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("log header must be `time,{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: timestamp {next} precedes {prev}")]
    Decreasing { line: u64, prev: Rational, next: Rational },
    #[error("sample has {found} values, space has {expected}")]
    Width { expected: usize, found: usize },
    #[error("negative timestamp {0}")]
    NegativeTime(Rational),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// One observation: a timestamp and a value for every variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sample {
    pub timestamp: Rational,
    pub values: Vec<Rational>,
}

impl Sample {
    pub fn new(timestamp: Rational, values: Vec<Rational>) -> Sample {
        Sample { timestamp, values }
    }
}

/// Samples with nondecreasing timestamps over a fixed variable space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedWord {
    space: VarSpace,
    samples: Vec<Sample>,
}

impl TimedWord {
    pub fn empty(space: VarSpace) -> TimedWord {
        TimedWord { space, samples: Vec::new() }
    }

    pub fn new(space: VarSpace, samples: Vec<Sample>) -> Result<TimedWord, LogError> {
        let mut w = TimedWord::empty(space);
        for s in samples {
            w.push(s)?;
        }
        Ok(w)
    }

    /// Appends a sample, checking width and monotonicity.
    pub fn push(&mut self, sample: Sample) -> Result<(), LogError> {
        check_next(&self.space, self.samples.last(), &sample, self.samples.len() as u64 + 1)?;
        self.samples.push(sample);
        Ok(())
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `i` samples.
    pub fn prefix(&self, i: usize) -> TimedWord {
        TimedWord { space: self.space.clone(), samples: self.samples[..i.min(self.len())].to_vec() }
    }
}

pub(crate) fn check_next(space: &VarSpace, prev: Option<&Sample>, s: &Sample, line: u64) -> Result<(), LogError> {
    if s.values.len() != space.dim() {
        return Err(LogError::Width { expected: space.dim(), found: s.values.len() });
    }
    if s.timestamp.is_negative() {
        return Err(LogError::NegativeTime(s.timestamp.clone()));
    }
    if let Some(p) = prev {
        if s.timestamp < p.timestamp {
            return Err(LogError::Decreasing { line, prev: p.timestamp.clone(), next: s.timestamp.clone() });
        }
    }
    Ok(())
}

/// Incremental CSV reader, usable on a stream one line at a time.
#[derive(Debug)]
pub struct LogReader {
    space: VarSpace,
    columns: Option<Vec<usize>>,
    last: Option<Sample>,
    line: u64,
}

impl LogReader {
    pub fn new(space: VarSpace) -> LogReader {
        LogReader { space, columns: None, last: None, line: 0 }
    }

    /// Feeds one line; returns a sample for data rows, `None` for header, blanks and comments.
    pub fn feed_line(&mut self, raw: &str) -> Result<Option<Sample>, LogError> {
        self.line += 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            return Ok(None);
        }
        let fields = split_fields(text)?;
        let Some(columns) = &self.columns else {
            self.columns = Some(self.header(&fields, text)?);
            return Ok(None);
        };
        if fields.len() != self.space.dim() + 1 {
            return Err(LogError::Row {
                line: self.line,
                message: format!("expected {} fields, found {}", self.space.dim() + 1, fields.len()),
            });
        }
        let parse = |f: &str| {
            rational_from_decimal_string(f).map_err(|e| LogError::Row { line: self.line, message: e.to_string() })
        };
        let timestamp = parse(&fields[0])?;
        let mut values = vec![Rational::zero(); self.space.dim()];
        for (k, f) in fields[1..].iter().enumerate() {
            values[columns[k]] = parse(f)?;
        }
        let sample = Sample { timestamp, values };
        check_next(&self.space, self.last.as_ref(), &sample, self.line)?;
        self.last = Some(sample.clone());
        Ok(Some(sample))
    }

    fn header(&self, fields: &[String], text: &str) -> Result<Vec<usize>, LogError> {
        let bad = || LogError::Header { expected: self.space.names().join(","), found: text.to_string() };
        if fields.first().map(String::as_str) != Some("time") || fields.len() != self.space.dim() + 1 {
            return Err(bad());
        }
        let mut columns = Vec::with_capacity(self.space.dim());
        for name in &fields[1..] {
            let i = self.space.index_of(name).ok_or_else(bad)?;
            if columns.contains(&i) {
                return Err(bad());
            }
            columns.push(i);
        }
        Ok(columns)
    }

    pub fn saw_header(&self) -> bool {
        self.columns.is_some()
    }
}

fn split_fields(line: &str) -> Result<Vec<String>, LogError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(line.as_bytes());
    match reader.records().next() {
        Some(Ok(record)) => Ok(record.iter().map(str::to_string).collect()),
        Some(Err(e)) => Err(LogError::Csv(e.to_string())),
        None => Ok(Vec::new()),
    }
}

/// Parses a CSV log whose header is `time` followed by the variables of `space` in any order.
/// A text without any header line is the empty word.
pub fn parse_log(text: &str, space: &VarSpace) -> Result<TimedWord, LogError> {
    let mut reader = LogReader::new(space.clone());
    let mut samples = Vec::new();
    for line in text.lines() {
        if let Some(s) = reader.feed_line(line)? {
            samples.push(s);
        }
    }
    Ok(TimedWord { space: space.clone(), samples })
}

pub fn format_header(space: &VarSpace) -> String {
    format!("time,{}", space.names().join(","))
}

pub fn format_sample(s: &Sample) -> String {
    let mut out = s.timestamp.to_string();
    for v in &s.values {
        let _ = write!(out, ",{v}");
    }
    out
}

/// CSV text that [`parse_log`] reads back to an equal word.
pub fn format_log(w: &TimedWord) -> String {
    let mut out = format_header(&w.space);
    out.push('\n');
    for s in &w.samples {
        out.push_str(&format_sample(s));
        out.push('\n');
    }
    out
}
