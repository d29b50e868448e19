//! Sample streams feeding the SGD runners, plus file adapters.
//!
//! Row `i` of a stream feeds iteration `i`; the runners read every row at
//! most once, which is what makes the per-datum privacy accounting valid.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A source of fixed-width sample rows.
pub trait SampleStream {
    /// Number of values per row.
    fn width(&self) -> usize;

    /// Fills `out` (of length `width`) with the next row. Returns `Ok(false)`
    /// when the stream is exhausted.
    fn next_row(&mut self, out: &mut [f64]) -> Result<bool>;
}

/// In-memory stream over row-major values; mainly for tests and replays.
#[derive(Debug, Clone)]
pub struct SliceStream {
    values: Vec<f64>,
    width: usize,
    pos: usize,
}

impl SliceStream {
    pub fn new(values: Vec<f64>, width: usize) -> Result<Self> {
        if width == 0 || !values.len().is_multiple_of(width) {
            return Err(Error::InvalidParameter(format!(
                "{} values do not tile rows of width {width}",
                values.len()
            )));
        }
        Ok(Self { values, width, pos: 0 })
    }
}

impl SampleStream for SliceStream {
    fn width(&self) -> usize {
        self.width
    }

    fn next_row(&mut self, out: &mut [f64]) -> Result<bool> {
        if self.pos + self.width > self.values.len() {
            return Ok(false);
        }
        out.copy_from_slice(&self.values[self.pos..self.pos + self.width]);
        self.pos += self.width;
        Ok(true)
    }
}

/// Headerless CSV of numeric rows.
pub struct CsvStream {
    reader: csv::Reader<BufReader<File>>,
    record: csv::StringRecord,
    width: usize,
    row: u64,
}

impl CsvStream {
    pub fn open(path: &Path, width: usize) -> Result<Self> {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(BufReader::new(File::open(path)?));
        Ok(Self { reader, record: csv::StringRecord::new(), width, row: 0 })
    }
}

impl SampleStream for CsvStream {
    fn width(&self) -> usize {
        self.width
    }

    fn next_row(&mut self, out: &mut [f64]) -> Result<bool> {
        if !self.reader.read_record(&mut self.record)? {
            return Ok(false);
        }
        self.row += 1;
        if self.record.len() != self.width {
            return Err(Error::MalformedRow {
                row: self.row,
                message: format!("expected {} fields, found {}", self.width, self.record.len()),
            });
        }
        for (slot, field) in out.iter_mut().zip(self.record.iter()) {
            *slot = field.trim().parse().map_err(|_| Error::MalformedRow {
                row: self.row,
                message: format!("cannot parse \"{field}\" as a number"),
            })?;
        }
        Ok(true)
    }
}

/// Raw little-endian f64 rows.
pub struct BinaryStream {
    reader: BufReader<File>,
    buf: Vec<u8>,
    width: usize,
    row: u64,
}

impl BinaryStream {
    pub fn open(path: &Path, width: usize) -> Result<Self> {
        Ok(Self {
            reader: BufReader::new(File::open(path)?),
            buf: vec![0u8; width * 8],
            width,
            row: 0,
        })
    }
}

impl SampleStream for BinaryStream {
    fn width(&self) -> usize {
        self.width
    }

    fn next_row(&mut self, out: &mut [f64]) -> Result<bool> {
        let mut filled = 0;
        while filled < self.buf.len() {
            let read = self.reader.read(&mut self.buf[filled..])?;
            if read == 0 {
                break;
            }
            filled += read;
        }
        if filled == 0 {
            return Ok(false);
        }
        self.row += 1;
        if filled != self.buf.len() {
            return Err(Error::MalformedRow {
                row: self.row,
                message: format!("truncated row: {filled} of {} bytes", self.buf.len()),
            });
        }
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = f64::from_le_bytes(self.buf[k * 8..k * 8 + 8].try_into().unwrap());
        }
        Ok(true)
    }
}

/// Opens `.csv` or `.bin` sample files by extension.
pub fn open_data_file(path: &Path, width: usize) -> Result<Box<dyn SampleStream>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(Box::new(CsvStream::open(path, width)?)),
        Some("bin") => Ok(Box::new(BinaryStream::open(path, width)?)),
        other => Err(Error::InvalidParameter(format!(
            "unsupported data file extension {other:?} (use .csv or .bin)"
        ))),
    }
}

/// Drains `n` rows of `stream` into a headerless CSV file. Values are
/// written in shortest round-trip decimal form, so a replay through
/// [`CsvStream`] reproduces them bit for bit.
pub fn spill_csv(stream: &mut dyn SampleStream, n: u64, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut row = vec![0.0; stream.width()];
    for i in 1..=n {
        if !stream.next_row(&mut row)? {
            return Err(Error::DataExhausted { iteration: i });
        }
        let mut line = String::new();
        for (k, value) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{value}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Binary counterpart of [`spill_csv`].
pub fn spill_binary(stream: &mut dyn SampleStream, n: u64, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut row = vec![0.0; stream.width()];
    for i in 1..=n {
        if !stream.next_row(&mut row)? {
            return Err(Error::DataExhausted { iteration: i });
        }
        for value in &row {
            out.write_all(&value.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}
