//! CSV schemas. Every file has a fixed header row; floats are printed with
//! 9 significant digits, empty cells mean "not applicable", and `inf` marks
//! a saturated search.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ccs_core::bounds::ebno_key;
use ccs_core::phy::{RocMeta, RocPoint, RocTable};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("line {line}, column {column}: {message}")]
    Field { line: u64, column: String, message: String },
    #[error("{0}")]
    Roc(#[from] ccs_core::Error),
}

/// `%.9g`-style formatting.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// A row type with a fixed column layout.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn parse(row: &Row<'_>) -> Result<Self, FormatError>;
}

/// Field access for one CSV record with line-aware errors.
pub struct Row<'a> {
    record: &'a csv::StringRecord,
    header: &'static [&'static str],
    line: u64,
}

impl Row<'_> {
    fn raw(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn err(&self, i: usize, message: impl Into<String>) -> FormatError {
        FormatError::Field { line: self.line, column: self.header[i].into(), message: message.into() }
    }

    pub fn get<T: std::str::FromStr>(&self, i: usize) -> Result<T, FormatError> {
        let s = self.raw(i);
        s.parse().map_err(|_| self.err(i, format!("cannot parse {s:?}")))
    }

    pub fn get_opt<T: std::str::FromStr>(&self, i: usize) -> Result<Option<T>, FormatError> {
        if self.raw(i).is_empty() {
            Ok(None)
        } else {
            self.get(i).map(Some)
        }
    }

    pub fn text(&self, i: usize) -> String {
        self.raw(i).to_string()
    }
}

pub fn to_bytes<T: CsvRecord>(rows: &[T]) -> Result<Vec<u8>, FormatError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.into_inner().map_err(|e| FormatError::Io(e.into_error()))
}

pub fn from_reader<T: CsvRecord, R: std::io::Read>(reader: R) -> Result<Vec<T>, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let found: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if found != T::HEADER {
        return Err(FormatError::Header { expected: T::HEADER.iter().map(|s| s.to_string()).collect(), found });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(T::parse(&Row { record: &rec, header: T::HEADER, line })?);
    }
    Ok(out)
}

pub fn read<T: CsvRecord>(path: &Path) -> Result<Vec<T>, FormatError> {
    from_reader(std::fs::File::open(path)?)
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FormatError::Io(e.error))?;
    Ok(())
}

pub fn write<T: CsvRecord>(path: &Path, rows: &[T]) -> Result<(), FormatError> {
    write_atomic(path, &to_bytes(rows)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub q: u64,
    pub ka: u32,
    pub n1: usize,
    pub p_m: f64,
    pub p_f: f64,
    /// Bits per outer symbol.
    pub capacity: f64,
    /// Bits per channel use, `C / (K_a n1)`.
    pub rate: f64,
}

impl CsvRecord for CapacityRow {
    const HEADER: &'static [&'static str] = &["Q", "Ka", "n1", "p_m", "p_f", "C_u", "rate"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.ka.to_string(),
            self.n1.to_string(),
            fmt_float(self.p_m),
            fmt_float(self.p_f),
            fmt_float(self.capacity),
            fmt_float(self.rate),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        Ok(CapacityRow {
            q: r.get(0)?,
            ka: r.get(1)?,
            n1: r.get(2)?,
            p_m: r.get(3)?,
            p_f: r.get(4)?,
            capacity: r.get(5)?,
            rate: r.get(6)?,
        })
    }
}

/// Required-energy curve point. A saturated search has `ebno_db = inf` and
/// the remaining cells empty; bound evaluations leave `ebno_db` and `K0` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub ka: u32,
    pub t: u32,
    pub ebno_db: Option<f64>,
    pub l: Option<u32>,
    pub k0: Option<u32>,
    pub pe: Option<f64>,
    pub pf: Option<f64>,
}

impl CurveRow {
    pub fn is_saturated(&self) -> bool {
        self.ebno_db == Some(f64::INFINITY)
    }
}

impl CsvRecord for CurveRow {
    const HEADER: &'static [&'static str] = &["Ka", "t", "ebno_db", "L", "K0", "Pe", "Pf"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.ka.to_string(),
            self.t.to_string(),
            opt_float(self.ebno_db),
            opt(self.l),
            opt(self.k0),
            opt_float(self.pe),
            opt_float(self.pf),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        Ok(CurveRow {
            ka: r.get(0)?,
            t: r.get(1)?,
            ebno_db: r.get_opt(2)?,
            l: r.get_opt(3)?,
            k0: r.get_opt(4)?,
            pe: r.get_opt(5)?,
            pf: r.get_opt(6)?,
        })
    }
}

/// Per-level t-tree path bound. `Pe` and `Pf` (the bound on `v_L`) repeat on
/// every row.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeBoundRow {
    pub level: u32,
    pub bits: u32,
    pub v_bar: f64,
    pub v_bar_false: f64,
    pub pe: f64,
    pub pf: f64,
}

impl CsvRecord for TreeBoundRow {
    const HEADER: &'static [&'static str] = &["level", "b", "v_bar", "v_bar_false", "Pe", "Pf"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.level.to_string(),
            self.bits.to_string(),
            fmt_float(self.v_bar),
            fmt_float(self.v_bar_false),
            fmt_float(self.pe),
            fmt_float(self.pf),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        Ok(TreeBoundRow {
            level: r.get(0)?,
            bits: r.get(1)?,
            v_bar: r.get(2)?,
            v_bar_false: r.get(3)?,
            pe: r.get(4)?,
            pf: r.get(5)?,
        })
    }
}

/// Greedy allocation result; an infeasible budget leaves `L`, `allocation`
/// and `max_paths` empty. The allocation is space-separated.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocRow {
    pub ka: u32,
    pub t: u32,
    pub v_star: f64,
    pub l: Option<u32>,
    pub allocation: Option<Vec<u32>>,
    pub max_paths: Option<f64>,
}

impl CsvRecord for AllocRow {
    const HEADER: &'static [&'static str] = &["Ka", "t", "v_star", "L", "allocation", "max_paths"];

    fn fields(&self) -> Vec<String> {
        let alloc = self
            .allocation
            .as_ref()
            .map(|a| a.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        vec![
            self.ka.to_string(),
            self.t.to_string(),
            fmt_float(self.v_star),
            opt(self.l),
            alloc,
            opt_float(self.max_paths),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        let text = r.text(4);
        let allocation = if text.is_empty() {
            None
        } else {
            let parsed: Result<Vec<u32>, _> = text.split(' ').map(str::parse).collect();
            Some(parsed.map_err(|_| r.err(4, format!("cannot parse {text:?}")))?)
        };
        Ok(AllocRow {
            ka: r.get(0)?,
            t: r.get(1)?,
            v_star: r.get(2)?,
            l: r.get_opt(3)?,
            allocation,
            max_paths: r.get_opt(5)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocRow {
    pub ebno_db: f64,
    pub l: u32,
    pub k0: u32,
    pub p_m: f64,
    pub p_f: f64,
}

impl CsvRecord for RocRow {
    const HEADER: &'static [&'static str] = &["ebno_db", "L", "K0", "p_m", "p_f"];

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.ebno_db),
            self.l.to_string(),
            self.k0.to_string(),
            fmt_float(self.p_m),
            fmt_float(self.p_f),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        Ok(RocRow { ebno_db: r.get(0)?, l: r.get(1)?, k0: r.get(2)?, p_m: r.get(3)?, p_f: r.get(4)? })
    }
}

pub fn roc_rows(table: &RocTable) -> Vec<RocRow> {
    let meta = table.meta();
    table
        .rows()
        .iter()
        .map(|p| RocRow { ebno_db: meta.ebno_db, l: meta.l, k0: p.k0, p_m: p.p_m, p_f: p.p_f })
        .collect()
}

/// Group ROC rows into tables keyed for [`ccs_core::bounds::RocFamily`].
/// The CSV carries only `(ebno_db, L)`; the remaining metadata comes from
/// `template`, with `n1` set to `floor(n / L)`.
pub fn roc_family(rows: &[RocRow], template: RocMeta, n: usize) -> Result<BTreeMap<(i64, u32), RocTable>, FormatError> {
    let mut groups: BTreeMap<(i64, u32), (f64, Vec<RocPoint>)> = BTreeMap::new();
    for r in rows {
        groups
            .entry((ebno_key(r.ebno_db), r.l))
            .or_insert_with(|| (r.ebno_db, Vec::new()))
            .1
            .push(RocPoint { k0: r.k0, p_m: r.p_m, p_f: r.p_f });
    }
    groups
        .into_iter()
        .map(|(key, (ebno_db, points))| {
            let meta = RocMeta { ebno_db, l: key.1, n1: n / key.1.max(1) as usize, ..template };
            Ok((key, RocTable::new(meta, points)?))
        })
        .collect()
}

/// Monte Carlo result row. `t` is empty for RS, `ebno_db` and `K0` for an
/// abstract link; `pupe_ci` is the 95% half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub scheme: String,
    pub ka: u32,
    pub t: Option<u32>,
    pub ebno_db: Option<f64>,
    pub l: u32,
    pub k0: Option<u32>,
    pub pupe: f64,
    pub pupe_ci: f64,
    pub far_frame: f64,
    pub false_mean: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CsvRecord for SimRow {
    const HEADER: &'static [&'static str] =
        &["scheme", "Ka", "t", "ebno_db", "L", "K0", "pupe", "pupe_ci", "far_frame", "false_mean", "trials", "seed"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.scheme.clone(),
            self.ka.to_string(),
            opt(self.t),
            opt_float(self.ebno_db),
            self.l.to_string(),
            opt(self.k0),
            fmt_float(self.pupe),
            fmt_float(self.pupe_ci),
            fmt_float(self.far_frame),
            fmt_float(self.false_mean),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }

    fn parse(r: &Row<'_>) -> Result<Self, FormatError> {
        Ok(SimRow {
            scheme: r.text(0),
            ka: r.get(1)?,
            t: r.get_opt(2)?,
            ebno_db: r.get_opt(3)?,
            l: r.get(4)?,
            k0: r.get_opt(5)?,
            pupe: r.get(6)?,
            pupe_ci: r.get(7)?,
            far_frame: r.get(8)?,
            false_mean: r.get(9)?,
            trials: r.get(10)?,
            seed: r.get(11)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_float(123456789.4), "123456789");
        assert_eq!(fmt_float(1234567890.0), "1.23456789e9");
        assert_eq!(fmt_float(2.5e-7), "2.5e-7");
        assert_eq!(fmt_float(0.000123), "0.000123");
        assert_eq!(fmt_float(-4.0), "-4");
        assert_eq!(fmt_float(999999999.6), "1e9");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn float_text_round_trips_to_nine_digits() {
        for &x in &[1e-300, 3.25159265358979, 6.02e23, 0.999999999, 12.5, -7.25e-9] {
            let back: f64 = fmt_float(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-9 * x.abs(), "{x} -> {}", fmt_float(x));
        }
    }

    #[test]
    fn header_mismatch_is_reported() {
        let text = "ebno_db,L,K0,p_m\n1,2,3,0.1\n";
        assert!(matches!(from_reader::<RocRow, _>(text.as_bytes()), Err(FormatError::Header { .. })));
    }

    #[test]
    fn bad_field_names_line_and_column() {
        let text = "ebno_db,L,K0,p_m,p_f\n1,2,3,0.1,0.2\n1,x,3,0.1,0.2\n";
        match from_reader::<RocRow, _>(text.as_bytes()) {
            Err(FormatError::Field { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "L");
            }
            other => panic!("{other:?}"),
        }
    }
}
