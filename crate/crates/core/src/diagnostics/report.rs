//! `certificate.json`, `series.csv` and `fields_XXXX.csv`.
//!
//! Floats are written with 17 significant digits in every file.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::solver::RunResult;

use super::Analysis;

pub const SERIES_HEADER: &str = "t,min_rho,max_alpha,max_beta,max_ux,floor";
pub const FIELDS_HEADER: &str = "x,u,eta,m,rho,alpha_tilde,beta_tilde,alpha,beta";

/// 17 significant digits; non-finite values become `nan`/`inf` in CSV.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}").to_lowercase()
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let io_err = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "{header}").map_err(io_err)?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt17).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Indices of `count` snapshots spread evenly over `0..len`, ends included.
pub fn dump_indices(len: usize, count: usize) -> Vec<usize> {
    match (len, count) {
        (0, _) | (_, 0) => vec![],
        (_, 1) => vec![len - 1],
        _ if count >= len => (0..len).collect(),
        _ => {
            let mut v: Vec<usize> = (0..count)
                .map(|k| ((k * (len - 1)) as f64 / (count - 1) as f64).round() as usize)
                .collect();
            v.dedup();
            v
        }
    }
}

/// Writes the certificate, the series and `dump_fields` field snapshots.
/// Returns the paths written.
pub fn emit_report(
    analysis: &Analysis,
    run: &RunResult,
    out_dir: &Path,
    dump_fields: usize,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = vec![];

    let path = out_dir.join("certificate.json");
    write_json(&path, &analysis.certificate)?;
    written.push(path);

    let path = out_dir.join("series.csv");
    write_rows(
        &path,
        SERIES_HEADER,
        analysis
            .series
            .iter()
            .map(|r| vec![r.t, r.min_rho, r.max_alpha, r.max_beta, r.max_ux, r.floor]),
    )?;
    written.push(path);

    let gas = &run.solver.gas;
    let x = run.solver.grid.coordinates();
    for k in dump_indices(analysis.fields.len(), dump_fields) {
        let s = &run.snapshots[k];
        let f = &analysis.fields[k];
        let rho = s.rho(gas);
        let path = out_dir.join(format!("fields_{k:04}.csv"));
        write_rows(
            &path,
            FIELDS_HEADER,
            (0..s.len()).map(|i| {
                vec![
                    x[i],
                    s.u[i],
                    s.eta[i],
                    s.m[i],
                    rho[i],
                    f.alpha_tilde[i],
                    f.beta_tilde[i],
                    f.alpha[i],
                    f.beta[i],
                ]
            }),
        )?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn json_floats_and_nulls() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: f64,
            n: usize,
        }
        let s = to_json_string(&S {
            a: 0.1,
            b: f64::NAN,
            n: 3,
        });
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"b\": null"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64().unwrap(), 0.1);
        assert_eq!(v["n"].as_u64().unwrap(), 3);
    }

    #[test]
    fn dump_indices_cover_ends() {
        assert_eq!(dump_indices(11, 3), vec![0, 5, 10]);
        assert_eq!(dump_indices(3, 5), vec![0, 1, 2]);
        assert_eq!(dump_indices(7, 1), vec![6]);
        assert!(dump_indices(7, 0).is_empty());
    }
}
