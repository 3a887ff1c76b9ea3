use std::path::Path;

use nalgebra::DMatrix;

use crate::bench::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, CMatrix, Real, C};

/// Writes `t,ch0,ch1,…` CSV, one sample per row.
pub fn write_trajectory_csv<T: Real, W: std::io::Write>(traj: &Trajectory<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((0..traj.channels()).map(|i| format!("ch{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for (j, &t) in traj.times.iter().enumerate() {
        let mut rec = vec![fmt(to_f64(t))];
        rec.extend(traj.data.column(j).iter().map(|&v| fmt(to_f64(v))));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trajectory<T: Real>(traj: &Trajectory<T>, path: &Path) -> Result<()> {
    write_trajectory_csv(traj, std::fs::File::create(path)?)
}

/// Reads a trajectory CSV; the first column must be `t`, strictly increasing
/// and uniform.
pub fn read_trajectory_csv<T: Real, R: std::io::Read>(input: R) -> Result<Trajectory<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Parse("first column must be named t".into()));
    }
    let q = header.len() - 1;
    if q == 0 {
        return Err(Error::Parse("no data channels".into()));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != q + 1 {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", i + 2, rec.len(), q + 1)));
        }
        let parse = |s: &str| -> Result<T> {
            s.parse::<f64>()
                .map(lit)
                .map_err(|e| Error::Parse(format!("row {}: {e} in {s:?}", i + 2)))
        };
        times.push(parse(&rec[0])?);
        for k in 1..=q {
            values.push(parse(&rec[k])?);
        }
    }
    let n = times.len();
    let data = DMatrix::from_fn(q, n, |c, j| values[j * q + c]);
    Trajectory::new(times, data)
}

pub fn load_trajectory<T: Real>(path: &Path) -> Result<Trajectory<T>> {
    read_trajectory_csv(std::fs::File::open(path)?)
}

/// Mode-shape CSV: `q` rows, `d` columns, entries real (`1.5`) or complex
/// (`0.3+0.2i`). No header.
pub fn read_mode_shapes<T: Real, R: std::io::Read>(input: R) -> Result<CMatrix<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<C<T>>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(rec.iter().map(parse_complex).collect::<Result<_>>()?);
    }
    let q = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    if q == 0 || d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse("mode-shape file must be a non-empty rectangular table".into()));
    }
    Ok(CMatrix::from_fn(q, d, |i, k| rows[i][k]))
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `j` for the imaginary unit).
pub fn parse_complex<T: Real>(s: &str) -> Result<C<T>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid complex number {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let num = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Ok(C::new(lit(num(&s).map_err(|_| bad())?), T::zero()));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().map_err(|_| bad())?, num(&body[i..])?),
        None => (0.0, num(body)?),
    };
    Ok(C::new(lit(re), lit(im)))
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list<T: Real>(s: &str) -> Result<Vec<C<T>>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_complex).collect()
}

/// Parses a channel expression into a `q_out × q_in` selection matrix.
///
/// Outputs are separated by `;`, each a sum of terms `[±][c*]chN`, e.g.
/// `ch1`, `ch1-ch0`, `ch2+ch3`, `0.5*ch0;ch1`.
pub fn parse_channel_expr<T: Real>(expr: &str, n_in: usize) -> Result<DMatrix<T>> {
    let outputs: Vec<&str> = expr.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    if outputs.is_empty() {
        return Err(Error::Parse("empty channel expression".into()));
    }
    let mut m = DMatrix::zeros(outputs.len(), n_in);
    for (row, out) in outputs.iter().enumerate() {
        let s: String = out.chars().filter(|c| !c.is_whitespace()).collect();
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            if i > 0 && (ch == '+' || ch == '-') && !s[..i].ends_with(['e', 'E', '*']) {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1.0, b),
                None => (1.0, term.strip_prefix('+').unwrap_or(term)),
            };
            let (coef, chan) = match body.split_once('*') {
                Some((c, ch)) => (
                    c.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad coefficient in {term:?}")))?,
                    ch,
                ),
                None => (1.0, body),
            };
            let idx: usize = chan
                .strip_prefix("ch")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad channel reference {term:?}")))?;
            if idx >= n_in {
                return Err(Error::Parse(format!("channel ch{idx} not present ({n_in} channels)")));
            }
            m[(row, idx)] += lit::<T>(sign * coef);
        }
    }
    Ok(m)
}

fn fmt(x: f64) -> String {
    // Shortest representation that parses back to the same value.
    format!("{x:?}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.1).collect();
        let data = DMatrix::from_fn(2, 5, |i, j| (i as f64 + 1.0) / 3.0 * (j as f64).sin());
        let t = Trajectory::new(times, data).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,ch0,ch1\n"));
        let back: Trajectory<f64> = read_trajectory_csv(&buf[..]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn complex_parsing() {
        let z: C<f64> = parse_complex("-0.05+7.80i").unwrap();
        assert_eq!((z.re, z.im), (-0.05, 7.8));
        let z: C<f64> = parse_complex("-0.05-7.8i").unwrap();
        assert_eq!((z.re, z.im), (-0.05, -7.8));
        let z: C<f64> = parse_complex("2i").unwrap();
        assert_eq!((z.re, z.im), (0.0, 2.0));
        let z: C<f64> = parse_complex("-i").unwrap();
        assert_eq!((z.re, z.im), (0.0, -1.0));
        let z: C<f64> = parse_complex("1e-3-2e-2i").unwrap();
        assert_eq!((z.re, z.im), (1e-3, -2e-2));
        assert!(parse_complex::<f64>("abc").is_err());
        assert_eq!(parse_complex_list::<f64>("1+i, 1-i").unwrap().len(), 2);
    }

    #[test]
    fn channel_expressions() {
        let m: DMatrix<f64> = parse_channel_expr("ch1-ch0; 0.5*ch2+ch3", 4).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 4, &[-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0]));
        assert!(parse_channel_expr::<f64>("ch9", 2).is_err());
        assert!(parse_channel_expr::<f64>("x1", 2).is_err());
    }
}
