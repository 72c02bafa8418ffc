use std::io::{self, BufRead, Write};

use crate::{Error, Result};

/// Equally spaced sample `X_{t_0}, …, X_{t_n}` with `t_i = iΔ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    delta: f64,
    values: Vec<f64>,
}

impl Path {
    pub fn new(delta: f64, values: Vec<f64>) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        if values.is_empty() {
            return Err(Error::invalid("a path needs at least one value"));
        }
        Ok(Self { delta, values })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn x0(&self) -> f64 {
        self.values[0]
    }

    /// Number of steps `n`; the path holds `n + 1` values.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// `t_i = iΔ`, computed from the index rather than accumulated.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps())
    }

    /// Drops the first `count` observations; the remainder is re-indexed
    /// from `t = 0`.
    pub fn discard(&self, count: usize) -> Result<Self> {
        if count >= self.values.len() {
            return Err(Error::invalid(format!(
                "cannot discard {count} of {} observations",
                self.values.len()
            )));
        }
        Path::new(self.delta, self.values[count..].to_vec())
    }

    /// Writes the `t,x` CSV (LF line endings, 17 significant digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"t,x\n")?;
        for (i, x) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_full(self.time(i)), fmt_full(*x))?;
        }
        out.flush()
    }

    /// Reads a `t,x` CSV written by [`Path::write_csv`]. The step is taken
    /// from the first two time stamps.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let (t, x) = match (parts.next(), parts.next()) {
                (Some(t), Some(x)) => (t, x),
                _ => return Err(Error::Parse(format!("line {}: expected t,x", lineno + 1))),
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            times.push(parse(t)?);
            values.push(parse(x)?);
        }
        let delta = match times.as_slice() {
            [t0, t1, ..] => t1 - t0,
            _ => return Err(Error::Parse("need at least two rows".into())),
        };
        Path::new(delta, values)
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_full(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_index_based() {
        let p = Path::new(0.1, vec![0.0; 1001]).unwrap();
        assert_eq!(p.time(1000), 100.0);
        assert_eq!(p.t_end(), 1000.0 * 0.1);
        assert_eq!(p.steps(), 1000);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = Path::new(1.0 / 3.0, vec![0.1, -2.5e-300, 1.0 / 7.0, 12345.678]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x\n"));
        assert!(!text.contains('\r'));
        let q = Path::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
    }

    #[test]
    fn discard_reindexes() {
        let p = Path::new(0.5, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = p.discard(2).unwrap();
        assert_eq!(q.values(), &[3.0, 4.0]);
        assert!(p.discard(4).is_err());
    }
}
