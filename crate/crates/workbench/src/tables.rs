//! CSV artifacts with a `#` comment preamble for metadata and units in the
//! column names, and the plain-text wavefield dump.

use crate::error::{Result, WorkbenchError};
use num_complex::Complex64;
use superscar::pes::MassParameters;
use superscar::quantum::{GridSpec, WaveField};

pub struct Table {
    pub preamble: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { preamble: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.preamble.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(f64::to_string).collect());
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.preamble {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| WorkbenchError::Numeric(format!("csv is not utf-8: {e}")))?;
        let preamble = text.lines().take_while(|l| l.starts_with('#')).map(|l| l.trim_start_matches("# ").to_string()).collect();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
        let bad = |e: csv::Error| WorkbenchError::Numeric(format!("malformed csv: {e}"));
        let header = r.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(bad)?;
        Ok(Self { preamble, header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| WorkbenchError::Numeric(format!("csv has no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| WorkbenchError::Numeric(format!("column {name}: {e}"))))
            .collect()
    }
}

/// Header lines followed by one `re im` pair per grid node, R-major.
pub fn field_to_bytes(f: &WaveField, masses: &MassParameters) -> Vec<u8> {
    let g = f.grid;
    let mut s = String::with_capacity(48 * g.len() + 256);
    s += "# wavefield: row-major over (R, theta); columns re im\n";
    s += &format!("# n_r {} n_theta {} r_min_bohr {} r_max_bohr {}\n", g.n_r, g.n_theta, g.r_min, g.r_max);
    s += &format!("# hbar_au {}\n", f.hbar);
    s += &format!(
        "# masses m_li_amu {} m_c_amu {} m_n_amu {} r_e_bohr {} mu1_au {} mu2_au {}\n",
        masses.m_li, masses.m_c, masses.m_n, masses.r_e, masses.mu1, masses.mu2
    );
    for j in 0..g.n_r {
        for m in 0..g.n_theta {
            let z = f.get(j, m);
            s += &format!("{} {}\n", z.re, z.im);
        }
    }
    s.into_bytes()
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<WaveField> {
    let bad = |m: &str| WorkbenchError::Numeric(format!("malformed wavefield dump: {m}"));
    let text = std::str::from_utf8(bytes).map_err(|_| bad("not utf-8"))?;
    let mut lines = text.lines();
    lines.next();
    let dims: Vec<&str> = lines.next().ok_or_else(|| bad("no grid line"))?.split_whitespace().collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(s));
    let (n_r, n_theta) = (num(dims[2])? as usize, num(dims[4])? as usize);
    let grid = GridSpec::new(n_r, n_theta, num(dims[6])?, num(dims[8])?)?;
    let hbar_line: Vec<&str> = lines.next().ok_or_else(|| bad("no hbar line"))?.split_whitespace().collect();
    let hbar = num(hbar_line[2])?;
    lines.next();
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else { return Err(bad("short row")) };
        values.push(Complex64::new(num(a)?, num(b)?));
    }
    if values.len() != n_r * n_theta {
        return Err(bad("node count does not match the grid"));
    }
    let mut f = WaveField::zeros(grid, hbar);
    for (k, z) in values.into_iter().enumerate() {
        f.re[[k / n_theta, k % n_theta]] = z.re;
        f.im[[k / n_theta, k % n_theta]] = z.im;
    }
    Ok(f)
}
