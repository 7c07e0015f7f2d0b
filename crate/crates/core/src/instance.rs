//! Plain-text instance files for exchanging problems and solutions with
//! external checkers.
//!
//! Layout, one item per line, dimensions always explicit:
//!
//! ```text
//! risbc-instance 1
//! users <K>
//! tx_antennas <N_t>
//! rx_antennas <N_1> ... <N_K>
//! ris_elements <N>
//! power <P>
//! matrix H <k> <rows> <cols>      effective channels, one block per user
//! matrix S <k> <rows> <cols>      optional, one per user
//! vector theta <N>                optional, one "re im" pair per line
//! matrix D <k> <rows> <cols>      optional link block: D_k for every k,
//! matrix U - <rows> <cols>        then U,
//! matrix G <k> <rows> <cols>      then G_k for every k
//! scalar <name> <value>           any number, sorted by name
//! end
//! ```
//!
//! A matrix header is followed by `rows` lines of `cols` space-separated
//! `re im` pairs. Numbers are written with 17 fractional digits in
//! scientific notation, which round-trips `f64` exactly, so export, import
//! and export again reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{compose_all, ChannelSet, RisPhases};
use crate::covariance::CovarianceSet;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::C;

const MAGIC: &str = "risbc-instance 1";

/// Raw link matrices `D_k`, `U` and `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMatrices {
    pub direct: Vec<CMat<f64>>,
    pub bs_ris: CMat<f64>,
    pub ris_user: Vec<CMat<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub tx_antennas: usize,
    pub rx_antennas: Vec<usize>,
    pub ris_elements: usize,
    pub power: f64,
    pub channels: Vec<CMat<f64>>,
    pub covariances: Option<Vec<CMat<f64>>>,
    pub phases: Option<Vec<C<f64>>>,
    pub links: Option<LinkMatrices>,
    pub scalars: BTreeMap<String, f64>,
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn write_matrix(out: &mut String, name: &str, index: Option<usize>, m: &CMat<f64>) {
    let idx = index.map_or_else(|| "-".to_string(), |k| k.to_string());
    writeln!(out, "matrix {name} {idx} {} {}", m.nrows(), m.ncols()).unwrap();
    for i in 0..m.nrows() {
        let row: Vec<String> =
            (0..m.ncols()).map(|j| format!("{} {}", num(m[(i, j)].re), num(m[(i, j)].im))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

impl InstanceFile {
    /// Instance for `channels` at `phases`, with optional covariances.
    pub fn from_solution(
        channels: &ChannelSet<f64>,
        phases: &RisPhases<f64>,
        covariances: Option<&CovarianceSet<f64>>,
        power: f64,
    ) -> Result<Self> {
        if phases.len() != channels.n_ris() {
            return Err(Error::Dimension(format!("{} phases for {} RIS elements", phases.len(), channels.n_ris())));
        }
        let k = channels.users();
        let file = InstanceFile {
            tx_antennas: channels.n_t(),
            rx_antennas: (0..k).map(|i| channels.user_antennas(i)).collect(),
            ris_elements: channels.n_ris(),
            power,
            channels: compose_all(channels, phases),
            covariances: covariances.map(|c| c.mats().to_vec()),
            phases: (channels.n_ris() > 0).then(|| phases.as_slice().to_vec()),
            links: (channels.n_ris() > 0).then(|| LinkMatrices {
                direct: (0..k).map(|i| channels.direct(i).clone()).collect(),
                bs_ris: channels.bs_ris().clone(),
                ris_user: (0..k).map(|i| channels.ris_user(i).clone()).collect(),
            }),
            scalars: BTreeMap::new(),
        };
        file.validate()?;
        Ok(file)
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    /// Rebuilds the channel set from the link matrices, if present.
    pub fn channel_set(&self) -> Option<Result<ChannelSet<f64>>> {
        self.links
            .as_ref()
            .map(|l| ChannelSet::new(l.direct.clone(), l.bs_ris.clone(), l.ris_user.clone()))
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.channels.len();
        let dim = |msg: String| Err(Error::Dimension(msg));
        if k == 0 || self.rx_antennas.len() != k {
            return dim(format!("{} channels for {} users", k, self.rx_antennas.len()));
        }
        let shape_check = |name: &str, ms: &[CMat<f64>], cols: &dyn Fn(usize) -> usize| -> Result<()> {
            if ms.len() != k {
                return Err(Error::Dimension(format!("{} {name} blocks for {k} users", ms.len())));
            }
            for (i, m) in ms.iter().enumerate() {
                if m.nrows() != self.rx_antennas[i] || m.ncols() != cols(i) {
                    return Err(Error::Dimension(format!(
                        "{name}[{i}] is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        self.rx_antennas[i],
                        cols(i)
                    )));
                }
            }
            Ok(())
        };
        shape_check("H", &self.channels, &|_| self.tx_antennas)?;
        if let Some(s) = &self.covariances {
            shape_check("S", s, &|i| self.rx_antennas[i])?;
        }
        if let Some(t) = &self.phases {
            if t.len() != self.ris_elements {
                return dim(format!("{} phases for {} RIS elements", t.len(), self.ris_elements));
            }
        }
        if let Some(l) = &self.links {
            shape_check("D", &l.direct, &|_| self.tx_antennas)?;
            shape_check("G", &l.ris_user, &|_| self.ris_elements)?;
            if l.bs_ris.shape() != (self.ris_elements, self.tx_antennas) {
                return dim(format!("U is {:?}, expected {}x{}", l.bs_ris.shape(), self.ris_elements, self.tx_antennas));
            }
        }
        for name in self.scalars.keys() {
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::InvalidOption(format!("scalar name '{name}' must be a single word")));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "users {}", self.users()).unwrap();
        writeln!(out, "tx_antennas {}", self.tx_antennas).unwrap();
        let rx: Vec<String> = self.rx_antennas.iter().map(|n| n.to_string()).collect();
        writeln!(out, "rx_antennas {}", rx.join(" ")).unwrap();
        writeln!(out, "ris_elements {}", self.ris_elements).unwrap();
        writeln!(out, "power {}", num(self.power)).unwrap();
        for (k, h) in self.channels.iter().enumerate() {
            write_matrix(&mut out, "H", Some(k), h);
        }
        if let Some(s) = &self.covariances {
            for (k, m) in s.iter().enumerate() {
                write_matrix(&mut out, "S", Some(k), m);
            }
        }
        if let Some(t) = &self.phases {
            writeln!(out, "vector theta {}", t.len()).unwrap();
            for z in t {
                writeln!(out, "{} {}", num(z.re), num(z.im)).unwrap();
            }
        }
        if let Some(l) = &self.links {
            for (k, d) in l.direct.iter().enumerate() {
                write_matrix(&mut out, "D", Some(k), d);
            }
            write_matrix(&mut out, "U", None, &l.bs_ris);
            for (k, g) in l.ris_user.iter().enumerate() {
                write_matrix(&mut out, "G", Some(k), g);
            }
        }
        for (name, v) in &self.scalars {
            writeln!(out, "scalar {name} {}", num(*v)).unwrap();
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { lines: text.lines().enumerate().peekable() };
        p.expect_exact(MAGIC)?;
        let users = p.keyword_usize("users")?;
        let tx_antennas = p.keyword_usize("tx_antennas")?;
        let (line, rx) = p.keyword("rx_antennas")?;
        let rx_antennas = rx
            .iter()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(line, format!("rx_antennas: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if rx_antennas.len() != users {
            return Err(parse_err(line, format!("{} rx_antennas entries for {users} users", rx_antennas.len())));
        }
        let ris_elements = p.keyword_usize("ris_elements")?;
        let (line, v) = p.keyword("power")?;
        let power = single_f64(line, &v)?;

        let channels = p.matrices("H", users, Some(tx_antennas), &rx_antennas)?;
        let covariances = if p.peek_matrix("S") {
            Some(p.matrices("S", users, None, &rx_antennas)?)
        } else {
            None
        };
        let phases = if p.peek_starts("vector theta") {
            let (line, v) = p.keyword("vector")?;
            if v.len() != 2 || v[1].parse::<usize>().ok() != Some(ris_elements) {
                return Err(parse_err(line, format!("expected 'vector theta {ris_elements}'")));
            }
            let mut t = Vec::with_capacity(ris_elements);
            for _ in 0..ris_elements {
                let (line, vals) = p.numbers()?;
                if vals.len() != 2 {
                    return Err(parse_err(line, "expected one 're im' pair".into()));
                }
                t.push(C::new(vals[0], vals[1]));
            }
            Some(t)
        } else {
            None
        };
        let links = if p.peek_matrix("D") {
            let direct = p.matrices("D", users, Some(tx_antennas), &rx_antennas)?;
            let bs_ris = p.matrix("U", None, ris_elements, tx_antennas)?;
            let ris_user = p.matrices("G", users, Some(ris_elements), &rx_antennas)?;
            Some(LinkMatrices { direct, bs_ris, ris_user })
        } else {
            None
        };
        let mut scalars = BTreeMap::new();
        while p.peek_starts("scalar ") {
            let (line, v) = p.keyword("scalar")?;
            if v.len() != 2 {
                return Err(parse_err(line, "expected 'scalar <name> <value>'".into()));
            }
            let value = parse_f64(line, &v[1])?;
            if scalars.insert(v[0].clone(), value).is_some() {
                return Err(parse_err(line, format!("duplicate scalar '{}'", v[0])));
            }
        }
        p.expect_exact("end")?;
        if let Some((i, l)) = p.lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(parse_err(i + 1, format!("unexpected content after 'end': {l}")));
        }
        let file = InstanceFile {
            tx_antennas,
            rx_antennas,
            ris_elements,
            power,
            channels,
            covariances,
            phases,
            links,
            scalars,
        };
        file.validate()?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| parse_err(line, format!("'{s}' is not a number")))
}

fn single_f64(line: usize, v: &[String]) -> Result<f64> {
    match v {
        [x] => parse_f64(line, x),
        _ => Err(parse_err(line, "expected a single number".into())),
    }
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl Parser<'_> {
    fn next_line(&mut self) -> Result<(usize, String)> {
        match self.lines.next() {
            Some((i, l)) => Ok((i + 1, l.trim_end_matches('\r').to_string())),
            None => Err(parse_err(0, "unexpected end of file".into())),
        }
    }

    fn peek_starts(&mut self, prefix: &str) -> bool {
        self.lines.peek().is_some_and(|(_, l)| l.starts_with(prefix))
    }

    fn peek_matrix(&mut self, name: &str) -> bool {
        self.peek_starts(&format!("matrix {name} "))
    }

    fn expect_exact(&mut self, want: &str) -> Result<()> {
        let (line, l) = self.next_line()?;
        if l.trim() != want {
            return Err(parse_err(line, format!("expected '{want}', found '{l}'")));
        }
        Ok(())
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, Vec<String>)> {
        let (line, l) = self.next_line()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(parse_err(line, format!("expected '{key}', found '{l}'")));
        }
        Ok((line, parts.map(str::to_string).collect()))
    }

    fn keyword_usize(&mut self, key: &str) -> Result<usize> {
        let (line, v) = self.keyword(key)?;
        match v.as_slice() {
            [x] => x.parse().map_err(|_| parse_err(line, format!("'{x}' is not a count"))),
            _ => Err(parse_err(line, format!("expected '{key} <count>'"))),
        }
    }

    fn numbers(&mut self) -> Result<(usize, Vec<f64>)> {
        let (line, l) = self.next_line()?;
        let vals = l.split_whitespace().map(|t| parse_f64(line, t)).collect::<Result<Vec<_>>>()?;
        Ok((line, vals))
    }

    fn matrix(&mut self, name: &str, index: Option<usize>, rows: usize, cols: usize) -> Result<CMat<f64>> {
        let (line, v) = self.keyword("matrix")?;
        let idx = index.map_or_else(|| "-".to_string(), |k| k.to_string());
        let want = [name.to_string(), idx, rows.to_string(), cols.to_string()];
        if v != want {
            return Err(parse_err(line, format!("expected 'matrix {}', found 'matrix {}'", want.join(" "), v.join(" "))));
        }
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            let (line, vals) = self.numbers()?;
            if vals.len() != 2 * cols {
                return Err(parse_err(line, format!("expected {} numbers, found {}", 2 * cols, vals.len())));
            }
            for j in 0..cols {
                m[(i, j)] = C::new(vals[2 * j], vals[2 * j + 1]);
            }
        }
        Ok(m)
    }

    /// One block per user; `cols = None` means square.
    fn matrices(&mut self, name: &str, users: usize, cols: Option<usize>, rx: &[usize]) -> Result<Vec<CMat<f64>>> {
        (0..users).map(|k| self.matrix(name, Some(k), rx[k], cols.unwrap_or(rx[k]))).collect()
    }
}
