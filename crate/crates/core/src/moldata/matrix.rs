use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bond codes: none, single, double, aromatic.
pub const BOND_CODES: [i64; 4] = [0, 1, 2, 4];
/// Atom codes allowed by the ligand filter: C, N, O, F, S.
pub const LIGAND_ATOMS: [i64; 5] = [1, 2, 3, 4, 5];
/// Maximum heavy atoms a ligand may have.
pub const MAX_LIGAND_ATOMS: usize = 32;

/// Which atom alphabet a matrix uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MolStyle {
    /// 0 (empty), 1-C, 2-N, 3-O.
    Qm9,
    /// 0 (empty), 1-C, 2-N, 3-O, 4-F, 5-S.
    Ligand,
    /// Any nonnegative atom code, for molecules that have not been filtered yet.
    Raw,
}

impl MolStyle {
    pub fn tag(self) -> &'static str {
        match self {
            MolStyle::Qm9 => "qm9",
            MolStyle::Ligand => "ligand",
            MolStyle::Raw => "raw",
        }
    }

    pub fn default_size(self) -> usize {
        match self {
            MolStyle::Qm9 => 8,
            MolStyle::Ligand | MolStyle::Raw => 32,
        }
    }

    /// Largest atom code; `None` when unbounded.
    pub fn max_atom_code(self) -> Option<i64> {
        match self {
            MolStyle::Qm9 => Some(3),
            MolStyle::Ligand => Some(5),
            MolStyle::Raw => None,
        }
    }

    pub fn atom_allowed(self, code: i64) -> bool {
        code >= 0 && self.max_atom_code().is_none_or(|max| code <= max)
    }
}

impl fmt::Display for MolStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MolStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qm9" => Ok(MolStyle::Qm9),
            "ligand" => Ok(MolStyle::Ligand),
            "raw" => Ok(MolStyle::Raw),
            _ => Err(Error::Usage(format!("unknown molecule style `{s}`"))),
        }
    }
}

/// Symmetric integer matrix: atom codes on the diagonal, bond codes elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoleculeMatrix {
    size: usize,
    style: MolStyle,
    cells: Vec<i64>,
}

impl MoleculeMatrix {
    /// Validates `cells` (row-major, `size × size`) against every invariant.
    pub fn new(size: usize, style: MolStyle, cells: Vec<i64>) -> Result<Self> {
        if cells.len() != size * size || size == 0 {
            return Err(Error::shape(format!(
                "{} cells for a {size}x{size} molecule matrix",
                cells.len()
            )));
        }
        let at = |r: usize, c: usize| cells[r * size + c];
        for r in 0..size {
            for c in 0..size {
                let code = at(r, c);
                let ok = if r == c { style.atom_allowed(code) } else { BOND_CODES.contains(&code) };
                if !ok {
                    return Err(Error::Code { row: r, col: c, code });
                }
            }
        }
        for r in 0..size {
            for c in r + 1..size {
                if at(r, c) != at(c, r) {
                    return Err(Error::Symmetry { row: r, col: c, upper: at(r, c), lower: at(c, r) });
                }
                if at(r, c) != 0 && (at(r, r) == 0 || at(c, c) == 0) {
                    return Err(Error::Contract(format!(
                        "bond at ({r}, {c}) touches an empty atom slot"
                    )));
                }
            }
        }
        Ok(Self { size, style, cells })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn style(&self) -> MolStyle {
        self.style
    }

    pub fn cells(&self) -> &[i64] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.cells[row * self.size + col]
    }

    pub fn atoms(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.size).map(|i| self.get(i, i)).filter(|&c| c != 0)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().count()
    }

    pub fn bond_count(&self) -> usize {
        (0..self.size)
            .flat_map(|r| (r + 1..self.size).map(move |c| (r, c)))
            .filter(|&(r, c)| self.get(r, c) != 0)
            .count()
    }

    /// Row-major grid, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.cells.chunks_exact(self.size) {
            let line: Vec<String> = row.iter().map(i64::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses a whitespace-separated `n × n` integer grid.
pub fn parse_molecule(text: &str, style: MolStyle) -> Result<MoleculeMatrix> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<i64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("`{tok}` is not an integer code"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::shape("empty molecule matrix"));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::shape(format!(
            "row {r} has {} entries in a {n}-row matrix",
            row.len()
        )));
    }
    MoleculeMatrix::new(n, style, rows.concat())
}

/// Row-major flatten to reals.
pub fn matrix_to_vector(m: &MoleculeMatrix) -> Vec<f64> {
    m.cells.iter().map(|&c| c as f64).collect()
}

fn nearest(value: f64, allowed: impl Iterator<Item = i64>) -> i64 {
    let mut best = (f64::INFINITY, 0);
    // Ascending order plus strict `<` resolves ties toward the smaller code.
    for code in allowed {
        let d = (value - code as f64).abs();
        if d < best.0 {
            best = (d, code);
        }
    }
    best.1
}

/// Snaps a continuous `n²` output to the nearest valid molecule matrix.
///
/// Off-diagonal pairs are averaged, each cell is clamped to `[0, max code]`
/// and rounded to the nearest allowed code (ties toward the smaller), and
/// bonds to empty atom slots are removed.
pub fn discretize_output(x: &[f64], style: MolStyle) -> Result<MoleculeMatrix> {
    let n = (x.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != x.len() {
        return Err(Error::shape(format!("{} values do not form a square matrix", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("output entry {i} is {}", x[i])));
    }
    let max_atom = style.max_atom_code().unwrap_or_else(|| x.iter().fold(0.0f64, |a, &b| a.max(b)).ceil() as i64);
    let mut cells = vec![0i64; n * n];
    for i in 0..n {
        cells[i * n + i] = nearest(x[i * n + i].clamp(0.0, max_atom as f64), 0..=max_atom);
    }
    let max_bond = *BOND_CODES.last().expect("bond codes") as f64;
    for r in 0..n {
        for c in r + 1..n {
            let v = ((x[r * n + c] + x[c * n + r]) / 2.0).clamp(0.0, max_bond);
            let code = if cells[r * n + r] == 0 || cells[c * n + c] == 0 {
                0
            } else {
                nearest(v, BOND_CODES.into_iter())
            };
            cells[r * n + c] = code;
            cells[c * n + r] = code;
        }
    }
    MoleculeMatrix::new(n, style, cells)
}

/// `x / Σx` for a nonnegative vector.
pub fn l1_normalize(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = x.iter().position(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Contract(format!(
            "L1 normalization needs finite nonnegative entries; entry {i} is {}",
            x[i]
        )));
    }
    let sum: f64 = x.iter().sum();
    if sum == 0.0 {
        return Err(Error::DegenerateInput("L1 normalization of an all-zero vector".into()));
    }
    Ok(x.iter().map(|v| v / sum).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    TooManyAtoms(usize),
    AtomType(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LigandVerdict {
    Accept,
    Reject(RejectReason),
}

/// Accepts molecules with at most 32 heavy atoms, all from C/N/O/F/S.
pub fn filter_ligand(m: &MoleculeMatrix) -> LigandVerdict {
    let atoms = m.atom_count();
    if atoms > MAX_LIGAND_ATOMS {
        return LigandVerdict::Reject(RejectReason::TooManyAtoms(atoms));
    }
    match m.atoms().find(|c| !LIGAND_ATOMS.contains(c)) {
        Some(code) => LigandVerdict::Reject(RejectReason::AtomType(code)),
        None => LigandVerdict::Accept,
    }
}
