use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{l1_normalize, matrix_to_vector, parse_molecule, MolStyle, MoleculeMatrix, BOND_CODES};
use crate::error::{Error, Result};
use crate::numfmt::sig9;

/// What the items of a dataset encode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataKind {
    Molecule(MolStyle),
    Vector,
}

impl DataKind {
    pub fn tag(self) -> &'static str {
        match self {
            DataKind::Molecule(s) => s.tag(),
            DataKind::Vector => "vector",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "vector" => Ok(DataKind::Vector),
            other => Ok(DataKind::Molecule(other.parse()?)),
        }
    }

    pub fn molecule_style(self) -> Option<MolStyle> {
        match self {
            DataKind::Molecule(s) => Some(s),
            DataKind::Vector => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

/// Fixed-width real vectors with ids and a train/test assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorDataset {
    feature_dim: usize,
    kind: DataKind,
    items: Vec<Vec<f64>>,
    ids: Vec<String>,
    split: Vec<Split>,
}

impl VectorDataset {
    /// Every item starts in the train split. Empty `ids` means number them.
    pub fn new(feature_dim: usize, kind: DataKind, items: Vec<Vec<f64>>, ids: Vec<String>) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::shape("dataset feature dimension must be positive"));
        }
        if let Some(i) = items.iter().position(|x| x.len() != feature_dim) {
            return Err(Error::shape(format!(
                "item {i} has {} features, dataset has {feature_dim}",
                items[i].len()
            )));
        }
        let ids = if ids.is_empty() {
            (0..items.len()).map(|i| i.to_string()).collect()
        } else if ids.len() == items.len() {
            ids
        } else {
            return Err(Error::shape(format!("{} ids for {} items", ids.len(), items.len())));
        };
        let split = vec![Split::Train; items.len()];
        Ok(Self { feature_dim, kind, items, ids, split })
    }

    pub fn from_molecules(style: MolStyle, molecules: &[MoleculeMatrix]) -> Result<Self> {
        let size = molecules.first().map_or(style.default_size(), MoleculeMatrix::size);
        if let Some(m) = molecules.iter().find(|m| m.size() != size) {
            return Err(Error::shape(format!("mixed molecule sizes {size} and {}", m.size())));
        }
        let items = molecules.iter().map(matrix_to_vector).collect();
        Self::new(size * size, DataKind::Molecule(style), items, Vec::new())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Vec<f64>] {
        &self.items
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn assignments(&self) -> &[Split] {
        &self.split
    }

    /// Indices of the items assigned to `which`, in dataset order.
    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn subset(&self, which: Split) -> Vec<&[f64]> {
        self.indices(which).into_iter().map(|i| self.items[i].as_slice()).collect()
    }

    /// Rebuilds item `i` as a molecule matrix (molecule datasets with integral cells only).
    pub fn molecule(&self, i: usize) -> Result<MoleculeMatrix> {
        let style = self
            .kind
            .molecule_style()
            .ok_or_else(|| Error::Unsupported("vector datasets hold no molecules".into()))?;
        let x = self.items.get(i).ok_or_else(|| Error::Index(format!("item {i} of {}", self.len())))?;
        vector_to_matrix(x, style)
    }

    /// Copy with every item divided by its L1 norm; the split is kept.
    pub fn l1_normalized(&self) -> Result<Self> {
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, x)| {
                l1_normalize(x).map_err(|e| match e {
                    Error::DegenerateInput(m) => Error::DegenerateInput(format!("item {}: {m}", self.ids[i])),
                    Error::Contract(m) => Error::Contract(format!("item {}: {m}", self.ids[i])),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { items, ..self.clone() })
    }

    /// Serializes in the dataset text format.
    ///
    /// Molecule datasets must hold integral cells; normalized copies are
    /// written as vectors.
    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("dim={} style={}\n", self.feature_dim, self.kind.tag());
        for (i, x) in self.items.iter().enumerate() {
            out.push('\n');
            let _ = writeln!(out, "# {}", self.ids[i]);
            match self.kind {
                DataKind::Molecule(style) => out.push_str(&vector_to_matrix(x, style)?.to_text()),
                DataKind::Vector => {
                    let line: Vec<String> = x.iter().map(|&v| sig9(v)).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing `dim=<n> style=<tag>` header".into() })?;
        let (dim, kind) = parse_header(header)?;

        let mut records: Vec<(usize, Option<String>, Vec<&str>)> = Vec::new();
        let mut open = false;
        for (lineno, line) in lines {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                open = false;
                continue;
            }
            if !open {
                records.push((lineno + 1, None, Vec::new()));
                open = true;
            }
            let rec = records.last_mut().expect("record opened above");
            if let Some(id) = trimmed.strip_prefix('#') {
                if rec.1.is_none() && rec.2.is_empty() {
                    rec.1 = Some(id.trim().to_string());
                }
                continue;
            }
            rec.2.push(trimmed);
        }

        let mut items = Vec::with_capacity(records.len());
        let mut ids = Vec::with_capacity(records.len());
        for (n, (line, id, body)) in records.into_iter().enumerate() {
            let x = match kind {
                DataKind::Molecule(style) => {
                    let m = parse_molecule(&body.join("\n"), style).map_err(|e| at_record(e, line))?;
                    matrix_to_vector(&m)
                }
                DataKind::Vector => body
                    .iter()
                    .flat_map(|l| l.split_whitespace())
                    .map(|tok| {
                        tok.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("`{tok}` is not a number") })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            if x.len() != dim {
                return Err(Error::shape(format!(
                    "record starting at line {line} has {} values, header says dim={dim}",
                    x.len()
                )));
            }
            items.push(x);
            ids.push(id.unwrap_or_else(|| n.to_string()));
        }
        Self::new(dim, kind, items, ids)
    }
}

fn at_record(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { line: l, msg } => Error::Parse { line: line + l - 1, msg },
        Error::Shape(m) => Error::Shape(format!("record at line {line}: {m}")),
        Error::Contract(m) => Error::Contract(format!("record at line {line}: {m}")),
        other => other,
    }
}

fn parse_header(header: &str) -> Result<(usize, DataKind)> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    let mut dim = None;
    let mut kind = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("dim", v)) => dim = Some(v.parse::<usize>().map_err(|_| bad(format!("bad dim `{v}`")))?),
            Some(("style", v)) => kind = Some(DataKind::parse(v)?),
            _ => return Err(bad(format!("unexpected header field `{field}`"))),
        }
    }
    match (dim, kind) {
        (Some(d), Some(k)) => Ok((d, k)),
        _ => Err(bad("header needs both dim= and style=".into())),
    }
}

/// Inverse of `matrix_to_vector` for integral, symmetric, valid inputs.
pub fn vector_to_matrix(x: &[f64], style: MolStyle) -> Result<MoleculeMatrix> {
    let n = (x.len() as f64).sqrt().round() as usize;
    if n * n != x.len() {
        return Err(Error::shape(format!("{} values do not form a square matrix", x.len())));
    }
    let cells = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.fract() == 0.0 && v.is_finite() {
                Ok(v as i64)
            } else {
                Err(Error::Code { row: i / n, col: i % n, code: v.round() as i64 })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MoleculeMatrix::new(n, style, cells)
}

pub fn read_dataset(path: &Path) -> Result<VectorDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    VectorDataset::from_text(&text)
}

pub fn write_dataset(path: &Path, d: &VectorDataset) -> Result<()> {
    fs::write(path, d.to_text()?).map_err(|e| Error::io(path, e))
}

/// Seeded shuffle, then the first `round(fraction · N)` items train.
pub fn split_dataset(d: &VectorDataset, train_fraction: f64, seed: u64) -> Result<VectorDataset> {
    if d.is_empty() {
        return Err(Error::Contract("cannot split an empty dataset".into()));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Argument(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * d.len() as f64).round() as usize;
    let mut split = vec![Split::Test; d.len()];
    for &i in &order[..n_train] {
        split[i] = Split::Train;
    }
    Ok(VectorDataset { split, ..d.clone() })
}

/// Synthetic data families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthKind {
    /// 8×8 matrices over C/N/O with 7 or 8 atoms.
    Qm9,
    /// 32×32 matrices over C/N/O/F/S with 16 to 32 atoms.
    Ligand,
    /// Nonnegative sums of a few smooth bumps, `dim` wide.
    Blobs { dim: usize },
}

impl SynthKind {
    pub fn feature_dim(self) -> usize {
        match self {
            SynthKind::Qm9 => 64,
            SynthKind::Ligand => 1024,
            SynthKind::Blobs { dim } => dim,
        }
    }

    /// `qm9`, `ligand`, or `blobs:<dim>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "qm9" => Ok(SynthKind::Qm9),
            None if s == "ligand" => Ok(SynthKind::Ligand),
            Some(("blobs", d)) => d
                .parse()
                .ok()
                .filter(|&d: &usize| d > 0)
                .map(|dim| SynthKind::Blobs { dim })
                .ok_or_else(|| Error::Usage(format!("bad blob width `{d}`"))),
            _ => Err(Error::Usage(format!("unknown synthetic data `{s}` (qm9, ligand, blobs:<dim>)"))),
        }
    }
}

/// Connected random molecule: atoms fill the first `k` diagonal slots, atom
/// `i` bonds to a random earlier atom, and a few extra ring bonds are added.
pub fn random_molecule<R: Rng + ?Sized>(
    rng: &mut R,
    size: usize,
    style: MolStyle,
    atoms: std::ops::RangeInclusive<usize>,
) -> Result<MoleculeMatrix> {
    let max_atom = style.max_atom_code().unwrap_or(5);
    let k = rng.random_range(atoms).min(size);
    let mut cells = vec![0i64; size * size];
    for i in 0..k {
        // Carbon-heavy, like real organic molecules.
        cells[i * size + i] = if rng.random_bool(0.6) { 1 } else { rng.random_range(1..=max_atom) };
    }
    let bond = |rng: &mut R| BOND_CODES[rng.random_range(1..BOND_CODES.len())];
    let mut set = |r: usize, c: usize, v: i64| {
        cells[r * size + c] = v;
        cells[c * size + r] = v;
    };
    for i in 1..k {
        let j = rng.random_range(0..i);
        set(i, j, bond(rng));
    }
    for _ in 0..k / 4 {
        let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
        if a != b {
            set(a, b, bond(rng));
        }
    }
    MoleculeMatrix::new(size, style, cells)
}

fn blob<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let side = (dim as f64).sqrt().round() as usize;
    let grid = side * side == dim;
    let bumps = rng.random_range(1..=3);
    let mut x = vec![0.0; dim];
    for _ in 0..bumps {
        let amp = rng.random_range(0.5..1.5);
        let width = rng.random_range(0.1..0.3);
        let (cx, cy) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        for (i, v) in x.iter_mut().enumerate() {
            let d2 = if grid {
                let (r, c) = ((i / side) as f64 / side as f64, (i % side) as f64 / side as f64);
                (r - cy).powi(2) + (c - cx).powi(2)
            } else {
                (i as f64 / dim as f64 - cx).powi(2)
            };
            *v += amp * (-d2 / (2.0 * width * width)).exp();
        }
    }
    x
}

/// Deterministic per seed.
pub fn synth_dataset(kind: SynthKind, count: usize, seed: u64) -> Result<VectorDataset> {
    if count == 0 {
        return Err(Error::Argument("synthetic dataset needs at least one item".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SynthKind::Qm9 | SynthKind::Ligand => {
            let (style, size) = match kind {
                SynthKind::Qm9 => (MolStyle::Qm9, 8),
                _ => (MolStyle::Ligand, 32),
            };
            // Keeping the last rows populated means no patch of a p ≤ 4
            // split is all zero, which amplitude embedding cannot encode.
            let atoms = if style == MolStyle::Qm9 { size - 1..=size } else { size / 2..=size };
            let mols = (0..count)
                .map(|_| random_molecule(&mut rng, size, style, atoms.clone()))
                .collect::<Result<Vec<_>>>()?;
            VectorDataset::from_molecules(style, &mols)
        }
        SynthKind::Blobs { dim } => {
            let items = (0..count).map(|_| blob(&mut rng, dim)).collect();
            VectorDataset::new(dim, DataKind::Vector, items, Vec::new())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moldata::{filter_ligand, LigandVerdict};

    #[test]
    fn split_sizes() {
        let d = synth_dataset(SynthKind::Blobs { dim: 4 }, 100, 1).unwrap();
        let s = split_dataset(&d, 0.85, 9).unwrap();
        assert_eq!((s.indices(Split::Train).len(), s.indices(Split::Test).len()), (85, 15));
        assert_eq!(s, split_dataset(&d, 0.85, 9).unwrap());
        assert_ne!(s.assignments(), split_dataset(&d, 0.85, 10).unwrap().assignments());

        let one = synth_dataset(SynthKind::Blobs { dim: 4 }, 1, 1).unwrap();
        let s = split_dataset(&one, 0.85, 0).unwrap();
        assert_eq!((s.indices(Split::Train).len(), s.indices(Split::Test).len()), (1, 0));

        let empty = VectorDataset::new(4, DataKind::Vector, Vec::new(), Vec::new()).unwrap();
        assert!(matches!(split_dataset(&empty, 0.85, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn synth_contracts() {
        let q = synth_dataset(SynthKind::Qm9, 10, 3).unwrap();
        assert_eq!((q.len(), q.feature_dim()), (10, 64));
        for i in 0..q.len() {
            let m = q.molecule(i).unwrap();
            assert_eq!(parse_molecule(&m.to_text(), MolStyle::Qm9).unwrap(), m);
        }
        let l = synth_dataset(SynthKind::Ligand, 20, 4).unwrap();
        assert_eq!(l.feature_dim(), 1024);
        for i in 0..l.len() {
            assert_eq!(filter_ligand(&l.molecule(i).unwrap()), LigandVerdict::Accept);
        }
        assert_eq!(synth_dataset(SynthKind::Ligand, 20, 4).unwrap(), l);
        let b = synth_dataset(SynthKind::Blobs { dim: 64 }, 5, 4).unwrap();
        assert!(b.items().iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn text_round_trip() {
        let q = synth_dataset(SynthKind::Qm9, 4, 5).unwrap();
        let text = q.to_text().unwrap();
        assert!(text.starts_with("dim=64 style=qm9\n\n# 0\n"));
        assert_eq!(VectorDataset::from_text(&text).unwrap(), q);

        let b = synth_dataset(SynthKind::Blobs { dim: 6 }, 3, 5).unwrap();
        let back = VectorDataset::from_text(&b.to_text().unwrap()).unwrap();
        for (a, c) in b.items().iter().flatten().zip(back.items().iter().flatten()) {
            assert!((a - c).abs() <= 1e-8 * a.abs());
        }
        assert_eq!(back.to_text().unwrap(), b.to_text().unwrap());
    }

    #[test]
    fn text_errors() {
        assert!(matches!(VectorDataset::from_text(""), Err(Error::Parse { .. })));
        assert!(matches!(VectorDataset::from_text("dim=3 style=vector\n\n1 2\n"), Err(Error::Shape(_))));
        let sym = "dim=4 style=qm9\n\n1 1\n0 1\n";
        assert!(matches!(VectorDataset::from_text(sym), Err(Error::Symmetry { .. })));
        let d = VectorDataset::from_text("dim=2 style=vector\n1 2\n\n3 4\n").unwrap();
        assert_eq!(d.items(), &[vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn l1_dataset() {
        let q = synth_dataset(SynthKind::Qm9, 3, 6).unwrap();
        let n = q.l1_normalized().unwrap();
        for x in n.items() {
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
