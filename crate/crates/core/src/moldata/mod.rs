//! Molecule matrices, vector datasets, and their text format.

mod dataset;
mod matrix;

pub use dataset::{
    random_molecule, read_dataset, split_dataset, synth_dataset, vector_to_matrix, write_dataset, DataKind, Split,
    SynthKind, VectorDataset,
};
pub use matrix::{
    discretize_output, filter_ligand, l1_normalize, matrix_to_vector, parse_molecule, LigandVerdict, MolStyle,
    MoleculeMatrix, RejectReason, BOND_CODES, LIGAND_ATOMS, MAX_LIGAND_ATOMS,
};
