//! Parses a molecule matrix, flattens it, perturbs the vector the way a
//! decoder output would be, and snaps it back to valid codes.
//!
//! cargo run --example molecule_codec

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqvae::moldata::{
    discretize_output, filter_ligand, l1_normalize, matrix_to_vector, parse_molecule, synth_dataset, MolStyle,
    SynthKind,
};

const GRID: &str = "\
1 2 0 0
2 3 0 0
0 0 1 4
0 0 4 5
";

fn main() -> sqvae::Result<()> {
    let m = parse_molecule(GRID, MolStyle::Ligand)?;
    println!("{} atoms, {} bonds, filter: {:?}", m.atom_count(), m.bond_count(), filter_ligand(&m));

    let x = matrix_to_vector(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let noisy: Vec<f64> = x.iter().map(|v| v + rng.random_range(-0.4..0.4)).collect();
    let back = discretize_output(&noisy, MolStyle::Ligand)?;
    println!("recovered after noise: {}", back == m);

    let p = l1_normalize(&x)?;
    println!("L1-normalized sum {}", p.iter().sum::<f64>());

    let d = synth_dataset(SynthKind::Qm9, 2, 1)?;
    print!("{}", d.to_text()?);
    Ok(())
}
