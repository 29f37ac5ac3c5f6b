use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqvae::moldata::*;
use sqvae::Error;

fn any_molecule() -> impl Strategy<Value = MoleculeMatrix> {
    (any::<u64>(), 1usize..=12, prop_oneof![Just(MolStyle::Qm9), Just(MolStyle::Ligand)]).prop_map(|(seed, n, style)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_molecule(&mut rng, n, style, 0..=n).unwrap()
    })
}

proptest! {
    #[test]
    fn codec_totality(m in any_molecule()) {
        let back = discretize_output(&matrix_to_vector(&m), m.style()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(vector_to_matrix(&matrix_to_vector(&m), m.style()).unwrap(), m);
    }

    #[test]
    fn discretize_idempotent(n in 1usize..8, seed in any::<u64>(), ligand in any::<bool>()) {
        use rand::Rng;
        let style = if ligand { MolStyle::Ligand } else { MolStyle::Qm9 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..7.0)).collect();
        let once = discretize_output(&x, style).unwrap();
        let twice = discretize_output(&matrix_to_vector(&once), style).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn l1_sums_to_one_and_keeps_argmax(x in prop::collection::vec(0.0..100.0f64, 1..50)) {
        prop_assume!(x.iter().sum::<f64>() > 0.0);
        let y = l1_normalize(&x).unwrap();
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, &a)| if a > v[b] { i } else { b });
        prop_assert_eq!(argmax(&x), argmax(&y));
    }

    #[test]
    fn accepted_ligands_are_sound(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_molecule(&mut rng, n, MolStyle::Raw, 0..=n).unwrap();
        if filter_ligand(&m) == LigandVerdict::Accept {
            prop_assert!(m.atom_count() <= MAX_LIGAND_ATOMS);
            prop_assert!(m.atoms().all(|a| LIGAND_ATOMS.contains(&a)));
            prop_assert!(parse_molecule(&m.to_text(), MolStyle::Ligand).is_ok());
        }
    }

    #[test]
    fn split_is_a_partition(count in 1usize..200, seed in any::<u64>(), frac in 0.0..=1.0f64) {
        let d = synth_dataset(SynthKind::Blobs { dim: 2 }, count, 0).unwrap();
        let s = split_dataset(&d, frac, seed).unwrap();
        let (train, test) = (s.indices(Split::Train), s.indices(Split::Test));
        prop_assert_eq!(train.len(), (frac * count as f64).round() as usize);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..count).collect::<Vec<_>>());
    }
}

#[test]
fn ligand_capacity_flattens_to_1024() {
    let d = synth_dataset(SynthKind::Ligand, 1, 0).unwrap();
    assert_eq!(matrix_to_vector(&d.molecule(0).unwrap()).len(), 1024);
}

#[test]
fn dataset_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mols.txt");
    let d = synth_dataset(SynthKind::Qm9, 6, 2).unwrap();
    write_dataset(&path, &d).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), d);
    assert!(matches!(read_dataset(&dir.path().join("missing.txt")), Err(Error::Io { .. })));
}
