use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmean::format::{TrajectoryRecord, TrajectorySet, TrajectorySetFile};

fn random_file(rng: &mut ChaCha8Rng) -> TrajectorySetFile {
    let window = rng.random_range(1..=12);
    let dim = rng.random_range(1..=3);
    let sets = (0..rng.random_range(0..4))
        .map(|s| TrajectorySet {
            id: format!("set{s}"),
            trajectories: (0..rng.random_range(0..4))
                .map(|t| {
                    let domain: Vec<usize> =
                        (1..=window).filter(|_| rng.random_bool(0.5)).collect();
                    let states = domain
                        .iter()
                        .map(|_| {
                            (0..dim)
                                .map(|_| rng.random_range(-1e6..1e6) * rng.random::<f64>())
                                .collect()
                        })
                        .collect();
                    TrajectoryRecord {
                        id: format!("t{t}"),
                        domain,
                        states,
                    }
                })
                .collect(),
        })
        .collect();
    TrajectorySetFile { window, sets }
}

#[test]
fn write_then_read_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let dir = tempfile::tempdir().unwrap();
    for i in 0..200 {
        let file = random_file(&mut rng);
        file.validate().unwrap();
        let path = dir.path().join(format!("{i}.json"));
        file.write(&path).unwrap();
        let back = TrajectorySetFile::read(&path).unwrap();
        assert_eq!(back, file);
        let mots = back.to_mots().unwrap();
        let ids: Vec<&str> = file.sets.iter().map(|s| s.id.as_str()).collect();
        let rebuilt = TrajectorySetFile::from_mots(file.window, ids.iter().copied().zip(&mots));
        assert_eq!(rebuilt.to_mots().unwrap(), mots);
    }
}
