use ama_core::{calibration, ContextPreset, Scenario};
use std::path::PathBuf;

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn shipped_scenarios_are_the_calibration() {
    for (file, ctx) in
        [("ama-default.toml", ContextPreset::Community), ("ama-fragmented.toml", ContextPreset::Fragmented)]
    {
        let s = Scenario::load(shipped(file)).unwrap();
        assert_eq!(s, calibration::scenario(ctx, 1), "{file}");
        s.validate().unwrap();
    }
}

#[test]
fn round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = calibration::scenario(ContextPreset::Fragmented, 77);
    s.graph.n = 123;
    let path = dir.path().join("s.toml");
    s.save(&path).unwrap();
    let back = Scenario::load(&path).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.hash(), s.hash());
}
