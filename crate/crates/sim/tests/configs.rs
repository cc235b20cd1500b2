//! The sample configurations shipped with the repository stay valid.

use std::path::PathBuf;

use fvk_sim::{load_config, ExperimentConfig, ExperimentKind};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn every_sample_config_parses() {
    let mut kinds = Vec::new();
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            let cfg = load_config(&path, None, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            kinds.push(cfg.kind);
        }
    }
    for k in ExperimentKind::ALL {
        assert!(kinds.contains(&k), "no sample config for {k}");
    }
}

#[test]
fn sample_experiment_configs_match_the_built_in_defaults() {
    for kind in [
        ExperimentKind::FlatDiscSweep,
        ExperimentKind::CurvatureInversion,
        ExperimentKind::Cardboard,
        ExperimentKind::BilayerFold,
    ] {
        let path = configs_dir().join(format!("{kind}.conf"));
        let mut cfg = load_config(&path, Some(kind), &[]).unwrap();
        let defaults = ExperimentConfig::defaults(kind);
        cfg.output.dir = defaults.output.dir.clone();
        assert_eq!(cfg, defaults, "{kind}");
    }
}
