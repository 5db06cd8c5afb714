use std::fs;

use nudging::harness::{self, ExperimentConfig, System};
use nudging::NudgingError;

fn short_fig4() -> ExperimentConfig {
    harness::lookup("fig4", false)
        .unwrap()
        .config
        .with_overrides(&["T=0.05".into(), "output_stride=10".into()])
        .unwrap()
}

#[test]
fn every_catalog_entry_passes_its_own_guards() {
    for long in [false, true] {
        for e in harness::catalog(long) {
            harness::validate(&e.config).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }
}

#[test]
fn cfl_violation_names_the_constraint() {
    let mut cfg = short_fig4();
    cfg.mu = 3.0 / cfg.dt;
    let err = harness::validate(&cfg).unwrap_err();
    assert!(matches!(err, NudgingError::Validation { ref key, .. } if key == "mu"), "{err}");
    assert!(err.to_string().contains("μ ≲ 2/Δt"), "{err}");

    let mut cfg = short_fig4();
    cfg.dt *= 2.0;
    let err = harness::validate(&cfg).unwrap_err();
    assert!(matches!(err, NudgingError::Validation { ref key, .. } if key == "dt"), "{err}");
}

#[test]
fn runs_are_bitwise_reproducible() {
    let cfg = short_fig4();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = harness::run(&cfg, Some("fig4"), a.path()).unwrap();
    let rb = harness::run(&cfg, Some("fig4"), b.path()).unwrap();
    assert_eq!(ra.files, rb.files);
    for f in ra.files.iter().filter(|f| f.ends_with(".csv")) {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn record_and_verify_agree() {
    let dir = tempfile::tempdir().unwrap();
    let record = harness::run(&short_fig4(), Some("fig4"), dir.path()).unwrap();
    assert!(record.passed, "{:?}", record.assertions);
    for f in &record.files {
        assert!(fs::metadata(dir.path().join(f)).unwrap().len() > 0, "{f}");
    }
    let report = harness::verify_dir(dir.path()).unwrap();
    assert!(report.passed());
    let on_disk = harness::RunRecord::load(dir.path()).unwrap();
    assert_eq!(on_disk.assertions, report.assertions);

    // a nudged solution that picked up energy is a fig4 failure
    let norms = dir.path().join("norms.csv");
    let text = fs::read_to_string(&norms).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.len() - 1;
    let mut cols: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    cols[2] = "1e-3".into();
    lines[last] = cols.join(",");
    fs::write(&norms, lines.join("\n") + "\n").unwrap();
    let report = harness::verify_dir(dir.path()).unwrap();
    assert!(!report.passed());
    assert!(report.assertions.iter().any(|a| !a.passed && a.name.contains("bitwise zero")));
}

#[test]
fn fig11_with_nonconstant_error_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = harness::lookup("fig11", false)
        .unwrap()
        .config
        .with_overrides(&["T=0.02".into(), "output_stride=5".into(), "N=64".into()])
        .unwrap();
    let record = harness::run(&cfg, Some("fig11"), dir.path()).unwrap();
    assert!(record.passed, "{:?}", record.assertions);

    let errors = dir.path().join("errors.csv");
    let text = fs::read_to_string(&errors).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cols: Vec<String> = lines[2].split(',').map(str::to_string).collect();
    let total: f64 = cols[3].parse().unwrap();
    cols[3] = format!("{:e}", total * 0.5);
    lines[2] = cols.join(",");
    fs::write(&errors, lines.join("\n") + "\n").unwrap();
    let report = harness::verify_dir(dir.path()).unwrap();
    let failed: Vec<_> = report.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
    assert!(failed.contains(&"error is constant"), "{failed:?}");
}

#[test]
fn unresolved_reference_is_an_error_for_catalog_runs_and_a_warning_otherwise() {
    // cos(12πx) at N = 32 puts the whole spectrum at the cutoff band
    let text = r#"
system = "kdv"
T = 0.01
dt = 1e-3
mu = 10.0
delta = 0.075
M = 5
N = 32
ref_init = "single_mode(1, 10)"
output_stride = 1
"#;
    let cfg = ExperimentConfig::from_toml_str(text, &[]).unwrap();
    assert_eq!(cfg.system, System::Kdv);
    let dir = tempfile::tempdir().unwrap();
    let record = harness::run(&cfg, None, dir.path()).unwrap();
    assert!(record.warnings.iter().any(|w| w.contains("resolution")), "{:?}", record.warnings);

    let strict = cfg.with_overrides(&["resolution=error".into()]).unwrap();
    let err = harness::run(&strict, None, dir.path()).unwrap_err();
    assert!(matches!(err, NudgingError::Resolution { .. }), "{err}");
}

#[test]
fn lorenz_sweep_writes_one_column_per_offset() {
    let cfg = harness::lookup("fig3", false).unwrap().config.with_overrides(&["T=0.5".into()]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    harness::run(&cfg, None, dir.path()).unwrap();
    let header = fs::read_to_string(dir.path().join("errors.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 1 + 12);
    assert!(header.starts_with("t,err_l2_0,"));
}
