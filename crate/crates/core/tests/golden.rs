use std::path::PathBuf;

use stretchperc::env::{sample_environment, Environment, GapDistribution};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Set `BLESS=1` to rewrite the file after an intentional sampler change.
#[test]
fn polynomial_environment_is_stable() {
    let d = GapDistribution::polynomial(3.0);
    let env = sample_environment(d, d, 0..=99, 0..=99, 42).unwrap();
    let path = golden("env_poly3_seed42.txt");
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, env.to_text()).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(env.to_text(), want);
    let back = Environment::from_text(&want).unwrap();
    assert_eq!(back.xi_x, env.xi_x);
    assert_eq!(back.xi_y, env.xi_y);
}
