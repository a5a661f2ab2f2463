use super::*;

const BASE: &str = r#"
[grid]
dimension = 2
modes = 8

[equation]
variant = "allen_cahn"

[noise]
modes = 2
"#;

fn parse(extra: &str) -> Result<RunConfig, CliError> {
    RunConfig::from_toml(&format!("{BASE}{extra}"))
}

#[test]
fn defaults_fill_in() {
    let c = parse("").unwrap();
    assert_eq!(c.seed, 0);
    assert_eq!(c.conditions.eta, 1e-3);
    assert_eq!(c.simulate.paths, 1);
    let (spec, u0) = c.build().unwrap();
    assert_eq!(spec.variant(), crate::operators::Variant::AllenCahn);
    assert_eq!(spec.triple().h_norm_sq(&u0), 0.0);
}

#[test]
fn unknown_fields_are_config_errors() {
    let e = parse("[solver]\nstep = 0.1\n").unwrap_err();
    assert_eq!(e.exit_code(), EXIT_CONFIG);
    assert!(e.to_string().contains("step"), "{e}");
    assert!(parse("[experiment]\nkind = \"bogus\"\npaths = 1\n").is_err());
}

#[test]
fn noise_weights_are_checked() {
    let both = RunConfig::from_toml(&BASE.replace("modes = 2\n", "modes = 2\ngamma = [1.0, 0.0]\ngamma_norm_sq = 1.0\n")).unwrap();
    assert!(matches!(both.build(), Err(CliError::Config(_))));
    let short = RunConfig::from_toml(&BASE.replace("modes = 2\n", "modes = 2\ngamma = [1.0]\n")).unwrap();
    assert!(matches!(short.build(), Err(CliError::Config(m)) if m.contains("gamma")));
    let bad_transport = RunConfig::from_toml(&BASE.replace("modes = 2\n", "modes = 2\ntransport = [[1.0]]\n")).unwrap();
    assert!(bad_transport.build().is_err());
}

#[test]
fn invalid_solver_is_config_error() {
    let c = parse("[solver]\ndt = -1.0\n").unwrap();
    assert!(matches!(c.build(), Err(CliError::Config(m)) if m.starts_with("solver")));
}

#[test]
fn ns_initial_state_is_solenoidal() {
    let text = r#"
[grid]
dimension = 3
modes = 8

[equation]
variant = "tamed_ns"
taming_level = 1.0

[noise]
modes = 1

[initial]
terms = [{ component = 0, wavevector = [1, 0, 0], cos = 1.0 }]
random = { seed = 1, cutoff = 2, amplitude = 1.0 }
"#;
    let (_, u0) = RunConfig::from_toml(text).unwrap().build().unwrap();
    let div = crate::spaces::divergence(&u0).unwrap();
    assert!(crate::spaces::sobolev_norm(&div, 0.0) < 1e-12);
}

#[test]
fn error_kinds_map_to_exit_codes() {
    assert_eq!(CliError::from(VerifyError::Precondition("x".into())).exit_code(), EXIT_PRECONDITION);
    assert_eq!(CliError::from(VerifyError::Invalid("x".into())).exit_code(), EXIT_CONFIG);
    assert_eq!(CliError::Runtime("x".into()).exit_code(), EXIT_FAIL);
    assert_eq!(CliError::Io("x".into()).exit_code(), EXIT_CONFIG);
}

#[test]
fn shipped_configs_build() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&p).unwrap();
            let cfg = RunConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            cfg.build().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 15, "{n} configs");
    assert!(RunConfig::from_toml(&std::fs::read_to_string(dir.join("invalid/missing_noise.toml")).unwrap()).is_err());
}

#[test]
fn config_hash_is_sha256() {
    assert_eq!(config_hash(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
