use tavis::steady::FramePolicy;
use tavis::sweeps::{Grid, Spacing, SweepMode, Truncation};
use tavis_cli::config::*;
use tavis_cli::{parse_config, CliError};

#[test]
fn empty_document_gives_reference_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.mode, Mode::Spectrum);
    let p = cfg.params.system();
    assert_eq!((p.omega_c, p.omega_e, p.gamma_c, p.gamma_e, p.g_col), (1.0, 1.0, 0.03, 0.0003, 0.03));
    assert_eq!(p.gamma_c_rad, p.gamma_c);
    assert_eq!(cfg.n, vec![1]);
    let spec = cfg.sweep_spec();
    assert_eq!(spec.mode, SweepMode::Spectrum);
    assert_eq!(spec.grid.spacing, Spacing::Lin);
    assert_eq!(spec.frame, FramePolicy::Auto { threshold: 4.0 });
}

#[test]
fn negative_rate_is_named() {
    let err = parse_config("[params]\ngamma_e = -1\n").unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert!(err.to_string().contains("gamma_e"), "{err}");
    let err = parse_config("[params]\ng_col = -0.5\n").unwrap_err();
    assert!(err.to_string().contains("g_col"), "{err}");
}

#[test]
fn unknown_keys_are_rejected_with_their_name() {
    for (doc, key) in [("speed = 3", "speed"), ("[params]\ngama_e = 0.1", "gama_e"), ("[grid]\nstart = 1\nstop = 2\ncount = 3\nspacing = \"log\"\nstep = 1", "step")] {
        let err = parse_config(doc).unwrap_err().to_string();
        assert!(err.contains(key), "{err}");
    }
}

#[test]
fn parse_errors_carry_line_context() {
    let err = parse_config("mode = \"spectrum\"\n[params\n").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn full_document_round_trips() {
    let doc = r#"
mode = "diagonals"
n = [1, 2, 3]
residual_tol = 1e-11
include_classical = false
threads = 4
solver = "krylov"

[params]
gamma_e = 0.0015
g_col = 0.06
gamma_c_rad = 0.02
drive_over_gcol = 1.5

[grid]
start = 1e-3
stop = 10.0
count = 60
spacing = "log"

[truncation]
nmax = 24
tail_tol = 1e-9
cap = 60

[frame]
kind = "lab"
threshold = 2.0

[table]
scan = "g_col"
values = [0.06, 0.03]

[output]
csv = "out/fig.csv"
"#;
    let cfg = parse_config(doc).unwrap();
    assert_eq!(cfg.truncation.truncation(), Truncation::Fixed { n_max: 24 });
    assert_eq!(cfg.grid, Some(Grid::log(1e-3, 10.0, 60)));
    assert_eq!(cfg.frame.policy(), FramePolicy::Lab);
    assert!((cfg.params.system().omega_drive_amp - 0.09).abs() < 1e-15);
    let again = parse_config(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
    let default_again = parse_config(&RunConfig::default().to_toml()).unwrap();
    assert_eq!(default_again, RunConfig::default());
}

#[test]
fn nmax_accepts_auto_and_integers_only() {
    assert_eq!(parse_config("[truncation]\nnmax = \"auto\"").unwrap().truncation.nmax, Nmax::Auto);
    assert_eq!(parse_config("[truncation]\nnmax = 7").unwrap().truncation.nmax, Nmax::Fixed(7));
    assert!(parse_config("[truncation]\nnmax = -3").is_err());
    assert!(parse_config("[truncation]\nnmax = \"many\"").is_err());
    assert_eq!("AUTO".parse::<Nmax>().unwrap(), Nmax::Auto);
}

#[test]
fn invalid_values_are_config_errors() {
    for doc in [
        "n = []",
        "n = [0]",
        "residual_tol = 0.0",
        "threads = 0",
        "[params]\ngamma_c = 0.0",
        "[params]\ngamma_c_rad = 0.5",
        "[grid]\nstart = 0\nstop = 1\ncount = 3\nspacing = \"log\"",
        "mode = \"critical_table\"\n[table]\nvalues = []",
        "mode = \"critical_table\"\n[table]\nvalues = [-1.0]",
    ] {
        assert!(matches!(parse_config(doc), Err(CliError::Config(_))), "{doc}");
    }
}

#[test]
fn overrides_patch_nested_keys() {
    let text = apply_overrides("[params]\ngamma_e = 0.001\n", &["params.g_col=0.06".into(), "frame.kind=lab".into(), "n=[2,3]".into()]).unwrap();
    let cfg = parse_config(&text).unwrap();
    assert_eq!(cfg.params.g_col, 0.06);
    assert_eq!(cfg.params.gamma_e, 0.001);
    assert_eq!(cfg.frame.kind, FrameKind::Lab);
    assert_eq!(cfg.n, vec![2, 3]);
    assert!(matches!(apply_overrides("", &["novalue".into()]), Err(CliError::Usage(_))));
    assert!(parse_config(&apply_overrides("", &["params.bogus=1".into()]).unwrap()).is_err());
}

#[test]
fn table_options_follow_the_grid() {
    let cfg = parse_config("mode = \"critical_table\"").unwrap();
    assert_eq!(cfg.table_options().sweep_grid, None);
    let cfg = parse_config("mode = \"critical_table\"\n[grid]\nstart = 1e-3\nstop = 10\ncount = 30\nspacing = \"log\"").unwrap();
    assert_eq!(cfg.table_options().sweep_grid, Some(Grid::log(1e-3, 10.0, 30)));
    assert_eq!(cfg.scan().name(), "gamma_e");
}

#[test]
fn shipped_figure_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.sweep_spec().validate().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 8);
}
