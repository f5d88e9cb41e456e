use qns::config::{load, locate, parse_config, parse_config_bytes, InitialKind, Mode};
use qns::QnsError;

const BASE: &str = "[model]
a = 1.0
kappa = 0.5
nu = 0.2
lambda = 4.0

[frame]
dim = 2
degree = 6

[initial]
kind = \"ground\"
";

fn config_error(text: &str) -> (usize, String, String) {
    match parse_config(text) {
        Err(QnsError::Config {
            line,
            field,
            message,
        }) => (line, field, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn defaults() {
    let c = parse_config(BASE).unwrap();
    assert_eq!(c.seed, 0);
    assert_eq!(c.mode, None);
    assert_eq!(c.initial.kind, InitialKind::Ground);
    assert_eq!(c.solver.picard_tol, 1e-10);
    assert_eq!(c.solver.max_sweeps, 25);
    assert_eq!(c.audit.tol, 1e-6);
    assert_eq!(c.audit.mass_tol, 1e-10);
    assert!(c.time.is_none());
    let p = c.model_params().unwrap();
    assert_eq!((p.r0, p.r1, p.r4, p.delta1), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn unknown_keys_and_types() {
    let (line, field, _) = config_error(&BASE.replace("nu = 0.2", "nu = 0.2\nmu = 1.0"));
    assert_eq!((line, field.as_str()), (5, "mu"));
    let (line, _, _) = config_error(&(BASE.to_string() + "\n[extra]\nx = 1\n"));
    assert_eq!(line, 14);
    let (line, field, _) = config_error(&BASE.replace("degree = 6", "degree = \"six\""));
    assert_eq!(line, 9);
    assert!(field.contains("degree"), "{field}");
    let (line, _, _) = config_error("[model\na = 1");
    assert_eq!(line, 1);
}

#[test]
fn validation_errors_name_fields() {
    let (line, field, _) = config_error(&BASE.replace("nu = 0.2", "nu = 0.0"));
    assert_eq!((line, field.as_str()), (4, "model.nu"));
    let (line, field, _) = config_error(&BASE.replace("dim = 2", "dim = 3"));
    assert_eq!((line, field.as_str()), (8, "frame.dim"));
    let (_, field, _) = config_error(&(BASE.to_string() + "\n[time]\ndt = -1.0\nt_final = 1.0\n"));
    assert_eq!(field, "time.dt");
    let (_, field, _) = config_error(&(BASE.to_string() + "\n[model.extra]\n"));
    assert!(!field.is_empty());
    let e = QnsError::Config {
        line: 3,
        field: "model.a".into(),
        message: "bad".into(),
    };
    assert_eq!(e.to_string(), "config error at line 3, `model.a`: bad");
    let e = QnsError::Config {
        line: 0,
        field: String::new(),
        message: "bad".into(),
    };
    assert_eq!(e.to_string(), "config error: bad");
}

#[test]
fn modes() {
    let c = parse_config(BASE).unwrap();
    assert!(c.check_mode(Mode::Verify, BASE).is_ok());
    assert!(c.check_mode(Mode::Simulate, BASE).is_err());
    let timed = BASE.to_string() + "\n[time]\ndt = 0.01\nt_final = 1.0\n";
    let c = parse_config(&timed).unwrap();
    assert!(c.check_mode(Mode::Simulate, &timed).is_ok());
    assert!(c.check_mode(Mode::Sweep, &timed).is_err());

    let pinned = "mode = \"verify\"\n".to_string() + BASE;
    let c = parse_config(&pinned).unwrap();
    match c.check_mode(Mode::Simulate, &pinned) {
        Err(QnsError::Config { line, field, .. }) => {
            assert_eq!((line, field.as_str()), (1, "mode"))
        }
        other => panic!("{other:?}"),
    }

    let free = BASE.replace("lambda = 4.0\n", "");
    let c = parse_config(&free).unwrap();
    assert!(c.check_mode(Mode::Verify, &free).is_err());
    assert!(c.model_params().is_err());
}

#[test]
fn byte_input() {
    assert!(parse_config_bytes(BASE.as_bytes()).is_ok());
    assert!(parse_config_bytes(&[0xff, 0xfe, 0x00]).is_err());
    assert!(parse_config_bytes(b"").is_err());
}

#[test]
fn locate_lines() {
    assert_eq!(locate(BASE, "model", "nu"), 4);
    assert_eq!(locate(BASE, "frame", "dim"), 8);
    assert_eq!(locate(BASE, "frame", "quad_order"), 7);
    assert_eq!(locate(BASE, "nowhere", "x"), 0);
}

#[test]
fn file_paths_resolve_against_the_config() {
    let d = tempfile::tempdir().unwrap();
    let text = BASE.replace("kind = \"ground\"", "kind = \"file\"\npath = \"init.coef\"");
    let cfg = d.path().join("c.toml");
    std::fs::write(&cfg, &text).unwrap();
    match load(&cfg) {
        Err(QnsError::Config { line, field, .. }) => {
            assert_eq!((line, field.as_str()), (13, "initial.path"))
        }
        other => panic!("{other:?}"),
    }
    std::fs::write(
        d.path().join("init.coef"),
        "qns-coefficients 1\ndim 2\ndegree 0\nfield q\n0 0 1\n",
    )
    .unwrap();
    let l = load(&cfg).unwrap();
    assert_eq!(l.initial_path().unwrap(), d.path().join("init.coef"));
}
