//! End-to-end checks of the command-line surface: formats, exit codes,
//! flags and the environment seed override.

use std::path::PathBuf;
use std::process::{Command, Output};

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
        write("path.json", r#"{"maximal_simplices": [[0,1],[1,2]]}"#);
        write("two_tris.json", r#"{"maximal_simplices": [[0,1,2],[1,2,3]]}"#);
        write("square.csv", "0.0,0.0\n1.0,0.0\n0.0,1.0\n1.0,1.0\n");
        write("x.json", r#"{"degree": 0, "values": [[0.5],[1.0],[-0.25],[2.0]]}"#);
        write("g.json", r#"{"degree": 2, "values": [[1.0],[-1.0]]}"#);
        write(
            "config.json",
            r#"{"lr": 0.001, "momentum": 0.9, "max_iter": 100, "tol": 0.0, "seed": 3}"#,
        );
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_cochain"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .expect("spawn cochain")
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn dec_emits_the_path_graph_laplacian() {
    let fx = Fixture::new();
    let out = fx.run(&["dec", "--input", "path.json", "--op", "hodge", "--k", "0", "--output", "l0.txt"]);
    assert_exit(&out, 0);
    let text = fx.read("l0.txt");
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "3 3 7");
    let parse_entry = |line: &str| {
        let mut it = line.split_whitespace();
        let r: usize = it.next().unwrap().parse().unwrap();
        let c: usize = it.next().unwrap().parse().unwrap();
        let v: f64 = it.next().unwrap().parse().unwrap();
        (r, c, v)
    };
    let entries: Vec<(usize, usize, f64)> = lines.map(parse_entry).collect();
    let expected = [
        (0, 0, 1.0),
        (0, 1, -1.0),
        (1, 0, -1.0),
        (1, 1, 2.0),
        (1, 2, -1.0),
        (2, 1, -1.0),
        (2, 2, 1.0),
    ];
    assert_eq!(entries, expected);
    assert!(fx.path("l0.txt.manifest.json").exists());
}

#[test]
fn paper_sign_negates_the_graph_laplacian() {
    let fx = Fixture::new();
    assert_exit(
        &fx.run(&["dec", "--input", "path.json", "--op", "graph-laplacian", "--output", "dma.txt"]),
        0,
    );
    assert_exit(
        &fx.run(&[
            "dec", "--input", "path.json", "--op", "graph-laplacian", "--paper-sign", "--output",
            "amd.txt",
        ]),
        0,
    );
    let parse = |text: &str| -> Vec<f64> {
        text.lines()
            .skip(1)
            .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
            .collect()
    };
    let dma = parse(&fx.read("dma.txt"));
    let amd = parse(&fx.read("amd.txt"));
    assert_eq!(dma.len(), amd.len());
    for (a, b) in dma.iter().zip(&amd) {
        assert_eq!(*a, -b);
    }
}

#[test]
fn dec_degree_out_of_range_exits_3() {
    let fx = Fixture::new();
    let out = fx.run(&["dec", "--input", "path.json", "--op", "hodge", "--k", "5", "--output", "bad.txt"]);
    assert_exit(&out, 3);
}

#[test]
fn dec_parse_failure_exits_2() {
    let fx = Fixture::new();
    std::fs::write(fx.path("broken.json"), "{not json").unwrap();
    let out = fx.run(&["dec", "--input", "broken.json", "--op", "hodge", "--k", "0", "--output", "bad.txt"]);
    assert_exit(&out, 2);
}

#[test]
fn dec_reads_off_meshes() {
    let fx = Fixture::new();
    std::fs::write(
        fx.path("mesh.off"),
        "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n",
    )
    .unwrap();
    let out = fx.run(&["dec", "--input", "mesh.off", "--op", "boundary", "--k", "2", "--output", "d2.txt"]);
    assert_exit(&out, 0);
    assert!(fx.read("d2.txt").starts_with("5 2 6"));
}

#[test]
fn ph_square_and_radius_zero() {
    let fx = Fixture::new();
    assert_exit(&fx.run(&["ph", "--input", "square.csv", "--output", "dgm.csv"]), 0);
    let text = fx.read("dgm.csv");
    assert!(text.starts_with("degree,birth,death\n"));
    let h1: Vec<&str> = text.lines().filter(|l| l.starts_with("1,")).collect();
    assert_eq!(h1.len(), 1);
    let death: f64 = h1[0].split(',').nth(2).unwrap().parse().unwrap();
    assert!((death - 2f64.sqrt()).abs() < 1e-12);

    assert_exit(
        &fx.run(&["ph", "--input", "square.csv", "--max-radius", "0", "--output", "dgm0.csv"]),
        0,
    );
    let text = fx.read("dgm0.csv");
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let mut parts = row.split(',');
        assert_eq!(parts.next(), Some("0"));
        let birth: f64 = parts.next().unwrap().parse().unwrap();
        assert_eq!(birth, 0.0);
        assert_eq!(parts.next(), Some("inf"));
    }
}

#[test]
fn ph_single_point() {
    let fx = Fixture::new();
    std::fs::write(fx.path("one.csv"), "0.5,0.5\n").unwrap();
    assert_exit(&fx.run(&["ph", "--input", "one.csv", "--output", "one.csv.out"]), 0);
    let text = fx.read("one.csv.out");
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows, vec!["0,0.0000000000000000e0,inf"]);
}

#[test]
fn ph_max_dim_exits_3() {
    let fx = Fixture::new();
    let out = fx.run(&["ph", "--input", "square.csv", "--max-dim", "3", "--output", "bad.csv"]);
    assert_exit(&out, 3);
}

#[test]
fn embed_dim_zero_exits_2() {
    let fx = Fixture::new();
    let out = fx.run(&["embed", "--input", "square.csv", "--method", "mds", "--dim", "0", "--output", "bad.csv"]);
    assert_exit(&out, 2);
}

#[test]
fn embed_same_seed_is_identical() {
    let fx = Fixture::new();
    for name in ["a.csv", "b.csv"] {
        assert_exit(
            &fx.run(&[
                "embed", "--input", "square.csv", "--method", "mds", "--dim", "2", "--config",
                "config.json", "--output", name,
            ]),
            0,
        );
    }
    assert_eq!(fx.read("a.csv"), fx.read("b.csv"));
    assert_eq!(fx.read("a.loss.csv"), fx.read("b.loss.csv"));
}

#[test]
fn cochain_seed_env_overrides_config() {
    let fx = Fixture::new();
    let out = Command::new(env!("CARGO_BIN_EXE_cochain"))
        .args([
            "embed", "--input", "square.csv", "--method", "mds", "--dim", "2", "--config",
            "config.json", "--output", "env.csv",
        ])
        .env("COCHAIN_SEED", "42")
        .current_dir(fx.dir.path())
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let meta = fx.read("env.meta.json");
    assert!(meta.contains("\"seed\": 42"), "{meta}");
}

#[test]
fn train_flagship_expression_has_constant_loss() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "train", "--complex", "two_tris.json", "--cochain", "x=x.json", "--cochain", "g=g.json",
        "--expr", "d1(TN[d0](x)) = L2(g)", "--phi", "identity", "--config", "config.json",
        "--output", "w.json",
    ]);
    assert_exit(&out, 0);
    let losses: Vec<f64> = fx
        .read("w.loss.csv")
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 101);
    // |L2(g)|^2 with L2 = [[3,1],[1,3]] and g = (1,-1)
    for loss in losses {
        assert!((loss - 8.0).abs() < 1e-12);
    }
}

#[test]
fn train_identity_layer_reaches_least_squares() {
    let fx = Fixture::new();
    std::fs::write(
        fx.path("xs.json"),
        r#"{"degree": 0, "values": [[0.5],[1.0],[-0.25],[2.0]]}"#,
    )
    .unwrap();
    std::fs::write(
        fx.path("gs.json"),
        r#"{"degree": 0, "values": [[1.0],[2.0],[-0.5],[4.0]]}"#,
    )
    .unwrap();
    std::fs::write(
        fx.path("ls.json"),
        r#"{"lr": 0.05, "momentum": 0.0, "max_iter": 4000, "tol": 0.0, "seed": 5}"#,
    )
    .unwrap();
    let out = fx.run(&[
        "train", "--complex", "two_tris.json", "--cochain", "x=xs.json", "--cochain", "g=gs.json",
        "--expr", "TN[I](x) = g", "--phi", "identity", "--config", "ls.json", "--output",
        "lsq.json",
    ]);
    assert_exit(&out, 0);
    let weights: serde_json::Value = serde_json::from_str(&fx.read("lsq.json")).unwrap();
    let w = weights["weights"][0][0][0].as_f64().unwrap();
    // g = 2x exactly, so the least-squares weight is 2
    assert!((w - 2.0).abs() < 1e-6, "weight {w}");
}

#[test]
fn train_malformed_expression_exits_5() {
    let fx = Fixture::new();
    for expr in ["d1(TN[d0]", "frob(x)", "TN[L0](x) = TN[I](g)"] {
        let out = fx.run(&[
            "train", "--complex", "two_tris.json", "--cochain", "x=x.json", "--cochain",
            "g=g.json", "--expr", expr, "--output", "bad.json",
        ]);
        assert_exit(&out, 5);
    }
}

#[test]
fn train_degree_mismatch_exits_5_and_names_the_link() {
    let fx = Fixture::new();
    // x has degree 0 but L1 wants degree 1
    let out = fx.run(&[
        "train", "--complex", "two_tris.json", "--cochain", "x=x.json", "--expr", "TN[L1](x)",
        "--output", "bad.json",
    ]);
    assert_exit(&out, 5);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("degree"), "stderr: {stderr}");
}

#[test]
fn rerun_missing_manifest_exits_2() {
    let fx = Fixture::new();
    let out = fx.run(&["rerun", "absent.manifest.json"]);
    assert_exit(&out, 2);
}
