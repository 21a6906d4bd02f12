use pais_cli::commands::{cmd_bench_resamplers, cmd_generate_data, cmd_run, cmd_tune};
use pais_cli::config::{parse_str, BenchSpec, ChemicalSpec, SweepSpec};
use pais_cli::{parse_config, ExperimentSpec, TargetSpec};
use pais_core::engine::{KernelSpec, Objective, SamplerKind};
use pais_core::kernels::KernelKind;
use pais_core::resamplers::ResamplerKind;
use pais_core::targets::{full_system_trajectory, ChemicalModel};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn gaussian_spec(m: usize, n: usize, beta: f64) -> ExperimentSpec {
    let target = TargetSpec::Gaussian {
        tau2: 0.01,
        sigma2: 0.01,
        data: 4.0,
    };
    ExperimentSpec::new(target, m, n, KernelSpec::new(KernelKind::RwGaussian, beta))
}

fn write_config(dir: &Path, spec: &ExperimentSpec) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    path
}

fn pais(args: &[&str], seed_env: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pais"));
    cmd.args(args).env_remove("PAIS_SEED");
    if let Some(s) = seed_env {
        cmd.env("PAIS_SEED", s);
    }
    cmd.output().unwrap()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(crate_dir().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}

/// Every key a fully populated spec serializes to must be declared in the
/// published schema at the same place.
#[test]
fn schema_declares_every_field() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(crate_dir().join("config.schema.json")).unwrap(),
    )
    .unwrap();
    let defs = &schema["$defs"];

    fn resolve<'a>(node: &'a Value, defs: &'a Value) -> &'a Value {
        match node.get("$ref").and_then(Value::as_str) {
            Some(r) => &defs[r.trim_start_matches("#/$defs/")],
            None => node,
        }
    }

    fn check(value: &Value, node: &Value, defs: &Value, path: &str) {
        let node = resolve(node, defs);
        if let Some(options) = node.get("oneOf").and_then(Value::as_array) {
            let kind = value.get("kind").cloned().unwrap_or(Value::Null);
            let branch = options
                .iter()
                .find(|o| o["properties"]["kind"]["const"] == kind)
                .unwrap_or_else(|| panic!("{path}: no schema branch for kind {kind}"));
            return check(value, branch, defs, path);
        }
        let Value::Object(map) = value else { return };
        let props = node
            .get("properties")
            .unwrap_or_else(|| panic!("{path}: schema has no properties"));
        assert_eq!(node["additionalProperties"], Value::Bool(false), "{path}");
        for (k, v) in map {
            let child = props
                .get(k)
                .unwrap_or_else(|| panic!("{path}.{k} missing from the schema"));
            check(v, child, defs, &format!("{path}.{k}"));
        }
    }

    let mut spec = gaussian_spec(50, 10, 0.1);
    spec.seed = Some(3);
    spec.sweep = Some(SweepSpec {
        count: 4,
        lo: 1e-3,
        hi: 1.0,
    });
    spec.kernel = spec.kernel.clone().with_scouts(1, 10.0);
    spec.kernel.covariance = Some(vec![vec![1.0]]);
    spec.adaptation.objective = Some(Objective::Acceptance { target: 0.5 });
    check(&serde_json::to_value(&spec).unwrap(), &schema, defs, "");

    spec.target = TargetSpec::Bimodal {
        tau2: 1.0,
        sigma2: 1.0,
        data: 1.0,
    };
    check(&serde_json::to_value(&spec).unwrap(), &schema, defs, "");
    spec.target = TargetSpec::Chemical(ChemicalSpec {
        data: Some(vec![1.0; 10]),
        data_file: Some("d.csv".into()),
        ..ChemicalSpec::default()
    });
    spec.adaptation.objective = Some(Objective::Ess);
    spec.initial = pais_core::engine::InitialSpec::States {
        states: vec![vec![1.0, 1.0]; 50],
    };
    check(&serde_json::to_value(&spec).unwrap(), &schema, defs, "");
}

#[test]
fn missing_config_is_reported() {
    let err = parse_config(Path::new("/nonexistent/config.json")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/config.json"));
}

#[test]
fn schema_errors_exit_nonzero_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let spec = serde_json::to_string(&gaussian_spec(5, 5, 0.1))
        .unwrap()
        .replace("\"beta\":0.1", "\"beta\":-1.0");
    std::fs::write(&path, spec).unwrap();
    let out = pais(&["run", "--config", path.to_str().unwrap()], None);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kernel.beta"), "{stderr}");
}

#[test]
fn fixed_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(20, 30, 0.05);
    spec.seed = Some(9);
    let config = write_config(dir.path(), &spec);
    let mut files = Vec::new();
    for (k, threads) in ["1", "3", "1"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = pais(
            &[
                "run",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--threads",
                threads,
            ],
            None,
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        files.push([
            std::fs::read(out_dir.join("weighted_samples.csv")).unwrap(),
            std::fs::read(out_dir.join("diagnostics.csv")).unwrap(),
        ]);
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);

    let samples = String::from_utf8(files[0][0].clone()).unwrap();
    let mut lines = samples.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!("# config_hash={} seed=9", spec.hash())
    );
    assert_eq!(lines.next().unwrap(), "iter,member,x1,log_w");
    assert_eq!(lines.count(), 20 * 30);
    let diag = String::from_utf8(files[0][1].clone()).unwrap();
    assert_eq!(
        diag.lines().nth(1).unwrap(),
        "iter,ess,var_w,beta,acc_rate,burned_in"
    );

    let summary: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run0/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["l2_error"].as_f64().is_some());
    assert!(summary["wall_time_seconds"].as_f64().is_some());
}

#[test]
fn zero_iterations_write_a_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gaussian_spec(10, 0, 0.05);
    let summaries = cmd_run(&spec, 1, dir.path()).unwrap();
    assert_eq!(summaries[0].l2_error, None);
    let text = std::fs::read_to_string(dir.path().join("weighted_samples.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn repeats_get_their_own_directories_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(10, 5, 0.05);
    spec.repeats = 2;
    let s = cmd_run(&spec, 4, dir.path()).unwrap();
    assert_eq!((s[0].seed, s[1].seed), (4, 5));
    assert!(first_line(&dir.path().join("repeat_1/diagnostics.csv")).ends_with("seed=5"));
}

#[test]
fn seed_precedence_on_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(4, 2, 0.05);
    spec.outputs.samples = false;
    let seed_of = |spec: &ExperimentSpec, flag: Option<&str>, env: Option<&str>| {
        let config = write_config(dir.path(), spec);
        let out_dir = dir.path().join("o");
        let mut args = vec![
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        if let Some(f) = flag {
            args.extend(["--seed".to_string(), f.to_string()]);
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert!(pais(&args, env).status.success());
        first_line(&out_dir.join("diagnostics.csv"))
    };
    assert!(seed_of(&spec, None, None).ends_with("seed=0"));
    assert!(seed_of(&spec, None, Some("6")).ends_with("seed=6"));
    assert!(seed_of(&spec, Some("5"), Some("6")).ends_with("seed=5"));
    spec.seed = Some(2);
    assert!(seed_of(&spec, Some("5"), Some("6")).ends_with("seed=2"));
}

#[test]
fn pais_beats_rwmh_on_the_gaussian_problem() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(50, 20_000, 4.7e-2);
    spec.outputs.samples = false;
    let p = &cmd_run(&spec, 1, &dir.path().join("pais")).unwrap()[0];
    spec.sampler = SamplerKind::Mh;
    spec.kernel.beta = 0.15;
    let m = &cmd_run(&spec, 1, &dir.path().join("mh")).unwrap()[0];
    let (lp, lm) = (p.l2_error.unwrap(), m.l2_error.unwrap());
    assert!(lp < lm, "PAIS {lp} vs RWMH {lm}");
}

#[test]
fn single_point_sweep_returns_that_beta() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(10, 50, 0.3);
    spec.repeats = 2;
    spec.sweep = Some(SweepSpec {
        count: 2,
        lo: 0.03,
        hi: 0.03,
    });
    let t = cmd_tune(&spec, 1, dir.path()).unwrap();
    assert_eq!(t.beta_star, 0.03);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "beta,mean_ess,var_w,acc_rate,l2_error"
    );
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn rwmh_acceptance_falls_with_beta() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(20, 2000, 0.1);
    spec.sampler = SamplerKind::Mh;
    spec.repeats = 2;
    spec.sweep = Some(SweepSpec {
        count: 8,
        lo: 1e-2,
        hi: 2.0,
    });
    let t = cmd_tune(&spec, 3, dir.path()).unwrap();
    let acc: Vec<f64> = t.rows.iter().map(|r| r.acc_rate.unwrap()).collect();
    assert!(acc.windows(2).all(|w| w[1] < w[0]), "{acc:?}");
    assert!(t.beta_star > 7e-2 && t.beta_star < 3e-1, "{}", t.beta_star);
}

#[test]
fn resampler_benchmark_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = gaussian_spec(2, 0, 1.0);
    spec.bench = BenchSpec {
        sizes: vec![64, 256, 512],
        repeats: 200,
    };
    let rows = cmd_bench_resamplers(&spec, 1, dir.path()).unwrap();
    let get =
        |m: usize, k: ResamplerKind| rows.iter().find(|r| r.m == m && r.resampler == k).unwrap();
    for r in &rows {
        if r.resampler != ResamplerKind::Bootstrap {
            assert!(r.moment_errors[0] <= 1e-12, "{r:?}");
        }
    }
    let ratio = get(256, ResamplerKind::Bootstrap).moment_errors[0]
        / get(64, ResamplerKind::Bootstrap).moment_errors[0];
    assert!(ratio > 0.3 && ratio < 0.75, "{ratio}");
    assert!(get(512, ResamplerKind::Amr).seconds < get(512, ResamplerKind::Etpf).seconds);
    let text = std::fs::read_to_string(dir.path().join("resampler_bench.csv")).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "m,resampler,err_m1,err_m2,err_m3,seconds"
    );
    assert_eq!(text.lines().count(), 2 + 9);
}

#[test]
fn chemical_data_generation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_str(
        r#"{"target": {"kind": "chemical"}, "ensemble_size": 10, "iterations": 0,
            "kernel": {"kind": "gamma_mean_centered", "beta": 1.0}}"#,
    )
    .unwrap();
    let (path, noisy) = cmd_generate_data(&spec, 7, true, dir.path()).unwrap();
    assert_eq!(noisy.len(), 10);
    assert!(noisy.iter().all(|d| *d > 0.0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "t,D");
    assert_eq!(text.lines().count(), 12);
    let (_, again) = cmd_generate_data(&spec, 7, true, &dir.path().join("b")).unwrap();
    assert_eq!(noisy, again);

    let (_, clean) = cmd_generate_data(&spec, 7, false, dir.path()).unwrap();
    let exact = full_system_trajectory([100.0, 50.0, 100.0, 1.0], &ChemicalModel::standard_times())
        .unwrap();
    for (d, (x1, x2)) in clean.iter().zip(exact) {
        assert_eq!(*d, x1 + x2);
    }

    // The written file feeds back in as the target's data.
    let mut spec = spec;
    if let TargetSpec::Chemical(c) = &mut spec.target {
        c.data_file = Some(path);
    }
    let target = spec.target.build().unwrap();
    assert_eq!(target.dim(), 2);
}

#[test]
fn generate_data_from_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let config = crate_dir().join("configs/gaussian_pais.json");
    let run = |extra: &[&str]| {
        let mut args = vec![
            "generate-data",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        assert!(pais(&args, None).status.success());
        std::fs::read_to_string(dir.path().join("data.csv")).unwrap()
    };
    let noisy = run(&[]);
    assert_eq!(noisy.lines().nth(1).unwrap(), "D");
    assert_eq!(noisy, run(&[]));
    let clean = run(&["--zero-noise"]);
    assert_eq!(clean.lines().nth(2).unwrap(), "4");
}
