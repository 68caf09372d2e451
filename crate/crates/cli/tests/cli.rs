use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bidb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bidb"))
        .args(args)
        .env_remove("BIDB_SPILL_DIR")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_matches_golden_gfa_in_every_mode() {
    let d = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(fixture("fig2.gfa")).unwrap();
    let fa = fixture("fig2.fa");
    for mode in ["memory", "parallel", "external"] {
        let out = d.path().join(format!("{mode}.gfa"));
        let rep = d.path().join(format!("{mode}.csv"));
        let o = bidb(&[
            "build", "-k", "3", "--mode", mode, "-p", "3", "--mem", "4K", "--block", "256",
            "--spill-dir", s(d.path()), s(&fa), "-o", s(&out), "--report", s(&rep),
        ]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), golden, "{mode}");
        assert!(std::fs::read_to_string(&rep).unwrap().lines().count() >= 2);
    }
}

#[test]
fn even_k_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("x.gfa");
    let o = bidb(&["build", "-k", "4", s(&fixture("fig2.fa")), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd"));
}

#[test]
fn missing_input_is_a_data_error() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("x.gfa");
    let o = bidb(&["build", "-k", "3", s(&d.path().join("nope.fa")), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.fa"));
}

#[test]
fn output_may_not_overwrite_input() {
    let fa = fixture("fig2.fa");
    let o = bidb(&["build", "-k", "3", s(&fa), "-o", s(&fa)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_ja_flags_the_spurious_edge() {
    let o = bidb(&["compare-ja", "-k", "3", "-p", "2", s(&fixture("spurious.fa"))]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("mode,p,n_symbols,n_k1mers,messages_sent,spurious_edges")
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows[0][0], "par");
    assert_eq!(rows[0][5], "0");
    assert_eq!(rows[1][0], "ja");
    assert!(rows[1][5].parse::<u64>().unwrap() >= 1);
}

#[test]
fn simplify_and_stats_from_a_native_graph() {
    let d = tempfile::tempdir().unwrap();
    let fa = d.path().join("r.fa");
    std::fs::write(&fa, ">r\nACGGTAGC\n").unwrap();
    let graph = d.path().join("g.bdbg");
    let gfa = d.path().join("g.gfa");
    let o = bidb(&["build", "-k", "5", s(&fa), "-o", s(&gfa), "--graph-out", s(&graph)]);
    assert!(o.status.success());
    let mut outputs = Vec::new();
    for mode in ["memory", "parallel", "external"] {
        let out = d.path().join(format!("s-{mode}.gfa"));
        let o = bidb(&[
            "simplify", "--mode", mode, "--spill-dir", s(d.path()), s(&graph), "-o", s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let segs: Vec<&str> = outputs[0].lines().filter(|l| l.starts_with("S\t")).collect();
    assert_eq!(segs.len(), 1);
    assert!(segs[0].contains("LN:i:8\tMC:i:4"), "{}", segs[0]);

    for g in [&graph, &gfa] {
        let o = bidb(&["stats", s(g)]);
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.contains("nodes\t4"), "{text}");
    }
}

#[test]
fn clean_spill_reports_count() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bidb-spill-abc"), b"x").unwrap();
    std::fs::write(d.path().join("keep.txt"), b"x").unwrap();
    let o = bidb(&["clean-spill", "--spill-dir", s(d.path())]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("removed 1"));
    assert!(d.path().join("keep.txt").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let d = tempfile::tempdir().unwrap();
    let fa = fixture("fig2.fa");
    let mut seen = Vec::new();
    for p in ["1", "2", "8"] {
        let out = d.path().join(format!("p{p}.gfa"));
        let o = bidb(&["build", "-k", "3", "--mode", "parallel", "-p", p, s(&fa), "-o", s(&out)]);
        assert!(o.status.success());
        seen.push(std::fs::read(&out).unwrap());
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}
