use std::path::PathBuf;
use std::process::Command;

fn techdoc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_techdoc"));
    c.env_remove("TECHDOC_FIXTURES");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("techdoc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn generate_writes_one_file_per_language() {
    let out = scratch("gen");
    let status = techdoc()
        .args(["generate", "--plan", "check-oil-level", "--lang", "en,de,fr", "--format", "plain", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for l in ["en", "de", "fr"] {
        let text = std::fs::read_to_string(out.join(format!("check-oil-level.{l}.txt"))).unwrap();
        assert!(text.ends_with(".\n"));
    }
    let en = std::fs::read_to_string(out.join("check-oil-level.en.txt")).unwrap();
    assert!(en.starts_with("Checking the engine oil level\n"));
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn exit_codes() {
    let o = techdoc().args(["generate", "--plan", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown plan `nope`"));
    assert_eq!(techdoc().args(["simulate", "--plan", "nope"]).output().unwrap().status.code(), Some(2));
    assert_eq!(techdoc().arg("validate").output().unwrap().status.code(), Some(0));
    assert_eq!(techdoc().args(["--domain", "aircraft", "validate"]).output().unwrap().status.code(), Some(0));
    let o = techdoc().args(["--fixtures", "/nonexistent", "validate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = techdoc().args(["--domain", "boat", "list-plans"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tell_file_drives_simulation() {
    let dir = scratch("tell");
    std::fs::create_dir_all(&dir).unwrap();
    let tells = dir.join("low.json");
    std::fs::write(&tells, r#"[{"op":"filler","instance":"oil-level-1","role":"level-state","value":"low"}]"#).unwrap();
    let o = techdoc().args(["simulate", "--plan", "check-oil-level", "--tell"]).arg(&tells).output().unwrap();
    assert!(o.status.success());
    let trace: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let add = trace["entries"].as_array().unwrap().iter().find(|e| e["action"] == "add-oil").unwrap();
    assert_eq!(add["status"], "executed");

    let o = techdoc().args(["list-plans", "--device", "car-1"]).output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).lines().any(|l| l == "check-oil-level"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fixture_directory_from_env() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");
    let o = Command::new(env!("CARGO_BIN_EXE_techdoc")).env("TECHDOC_FIXTURES", data).arg("list-plans").output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("check-oil-level"));
}
