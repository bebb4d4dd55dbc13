//! Compiles a C program against the generated header and the static
//! library, then drives it end to end.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_scores() {
    let staticlib = artifact_dir().join("libcybersick_ffi.a");
    if !have_cc() || !staticlib.exists() {
        eprintln!("skipping: no C compiler or {} missing", staticlib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("client");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c_client.c"))
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "cc failed: {}", String::from_utf8_lossy(&out.stderr));

    let sessions = common::corpus();
    let model = dir.path().join("model.txt");
    std::fs::write(&model, common::model_text(&sessions)).unwrap();
    let messages = dir.path().join("messages.jsonl");
    let lines = common::session_lines(&sessions[1], 30);
    std::fs::write(&messages, lines.join("\n") + "\n").unwrap();

    let run = Command::new(&exe).arg(&model).arg(&messages).output().unwrap();
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(run.status.success(), "client exited {:?}: {}", run.status, String::from_utf8_lossy(&run.stderr));
    let mut it = stdout.lines();
    assert_eq!(it.next(), Some("classes 2"));
    assert_eq!(it.next(), Some("attribute17 timestamp"));
    let predict: Vec<&str> = it.next().unwrap().split(' ').collect();
    assert_eq!(predict[..2], ["predict", "0"]);
    assert!(predict[2] == "0" || predict[2] == "1");
    assert!((predict[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    let replies: Vec<Value> = it.by_ref().take(lines.len()).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies.len(), 32);
    assert!(replies.iter().all(|r| r["ok"] == true), "{replies:?}");
    assert_eq!(replies[31]["frames_seen"], 30);
    assert_eq!(it.next(), Some("bad 4 null"));
    assert!(it.next().unwrap().starts_with("error model file line 1"));
}
