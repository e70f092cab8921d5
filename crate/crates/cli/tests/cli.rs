use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// An address nothing listens on, so a stray request fails fast and stays local.
const DEAD_API: &str = "http://127.0.0.1:9";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dendeg"));
    c.env_remove("DENDEG_CACHE_DIR").env("DENDEG_LMFDB_URL", DEAD_API);
    c
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child =
        bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn genus2(point: bool, cubic: bool) -> Value {
    json!({ "facts": {
        "genus": 2,
        "index": { "value": 1, "provenance": "asserted", "source": "test" },
        "has_k_point": { "value": point, "provenance": "asserted", "source": "test" },
        "has_degree3_point": { "value": cubic, "provenance": "asserted", "source": "test" }
    }})
}

#[test]
fn product_cell_from_stdin() {
    let req = json!({ "c": genus2(true, true), "d": genus2(true, true) }).to_string();
    let o = run(&["delta", "product", "--window", "30", "--json"], &req);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert_eq!(v["summary"]["lower"], "4, 6, 8..=10, 12..=30");
    assert_eq!(v["op"], "product");
    let text = run(&["delta", "product", "--window", "30"], &req);
    assert!(String::from_utf8_lossy(&text.stdout).contains("gg-genus2-cells"));
}

#[test]
fn exit_codes() {
    let o = run(&["delta", "curve"], r#"{"c": {"facts": {"genus": 2}}}"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("needs-fact"));
    assert_eq!(run(&["delta", "curve"], r#"{"c": "#).status.code(), Some(1));
    assert_eq!(run(&["delta", "curve", "--json"], r#"{"op": "product", "c": {}}"#).status.code(), Some(1));
    assert_eq!(run(&["delta", "curve"], r#"{"c": {"fixture": "no-such-curve"}}"#).status.code(), Some(1));
    let o = run(&["delta", "curve", "--json"], r#"{"c": {"facts": {"genus": 2}}}"#);
    assert_eq!(json_out(&o)["error"], "needs-fact");
}

#[test]
fn reports_are_byte_identical() {
    let req = json!({ "c": { "fixture": "249.a.6723.1" }, "d": { "fixture": "256.a.512.1" } }).to_string();
    let a = run(&["delta", "product", "--json"], &req);
    let b = run(&["delta", "product", "--json"], &req);
    let c = run(&["delta", "product", "--json", "--sequential"], &req);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn assumptions_from_flags() {
    let req = json!({ "c": { "fixture": "3872.f4" }, "d": { "fixture": "16928.c1" } }).to_string();
    let plain = json_out(&run(&["delta", "product", "--json", "--window", "10"], &req));
    let parity =
        json_out(&run(&["delta", "product", "--json", "--window", "10", "--assume", "ParityConjecture"], &req));
    assert_eq!(plain["summary"]["lower"], "3..=10");
    assert_eq!(parity["summary"]["lower"], "2..=10");
    assert_eq!(parity["result"]["assumptions"], json!(["ParityConjecture"]));
    assert_eq!(run(&["delta", "product", "--assume", "Nonsense"], &req).status.code(), Some(1));
}

#[test]
fn batch_reports_worst_code() {
    let reqs = json!([
        { "op": "curve", "c": genus2(true, false) },
        { "op": "curve", "c": { "facts": { "genus": 2 } } }
    ]);
    let o = run(&["batch", "--json"], &reqs.to_string());
    assert_eq!(o.status.code(), Some(2));
    let v = json_out(&o);
    assert_eq!(v[0]["ok"]["summary"]["lower"], "2, 4..=200");
    assert_eq!(v[1]["error"], "needs-fact");
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn local_pairs_and_certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (c, d) in [("remark-index2-C", "remark-index2-D"), ("remark-index4-C", "remark-index4-D")] {
        let cf = write(dir.path(), "c.json", &json!({ "model_of": c }));
        let df = write(dir.path(), "d.json", &json!({ "model_of": d }));
        let o = run(&["local", &cf, "--p", "3", "--pair", &df, "--json"], "");
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v = json_out(&o);
        assert_eq!(v["obstruction"], "obstructed");
        let cert = write(dir.path(), "cert.json", &v);
        assert_eq!(run(&["verify-certificate", &cert], "").status.code(), Some(0));
        let mut tampered = v["certificate"].clone();
        tampered["conclusion"] = json!("not-obstructed");
        let bad = write(dir.path(), "bad.json", &tampered);
        assert_eq!(run(&["verify-certificate", &bad], "").status.code(), Some(1));
    }
}

#[test]
fn degree_divisibility_from_stdin() {
    let o = run(&["local", "--p", "3", "--dmax", "2", "--json"], r#"{"f": [3, 0, -3, 0, 0, 0, 3]}"#);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["degrees"], json!({ "1": "impossible", "2": "possible" }));
    let mut flipped = v["certificate"].clone();
    flipped["degrees"][0]["status"] = json!("possible");
    assert_eq!(run(&["verify-certificate"], &flipped.to_string()).status.code(), Some(1));
}

#[test]
fn parity_twist_by_label_and_ainvs() {
    let o = run(&["parity-twist", "--e1", "3872.f4", "--e2", "[0,0,0,-92,0]", "--json"], "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert_eq!(v["d"], -7);
    assert_eq!(v["root_numbers"], json!([-1, -1]));
}

#[test]
fn certify_quadratic_and_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let fact = json!({ "value": true, "provenance": "asserted", "source": "test" });
    let i = json!({ "x": { "a": "0", "b": "1" }, "y": { "a": "0", "b": "0" } });
    let mut input = json!({
        "c": { "model_of": "quad-C" },
        "d": { "model_of": "quad-D" },
        "assertions": { "field": -1, "point_c": i, "point_d": i, "c_jacobian_rank_zero": fact, "d_jacobian_rank_zero": fact }
    });
    let f = write(dir.path(), "q.json", &input);
    let o = run(&["certify", "quadratic", &f, "--json"], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["verified"], true);
    input["assertions"]["point_c"]["x"]["a"] = json!("1");
    let f = write(dir.path(), "q2.json", &input);
    let o = run(&["certify", "quadratic", &f], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] (iv) point on C over K"));
    input["assertions"]["c_jacobian_rank_zero"] = Value::Null;
    let f = write(dir.path(), "q3.json", &input);
    assert_eq!(run(&["certify", "quadratic", &f], "").status.code(), Some(2));
}

#[test]
fn selftest_and_roster() {
    let o = run(&["selftest"], "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = json_out(&run(&["roster", "--json"], ""));
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    let mut unique = ids.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(ids.len(), unique.len());
    assert!(ids.contains(&"gg-genus2-cells"));
}

fn cache_entry(dir: &Path, label: &str, curve: &Value) {
    let key = hex::encode(Sha256::digest(label.as_bytes()));
    let sha = hex::encode(Sha256::digest(serde_json::to_string(curve).unwrap().as_bytes()));
    std::fs::create_dir_all(dir.join("v1")).unwrap();
    let entry = json!({ "label": label, "sha256": sha, "curve": curve });
    std::fs::write(dir.join("v1").join(format!("{key}.json")), entry.to_string()).unwrap();
}

#[test]
fn fetch_offline_paths() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["fetch", "65.a1", "--cache-dir", d, "--json"], "");
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["source"], "embedded fixture");
    assert_eq!(v["curve"]["elliptic"]["ainvs"], json!([1, 0, 0, -1, 0]));

    let o = run(&["fetch", "37.a1", "--cache-dir", d], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--online"));

    let curve = json!({ "label": "37.a1", "elliptic": { "ainvs": [0, 0, 1, -1, 0] } });
    cache_entry(dir.path(), "37.a1", &curve);
    let o = run(&["fetch", "37.a1", "--cache-dir", d, "--online", "--json"], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o), json!({ "source": "cache", "curve": curve }));

    let o = bin().args(["fetch", "37.a1", "--json"]).env("DENDEG_CACHE_DIR", d).output().unwrap();
    assert_eq!(json_out(&o)["source"], "cache");

    // Network failure falls back to the embedded data, then to an error.
    let o = run(&["fetch", "14.a5", "--cache-dir", d, "--online", "--json"], "");
    assert_eq!(json_out(&o)["source"], "embedded fixture");
    let o = run(&["fetch", "43.a1", "--cache-dir", d, "--online"], "");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["fetch", "../x", "--cache-dir", d], "").status.code(), Some(1));
}

#[test]
fn tampered_cache_entry_is_refused_offline() {
    let dir = tempfile::tempdir().unwrap();
    let curve = json!({ "label": "37.a1", "elliptic": { "ainvs": [0, 0, 1, -1, 0] } });
    cache_entry(dir.path(), "37.a1", &curve);
    let key = hex::encode(Sha256::digest(b"37.a1"));
    let path = dir.path().join("v1").join(format!("{key}.json"));
    let text = std::fs::read_to_string(&path).unwrap().replace("-1", "-2");
    std::fs::write(&path, text).unwrap();
    let o = run(&["fetch", "37.a1", "--cache-dir", dir.path().to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum"));
}

/// Serve canned LMFDB responses on a loopback port.
fn mock_lmfdb(body: Value) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut s) = stream else { continue };
            let mut buf = Vec::new();
            let mut chunk = [0u8; 1024];
            while !buf.windows(4).any(|w| w == b"\r\n\r\n") {
                match s.read(&mut chunk) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => buf.extend_from_slice(&chunk[..n]),
                }
            }
            counter.fetch_add(1, Ordering::SeqCst);
            let payload = body.to_string();
            let resp = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
            let _ = s.write_all(resp.as_bytes());
        }
    });
    (format!("http://{addr}"), hits)
}

#[test]
fn online_fetch_normalizes_and_caches_under_concurrency() {
    let (base, hits) = mock_lmfdb(json!({ "data": [{ "ainvs": [0, 0, 1, -1, 0] }] }));
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let children: Vec<_> = (0..4)
        .map(|_| {
            bin()
                .args(["fetch", "37.a1", "--online", "--json", "--cache-dir", d, "--api-base", &base])
                .stdout(Stdio::piped())
                .spawn()
                .unwrap()
        })
        .collect();
    let outs: Vec<Value> = children.into_iter().map(|c| json_out(&c.wait_with_output().unwrap())).collect();
    let want = json!({ "label": "37.a1", "elliptic": { "ainvs": [0, 0, 1, -1, 0] } });
    for o in &outs {
        assert_eq!(o["curve"], want);
    }
    assert!(hits.load(Ordering::SeqCst) >= 1);
    let entries: Vec<_> = std::fs::read_dir(dir.path().join("v1")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    let before = hits.load(Ordering::SeqCst);
    let o = run(&["fetch", "37.a1", "--online", "--json", "--cache-dir", d, "--api-base", &base], "");
    assert_eq!(json_out(&o)["source"], "cache");
    assert_eq!(hits.load(Ordering::SeqCst), before);
}

#[test]
fn online_fetch_of_genus_two_equation() {
    let (base, _) = mock_lmfdb(json!({ "data": [{ "eqn": "[[0,-1,1,1,-3,2],[1]]" }] }));
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "fetch",
            "256.a.512.1",
            "--online",
            "--json",
            "--cache-dir",
            dir.path().to_str().unwrap(),
            "--api-base",
            &base,
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert_eq!(v["source"], "lmfdb");
    assert_eq!(v["curve"]["model"]["h"], json!(["1"]));
}
