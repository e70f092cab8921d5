//! Curve data by label: an on-disk cache, the LMFDB API (only when asked)
//! and the embedded fixtures.
//!
//! Cache entries live at `<dir>/v1/<sha256(label)>.json` and record the
//! SHA-256 of their curve JSON, which is checked on every read. Writers hold
//! an exclusive lock on `<dir>/.lock`.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use dendeg::curvemodel::{EllipticCurve, HyperellipticCurve};
use dendeg::fixtures::fixtures;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::input::Failure;

pub const DEFAULT_API_BASE: &str = "https://www.lmfdb.org";
const TIMEOUT: Duration = Duration::from_secs(20);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Cache,
    Network,
    Fixture,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Cache => "cache",
            Origin::Network => "lmfdb",
            Origin::Fixture => "embedded fixture",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    label: String,
    sha256: String,
    curve: Value,
}

pub fn resolve_dir(flag: Option<&Path>) -> Result<PathBuf, Failure> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os("DENDEG_CACHE_DIR") {
        return Ok(PathBuf::from(p));
    }
    if let Some(p) = std::env::var_os("XDG_CACHE_HOME") {
        return Ok(PathBuf::from(p).join("dendeg"));
    }
    std::env::var_os("HOME")
        .map(|h| PathBuf::from(h).join(".cache").join("dendeg"))
        .ok_or_else(|| Failure::Other("no cache directory: pass --cache-dir or set DENDEG_CACHE_DIR".into()))
}

fn check_label(label: &str) -> Result<(), Failure> {
    let ok = !label.is_empty() && label.len() <= 64 && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '.');
    if ok {
        Ok(())
    } else {
        Err(Failure::Schema(format!("bad label {label:?}")))
    }
}

fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn entry_path(dir: &Path, label: &str) -> PathBuf {
    dir.join("v1").join(format!("{}.json", digest(label)))
}

fn read_entry(path: &Path, label: &str) -> anyhow::Result<Option<Value>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let entry: Entry =
        serde_json::from_str(&text).with_context(|| format!("corrupt cache entry {}", path.display()))?;
    if entry.label != label {
        bail!("cache entry {} holds {}, not {label}", path.display(), entry.label);
    }
    if digest(&serde_json::to_string(&entry.curve)?) != entry.sha256 {
        bail!("cache entry {} fails its checksum", path.display());
    }
    Ok(Some(entry.curve))
}

/// Write under the directory lock; an entry written meanwhile by another
/// process wins.
fn write_entry(dir: &Path, label: &str, curve: &Value) -> anyhow::Result<Value> {
    fs::create_dir_all(dir.join("v1")).with_context(|| format!("creating {}", dir.display()))?;
    let lock = OpenOptions::new().create(true).truncate(false).write(true).open(dir.join(".lock"))?;
    lock.lock()?;
    let path = entry_path(dir, label);
    if let Ok(Some(existing)) = read_entry(&path, label) {
        return Ok(existing);
    }
    let entry =
        Entry { label: label.to_string(), sha256: digest(&serde_json::to_string(curve)?), curve: curve.clone() };
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string_pretty(&entry)?)?;
    fs::rename(&tmp, &path)?;
    drop(lock);
    Ok(curve.clone())
}

fn fixture_curve(label: &str) -> Option<Value> {
    let c = fixtures().curve(label).ok()?;
    if let Some(e) = &c.factor.elliptic {
        return Some(json!({ "label": label, "elliptic": e }));
    }
    c.factor.model.as_ref().map(|m| json!({ "label": label, "model": m }))
}

fn get_json(url: &str) -> anyhow::Result<Value> {
    let body = ureq::get(url).timeout(TIMEOUT).call().map_err(|e| anyhow!("{url}: {e}"))?.into_string()?;
    serde_json::from_str(&body).with_context(|| format!("{url}: response is not JSON"))
}

fn first_record(v: &Value, label: &str) -> anyhow::Result<Value> {
    v.get("data")
        .and_then(|d| d.as_array())
        .and_then(|d| d.first())
        .cloned()
        .ok_or_else(|| anyhow!("LMFDB has no curve labelled {label}"))
}

/// Genus-2 labels have four dot-separated parts; anything else is read as
/// an elliptic curve label (LMFDB style with a dot, Cremona style without).
fn download(label: &str, base: &str) -> anyhow::Result<Value> {
    let base = base.trim_end_matches('/');
    if label.split('.').count() == 4 {
        let v = get_json(&format!("{base}/api/g2c_curves/?label={label}&_format=json&_fields=eqn"))?;
        let rec = first_record(&v, label)?;
        let eqn = match rec.get("eqn") {
            Some(Value::String(s)) => serde_json::from_str(s)?,
            Some(v) => v.clone(),
            None => bail!("LMFDB record for {label} has no equation"),
        };
        let (f, h) = (eqn.get(0).cloned().unwrap_or(json!([])), eqn.get(1).cloned().unwrap_or(json!([])));
        let model: HyperellipticCurve =
            serde_json::from_value(json!({ "f": f, "h": h })).context("normalizing the equation")?;
        Ok(json!({ "label": label, "model": model }))
    } else {
        let field = if label.contains('.') { "lmfdb_label" } else { "Clabel" };
        let v = get_json(&format!("{base}/api/ec_curvedata/?{field}={label}&_format=json&_fields=ainvs"))?;
        let rec = first_record(&v, label)?;
        let e: EllipticCurve =
            serde_json::from_value(json!({ "ainvs": rec.get("ainvs").cloned().unwrap_or(Value::Null) }))
                .context("normalizing the a-invariants")?;
        Ok(json!({ "label": label, "elliptic": e }))
    }
}

/// Cache, then the network when `online`, then the embedded fixtures.
pub fn fetch(label: &str, dir: &Path, online: bool, api_base: &str) -> Result<(Value, Origin), Failure> {
    check_label(label)?;
    let cached = read_entry(&entry_path(dir, label), label);
    match cached {
        Ok(Some(v)) => return Ok((v, Origin::Cache)),
        Ok(None) => {}
        Err(e) if !online => return Err(e.into()),
        Err(_) => {}
    }
    let mut network_error = None;
    if online {
        match download(label, api_base) {
            Ok(curve) => return Ok((write_entry(dir, label, &curve)?, Origin::Network)),
            Err(e) => network_error = Some(e),
        }
    }
    if let Some(v) = fixture_curve(label) {
        return Ok((v, Origin::Fixture));
    }
    Err(match network_error {
        Some(e) => Failure::Other(format!("{e:#}; {label} is neither cached nor embedded")),
        None => Failure::Other(format!("{label} is not cached or embedded; rerun with --online to query LMFDB")),
    })
}
