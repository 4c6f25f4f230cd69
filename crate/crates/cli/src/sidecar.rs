use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    git_hash: &'static str,
    command: &'a str,
    params: &'a T,
}

/// `out.uai` gets `out.uai.json`.
pub fn path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Provenance next to a generated artifact. Contains nothing time dependent,
/// so reruns are byte-identical.
pub fn write<T: Serialize>(out: &Path, command: &str, params: &T) -> anyhow::Result<()> {
    let doc = Sidecar {
        tool: "gmbe",
        version: env!("CARGO_PKG_VERSION"),
        git_hash: env!("GMBE_GIT_HASH"),
        command,
        params,
    };
    let path = path_for(out);
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
