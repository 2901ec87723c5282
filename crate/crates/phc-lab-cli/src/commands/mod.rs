//! Shared command plumbing: config loading, output-directory writes with
//! overwrite protection, worker-count resolution, and the exit-code
//! contract.

pub mod bands;
pub mod cqed;
pub mod design;
pub mod fit;
pub mod report;
pub mod simulate;
pub mod yields;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

/// Exit codes are a stable contract:
/// 0 success, 1 config/input error, 2 design-rule failure,
/// 3 solver divergence, 4 fit non-convergence.
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DRC: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_FIT: i32 = 4;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// A command failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn drc(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DRC,
            message: message.into(),
        }
    }

    pub fn divergence(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DIVERGENCE,
            message: message.into(),
        }
    }

    pub fn fit(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FIT,
            message: message.into(),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Global flags shared by every command.
pub struct Ctx {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub force: bool,
}

impl Ctx {
    /// Parse the JSON config file into `T`. Unknown fields, missing fields,
    /// and type mismatches are config errors naming the offending field
    /// (serde's message includes it). Returns the parsed config and the
    /// config file's directory, against which relative data paths resolve.
    pub fn load_config<T: DeserializeOwned>(&self) -> CmdResult<(T, PathBuf)> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Failure::config("missing required flag --config <path>"))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: T = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))?;
        let dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, dir))
    }

    /// Write one output file, refusing to overwrite unless --force.
    pub fn write_output(&self, name: &str, bytes: &[u8]) -> CmdResult<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| {
            Failure::config(format!(
                "cannot create output directory {}: {e}",
                self.out.display()
            ))
        })?;
        let path = self.out.join(name);
        if path.exists() && !self.force {
            return Err(Failure::config(format!(
                "refusing to overwrite {}; pass --force to allow it",
                path.display()
            )));
        }
        std::fs::write(&path, bytes)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn ensure_schema(version: u32) -> CmdResult {
    if version != CONFIG_SCHEMA_VERSION {
        return Err(Failure::config(format!(
            "unsupported schema_version {version}; this build reads version {CONFIG_SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Resolve a config-relative path.
pub fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Worker count for sample-parallel commands: the available parallelism,
/// capped by the PHC_LAB_THREADS environment variable when set.
pub fn worker_count() -> CmdResult<usize> {
    let available = std::thread::available_parallelism()
        .map(usize::from)
        .unwrap_or(1);
    match std::env::var("PHC_LAB_THREADS") {
        Ok(v) => {
            let cap: usize = v.trim().parse().map_err(|_| {
                Failure::config(format!(
                    "PHC_LAB_THREADS must be a positive integer, got {v:?}"
                ))
            })?;
            if cap == 0 {
                return Err(Failure::config("PHC_LAB_THREADS must be at least 1"));
            }
            Ok(available.min(cap))
        }
        Err(_) => Ok(available),
    }
}

/// Pretty JSON bytes with a trailing newline (stable field order comes from
/// struct declaration order, so identical data gives identical bytes).
pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> CmdResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Failure::config(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
