//! On-disk cache of built Fourier series.
//!
//! Each precision gets its own subdirectory `prec<P>/` holding one FSER
//! file per form plus a `manifest.json` with SHA-256 checksums.  Reads
//! always revalidate against the manifest: a file that does not match its
//! recorded checksum is an integrity error, never a trigger for a silent
//! rebuild.  Writers take an exclusive lock file on the cache root so two
//! processes cannot mutate the directory at once.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use orthomod::igusa::{IgusaTower, SiegelForm};
use orthomod::series::fser;
use orthomod::OrthoSeries;

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "ORTHOMOD_CACHE_DIR";
/// Default cache root, relative to the working directory.
pub const CACHE_DEFAULT: &str = ".orthomod-cache";

/// A precondition or artifact-integrity failure (exit code 2).
#[derive(Debug)]
pub struct Contract(pub String);

impl std::fmt::Display for Contract {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn contract<T>(msg: impl Into<String>) -> Result<T, Contract> {
    Err(Contract(msg.into()))
}

/// Resolve the cache root: explicit flag, then the environment variable,
/// then the default.
pub fn cache_root(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(CACHE_DEFAULT)
}

/// The tower least precision; smaller requests are built here and then
/// truncated so the published files stay honest about their bound.
const TOWER_MIN_PREC: i64 = 5;

/// Build the seven tower forms at `prec >= 4`, truncating when the
/// construction needs a higher internal bound.
pub fn build_forms(prec: i64) -> Result<Vec<SiegelForm>, Contract> {
    if prec < 4 {
        return contract(format!(
            "precision {prec} is below the minimum 4 for Fourier-level commands"
        ));
    }
    let tower = IgusaTower::build(prec.max(TOWER_MIN_PREC))
        .map_err(|e| Contract(format!("tower construction failed: {e}")))?;
    Ok(tower
        .forms()
        .into_iter()
        .map(|f| SiegelForm {
            name: f.name,
            weight: f.weight,
            series: if prec < TOWER_MIN_PREC {
                f.series.truncated(prec)
            } else {
                f.series.clone()
            },
        })
        .collect())
}

// ---------------------------------------------------------------------------
// manifest
// ---------------------------------------------------------------------------

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestFileEntry {
    pub form: String,
    pub weight: i64,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub prec: i64,
    pub files: Vec<ManifestFileEntry>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn fser_name(form: &str) -> String {
    format!("{}.fser", form.to_ascii_lowercase())
}

fn prec_dir(root: &Path, prec: i64) -> PathBuf {
    root.join(format!("prec{prec}"))
}

// ---------------------------------------------------------------------------
// lock file
// ---------------------------------------------------------------------------

/// Exclusive advisory lock on the cache root, held while mutating it.
/// The guard removes the lock file on drop.
pub struct CacheLock {
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(root: &Path) -> Result<CacheLock, Contract> {
        fs::create_dir_all(root).map_err(|e| {
            Contract(format!("cannot create cache directory {}: {e}", root.display()))
        })?;
        let path = root.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut file) => {
                use std::io::Write;
                let _ = writeln!(file, "{}", std::process::id());
                Ok(CacheLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => contract(format!(
                "cache directory is locked by another process ({}); \
                 remove the file if the owner is gone",
                path.display()
            )),
            Err(e) => contract(format!("cannot take cache lock {}: {e}", path.display())),
        }
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

// ---------------------------------------------------------------------------
// writing
// ---------------------------------------------------------------------------

pub struct WriteOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    /// False when a valid cache was already present and nothing was touched.
    pub wrote: bool,
}

/// Write the forms at `root/prec<P>/`, or validate what is already there.
/// An existing valid cache is left byte-for-byte untouched; an existing
/// damaged cache is an integrity error.
pub fn write_cache(root: &Path, prec: i64, forms: &[SiegelForm]) -> Result<WriteOutcome, Contract> {
    let dir = prec_dir(root, prec);
    if dir.join(MANIFEST_FILE).exists() {
        let manifest = validate_cache(root, prec)?;
        return Ok(WriteOutcome {
            dir,
            manifest,
            wrote: false,
        });
    }
    let _lock = CacheLock::acquire(root)?;
    fs::create_dir_all(&dir)
        .map_err(|e| Contract(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for form in forms {
        let text = fser::write_ortho(&form.series);
        let file = fser_name(form.name);
        fs::write(dir.join(&file), &text)
            .map_err(|e| Contract(format!("cannot write {}: {e}", dir.join(&file).display())))?;
        files.push(ManifestFileEntry {
            form: form.name.to_string(),
            weight: form.weight,
            file,
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let manifest = Manifest {
        format: "fser-manifest 1".to_string(),
        prec,
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)
        .map_err(|e| Contract(format!("cannot write manifest: {e}")))?;
    Ok(WriteOutcome {
        dir,
        manifest,
        wrote: true,
    })
}

// ---------------------------------------------------------------------------
// reading
// ---------------------------------------------------------------------------

fn read_manifest(dir: &Path) -> Result<Manifest, Contract> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Contract(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Contract(format!("manifest {} is damaged: {e}", path.display())))?;
    if manifest.format != "fser-manifest 1" {
        return contract(format!(
            "manifest {} has unknown format `{}`",
            path.display(),
            manifest.format
        ));
    }
    Ok(manifest)
}

/// Check every checksum in the cache at `root/prec<P>/`.
pub fn validate_cache(root: &Path, prec: i64) -> Result<Manifest, Contract> {
    let dir = prec_dir(root, prec);
    let manifest = read_manifest(&dir)?;
    if manifest.prec != prec {
        return contract(format!(
            "manifest in {} says precision {} but the directory is for {}",
            dir.display(),
            manifest.prec,
            prec
        ));
    }
    for entry in &manifest.files {
        let path = dir.join(&entry.file);
        let data = fs::read(&path)
            .map_err(|e| Contract(format!("cannot read {}: {e}", path.display())))?;
        let actual = sha256_hex(&data);
        if actual != entry.sha256 {
            return contract(format!(
                "cache integrity failure: {} does not match its recorded checksum \
                 (expected {}, found {}); delete the cache directory to rebuild",
                path.display(),
                entry.sha256,
                actual
            ));
        }
    }
    Ok(manifest)
}

/// Precisions already present under the cache root, ascending.
fn cached_precisions(root: &Path) -> Vec<i64> {
    let mut found = Vec::new();
    if let Ok(entries) = fs::read_dir(root) {
        for entry in entries.flatten() {
            let name = entry.file_name();
            if let Some(rest) = name.to_string_lossy().strip_prefix("prec") {
                if let Ok(p) = rest.parse::<i64>() {
                    if entry.path().join(MANIFEST_FILE).exists() {
                        found.push(p);
                    }
                }
            }
        }
    }
    found.sort_unstable();
    found
}

/// Load one form at precision at least `prec`.  A cached precision is
/// reused when one at `>= prec` exists (after full checksum validation);
/// otherwise the tower is built at `prec` and cached.  A present but
/// damaged cache is an error, never silently rebuilt.
pub fn load_form(root: &Path, name: &str, prec: i64) -> Result<LoadedForm, Contract> {
    if prec < 4 {
        return contract(format!(
            "precision {prec} is below the minimum 4 for Fourier-level commands"
        ));
    }
    let candidate = cached_precisions(root)
        .into_iter()
        .find(|&p| p >= prec);
    let (dir, manifest) = match candidate {
        Some(p) => {
            let manifest = validate_cache(root, p)?;
            (prec_dir(root, p), manifest)
        }
        None => {
            let forms = build_forms(prec)?;
            let outcome = write_cache(root, prec, &forms)?;
            (outcome.dir, outcome.manifest)
        }
    };
    let entry = manifest
        .files
        .iter()
        .find(|f| f.form.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            Contract(format!(
                "form {} is not in the cache manifest at {}",
                name,
                dir.display()
            ))
        })?;
    let path = dir.join(&entry.file);
    let text = fs::read_to_string(&path)
        .map_err(|e| Contract(format!("cannot read {}: {e}", path.display())))?;
    let series = fser::read_ortho(&text)
        .map_err(|e| Contract(format!("cache file {} is damaged: {e}", path.display())))?;
    if series.prec() < prec {
        return contract(format!(
            "cache file {} has precision {} but {} was requested",
            path.display(),
            series.prec(),
            prec
        ));
    }
    Ok(LoadedForm {
        name: entry.form.clone(),
        series,
    })
}

pub struct LoadedForm {
    pub name: String,
    pub series: OrthoSeries,
}
