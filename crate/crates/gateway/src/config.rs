//! Server configuration. Each setting comes from, in increasing precedence:
//! the built-in default, the command-line flag, the `GREENBASKET_*`
//! environment variable.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use greenbasket_core::catalog::{ingest_path, Catalog, CatalogHandle};
use greenbasket_core::clock::Clock;
use greenbasket_core::footprint::References;
use greenbasket_core::gamify::GamifyConfig;
use greenbasket_core::lists::{Listkeeper, Store};

use crate::auth::Sessions;

pub const ENV_PORT: &str = "GREENBASKET_PORT";
pub const ENV_CATALOG: &str = "GREENBASKET_CATALOG";
pub const ENV_REFERENCES: &str = "GREENBASKET_REFERENCES";
pub const ENV_GAMIFY_CONFIG: &str = "GREENBASKET_GAMIFY_CONFIG";
pub const ENV_DATA_DIR: &str = "GREENBASKET_DATA_DIR";
pub const ENV_USERS: &str = "GREENBASKET_USERS";

pub const DEFAULT_PORT: u16 = 8080;

/// Flag values as given; `None` means the flag was absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServeFlags {
    pub port: Option<u16>,
    pub catalog: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub gamify_config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub users: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeConfig {
    pub port: u16,
    pub catalog: PathBuf,
    pub references: PathBuf,
    pub gamify_config: PathBuf,
    pub data_dir: PathBuf,
    pub users: PathBuf,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{setting}: {value:?} is not a valid port")]
    InvalidPort { setting: &'static str, value: String },
    #[error("{setting}: {path} does not exist")]
    MissingFile { setting: &'static str, path: PathBuf },
    #[error("catalog {path}: {message}")]
    Catalog { path: PathBuf, message: String },
    #[error("references {path}: {message}")]
    References { path: PathBuf, message: String },
    #[error("gamify config {path}: {message}")]
    Gamify { path: PathBuf, message: String },
    #[error("users {path}: {message}")]
    Users { path: PathBuf, message: String },
    #[error("data dir {path}: {message}")]
    Store { path: PathBuf, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::InvalidPort { .. } => "config_invalid_port",
            ConfigError::MissingFile { .. } => "config_missing_file",
            ConfigError::Catalog { .. } => "config_invalid_catalog",
            ConfigError::References { .. } => "config_invalid_references",
            ConfigError::Gamify { .. } => "config_invalid_gamify",
            ConfigError::Users { .. } => "config_invalid_users",
            ConfigError::Store { .. } => "config_store_unavailable",
        }
    }
}

impl ServeConfig {
    /// `env` is consulted for every setting and wins over `flags`.
    pub fn resolve(
        flags: ServeFlags,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let path = |key: &str, flag: Option<PathBuf>, default: &str| {
            env(key)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .or(flag)
                .unwrap_or_else(|| PathBuf::from(default))
        };
        let port = match env(ENV_PORT).filter(|v| !v.is_empty()) {
            Some(v) => v.parse().map_err(|_| ConfigError::InvalidPort {
                setting: ENV_PORT,
                value: v,
            })?,
            None => flags.port.unwrap_or(DEFAULT_PORT),
        };
        Ok(Self {
            port,
            catalog: path(ENV_CATALOG, flags.catalog, "data/catalog.csv"),
            references: path(ENV_REFERENCES, flags.references, "data/references.toml"),
            gamify_config: path(ENV_GAMIFY_CONFIG, flags.gamify_config, "data/gamify.toml"),
            data_dir: path(ENV_DATA_DIR, flags.data_dir, "var"),
            users: path(ENV_USERS, flags.users, "data/users.toml"),
        })
    }
}

fn require(setting: &'static str, path: &Path) -> Result<(), ConfigError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ConfigError::MissingFile {
            setting,
            path: path.to_path_buf(),
        })
    }
}

const SNAPSHOT: &str = "catalog.snapshot.json";

/// Loads the catalog snapshot when it is newer than the source document,
/// otherwise ingests the document and refreshes the snapshot.
fn load_catalog(config: &ServeConfig) -> Result<Catalog, ConfigError> {
    let snapshot = config.data_dir.join(SNAPSHOT);
    let modified = |p: &Path| std::fs::metadata(p).and_then(|m| m.modified()).ok();
    if let (Some(snap), Some(src)) = (modified(&snapshot), modified(&config.catalog)) {
        if snap >= src {
            match Catalog::load_snapshot(&snapshot) {
                Ok(catalog) => return Ok(catalog),
                Err(e) => tracing::warn!(error = %e, "ignoring unreadable catalog snapshot"),
            }
        }
    }
    let (catalog, report) = ingest_path(&config.catalog).map_err(|e| ConfigError::Catalog {
        path: config.catalog.clone(),
        message: e.to_string(),
    })?;
    for r in &report.rejected {
        tracing::warn!(line = r.line, code = ?r.code, reason = %r.reason, "catalog row rejected");
    }
    if let Err(e) = catalog.save_snapshot(&snapshot) {
        tracing::warn!(error = %e, "could not write catalog snapshot");
    }
    Ok(catalog)
}

/// Everything `serve` needs, loaded and validated up front.
pub struct Loaded {
    pub keeper: Arc<Listkeeper>,
    pub sessions: Sessions,
}

pub fn load(config: &ServeConfig, clock: Arc<dyn Clock>) -> Result<Loaded, ConfigError> {
    require("catalog", &config.catalog)?;
    require("references", &config.references)?;
    require("gamify-config", &config.gamify_config)?;
    require("users", &config.users)?;

    let references = References::load(&config.references).map_err(|e| ConfigError::References {
        path: config.references.clone(),
        message: e.to_string(),
    })?;
    let rules = GamifyConfig::load(&config.gamify_config).map_err(|e| ConfigError::Gamify {
        path: config.gamify_config.clone(),
        message: e.to_string(),
    })?;
    let sessions = Sessions::load(&config.users).map_err(|message| ConfigError::Users {
        path: config.users.clone(),
        message,
    })?;
    let store_err = |e: &dyn std::fmt::Display| ConfigError::Store {
        path: config.data_dir.clone(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(&config.data_dir).map_err(|e| store_err(&e))?;
    let catalog = load_catalog(config)?;
    let store = Store::open(&config.data_dir).map_err(|e| store_err(&e))?;
    let keeper = Listkeeper::open(
        Arc::new(CatalogHandle::new(catalog)),
        Arc::new(references),
        Arc::new(rules),
        store,
        clock,
    )
    .map_err(|e| store_err(&e))?;
    Ok(Loaded {
        keeper: Arc::new(keeper),
        sessions,
    })
}
