//! Flag/config-file merging. Flags win over the file; every run echoes its
//! effective configuration to stderr before computing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use demon_lab::config::parse_kv;

/// Bad input: reported with exit status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Default)]
pub struct Settings {
    cfg: BTreeMap<String, String>,
    used: BTreeSet<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    file: Option<File>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut s = Settings::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Invalid(format!("config {}: {e}", p.display())))?;
            for (k, v) in parse_kv(&text)? {
                // underscores and dashes are interchangeable in keys
                s.cfg.insert(k.replace('_', "-"), v);
            }
        }
        Ok(s)
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let k = key.replace('_', "-");
        let v = self.cfg.get(&k).cloned();
        if v.is_some() {
            self.used.insert(k);
        }
        v
    }

    /// The flag if given, else the config value.
    pub fn pick<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        let from_cfg = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_cfg {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Invalid(format!("config {key}={v}: {e}")).into()),
            None => Ok(None),
        }
    }

    pub fn flag(&mut self, key: &str) -> anyhow::Result<bool> {
        Ok(self.pick::<bool>(None, key)?.unwrap_or(false))
    }

    pub fn path(&mut self, key: &str) -> anyhow::Result<Option<PathBuf>> {
        self.pick::<PathBuf>(None, key)
    }

    /// Opens the output file, warns about unused config keys and prints the
    /// effective configuration. Call once all parameters are resolved.
    pub fn finish(&mut self, entries: &[(&str, String)]) -> anyhow::Result<()> {
        if let Some(p) = &self.out {
            let f = File::create(p)
                .map_err(|e| Invalid(format!("cannot write {}: {e}", p.display())))?;
            self.file = Some(f);
        }
        for k in self.cfg.keys() {
            if !self.used.contains(k) {
                eprintln!("warning: config key {k:?} not used by this command");
            }
        }
        let mut line = String::from("config:");
        for (k, v) in entries {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push_str(&format!(" seed={}", self.seed));
        line.push_str(&format!(
            " out={}",
            self.out
                .as_ref()
                .map_or("-".into(), |p| p.display().to_string())
        ));
        eprintln!("{line}");
        Ok(())
    }

    /// The `--out` file opened by `finish`, if any.
    pub fn output_file(&mut self) -> Option<BufWriter<File>> {
        self.file.take().map(BufWriter::new)
    }

    /// The `--out` file, or stdout.
    pub fn output(&mut self) -> io::Result<Box<dyn Write>> {
        Ok(match self.output_file() {
            Some(f) => Box::new(f),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }
}
