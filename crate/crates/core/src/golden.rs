//! Write-once store of values recorded by oracle runs.
//!
//! On disk it is a version line `# pseudotwin goldens v1`, then a header
//! `key value note` and one row per key, fields separated by tabs:
//!
//! ```text
//! pihat.count.10000 <TAB> 1.65000000000000000e2 <TAB> acceptance
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const VERSION_LINE: &str = "# pseudotwin goldens v1";
const HEADER: &str = "key\tvalue\tnote";

#[derive(Clone, Debug, PartialEq)]
pub struct Golden {
    pub value: f64,
    pub note: String,
}

/// What [`GoldenStore::check_or_record`] did with a value.
#[derive(Clone, Debug, PartialEq)]
pub enum GoldenOutcome {
    Recorded,
    Matched { stored: f64 },
    Mismatch { stored: f64 },
}

impl GoldenOutcome {
    pub fn is_ok(&self) -> bool {
        !matches!(self, GoldenOutcome::Mismatch { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldenStore {
    entries: BTreeMap<String, Golden>,
    dirty: bool,
}

impl GoldenStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(VERSION_LINE) {
            return Err(Error::Golden(format!(
                "missing version line `{VERSION_LINE}`"
            )));
        }
        if lines.next() != Some(HEADER) {
            return Err(Error::Golden("missing header row".into()));
        }
        let mut entries = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.splitn(3, '\t');
            let (Some(key), Some(value)) = (cols.next(), cols.next()) else {
                return Err(Error::Golden(format!(
                    "line {}: expected key<TAB>value",
                    i + 3
                )));
            };
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Golden(format!("line {}: bad number `{value}`", i + 3)))?;
            let note = cols.next().unwrap_or("").to_string();
            if entries
                .insert(key.to_string(), Golden { value, note })
                .is_some()
            {
                return Err(Error::Golden(format!("duplicate key `{key}`")));
            }
        }
        Ok(GoldenStore {
            entries,
            dirty: false,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Golden(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Like [`GoldenStore::load`], but a missing file gives an empty store.
    pub fn load_or_new(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{VERSION_LINE}\n{HEADER}\n");
        for (k, g) in &self.entries {
            out.push_str(&format!("{k}\t{:.17e}\t{}\n", g.value, g.note));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())
            .map_err(|e| Error::Golden(format!("cannot write {}: {e}", path.display())))
    }

    pub fn get(&self, key: &str) -> Option<&Golden> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Golden)> {
        self.entries.iter().map(|(k, g)| (k.as_str(), g))
    }

    /// Stores `value` under a new key. An existing key is only overwritten
    /// with `regenerate`.
    pub fn set(&mut self, key: &str, value: f64, note: &str, regenerate: bool) -> Result<()> {
        if self.entries.contains_key(key) && !regenerate {
            return Err(Error::Golden(format!(
                "`{key}` is already recorded; pass regenerate to replace it"
            )));
        }
        self.entries.insert(
            key.to_string(),
            Golden {
                value,
                note: note.to_string(),
            },
        );
        self.dirty = true;
        Ok(())
    }

    /// Records `value` if `key` is new, otherwise compares it against the
    /// stored value to relative tolerance `rel_tol`.
    pub fn check_or_record(
        &mut self,
        key: &str,
        value: f64,
        rel_tol: f64,
        note: &str,
    ) -> GoldenOutcome {
        match self.entries.get(key) {
            None => {
                self.entries.insert(
                    key.to_string(),
                    Golden {
                        value,
                        note: note.to_string(),
                    },
                );
                self.dirty = true;
                GoldenOutcome::Recorded
            }
            Some(g) => {
                let stored = g.value;
                let scale = stored.abs().max(value.abs()).max(f64::MIN_POSITIVE);
                if stored == value || (stored - value).abs() <= rel_tol * scale {
                    GoldenOutcome::Matched { stored }
                } else {
                    GoldenOutcome::Mismatch { stored }
                }
            }
        }
    }
}
