use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

use super::DeviceId;

/// Device ids the client has been granted. Persists as a JSON list of id
/// strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PermissionStore {
    granted: BTreeSet<DeviceId>,
}

impl PermissionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a store from `path`. A missing file is an empty store; so is an
    /// unreadable or corrupt one, with a warning logged.
    pub fn load(path: &Path) -> Self {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Self::default(),
            Err(e) => {
                log::warn!("permission store {}: {e}; starting empty", path.display());
                return Self::default();
            }
        };
        match serde_json::from_str::<Vec<DeviceId>>(&text) {
            Ok(ids) => PermissionStore {
                granted: ids.into_iter().collect(),
            },
            Err(e) => {
                log::warn!("permission store {} is corrupt ({e}); starting empty", path.display());
                Self::default()
            }
        }
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let ids: Vec<&DeviceId> = self.granted.iter().collect();
        let json = serde_json::to_string_pretty(&ids).map_err(io::Error::other)?;
        fs::write(path, json + "\n")
    }

    /// Returns true if the id was not already granted.
    pub fn grant(&mut self, id: DeviceId) -> bool {
        self.granted.insert(id)
    }

    pub fn revoke(&mut self, id: &DeviceId) -> bool {
        self.granted.remove(id)
    }

    pub fn contains(&self, id: &DeviceId) -> bool {
        self.granted.contains(id)
    }

    pub fn len(&self) -> usize {
        self.granted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.granted.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeviceId> {
        self.granted.iter()
    }
}
