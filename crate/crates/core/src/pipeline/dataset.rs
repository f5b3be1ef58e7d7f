use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{read_image, read_mask};
use crate::synth::ObjectPatch;

pub const BLUR_DIR: &str = "blur";
pub const SHARP_DIR: &str = "sharp";
pub const MASK_DIR: &str = "mask";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const CONFIG_FILE: &str = "config.json";

const MASK_SUFFIX: &str = ".mask.png";

/// PNG files in `dir`, sorted by file name.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub(crate) fn file_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Object patches keyed by id. Each object is `ID.png` with its alpha mask
/// in `ID.mask.png`.
#[derive(Debug, Clone)]
pub struct ObjectLibrary {
    pub ids: Vec<String>,
    pub patches: Vec<ObjectPatch>,
}

impl ObjectLibrary {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|k| k == id)
    }
}

pub fn load_objects(dir: &Path) -> Result<ObjectLibrary> {
    let mut ids = Vec::new();
    let mut patches = Vec::new();
    for path in list_pngs(dir)? {
        let name = path.file_name().unwrap().to_string_lossy();
        if name.ends_with(MASK_SUFFIX) {
            continue;
        }
        let id = file_id(&path);
        let mask_path = dir.join(format!("{id}{MASK_SUFFIX}"));
        if !mask_path.is_file() {
            return Err(Error::Input(format!("object {} has no mask {}", path.display(), mask_path.display())));
        }
        let patch = ObjectPatch::new(read_image(&path)?, read_mask(&mask_path)?)
            .map_err(|e| Error::Input(format!("object {id}: {e}")))?;
        ids.push(id);
        patches.push(patch);
    }
    Ok(ObjectLibrary { ids, patches })
}
