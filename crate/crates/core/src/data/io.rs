use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{dedup_pairs, InteractionDataset};
use crate::error::{Error, Result};

pub const SOCIAL_FILE: &str = "social.tsv";
pub const USER_ITEM_FILE: &str = "user_item.tsv";
pub const MEMBERS_FILE: &str = "group_members.tsv";
pub const GROUP_ITEM_FILE: &str = "group_item.tsv";

/// The four input files, in the order they are read.
pub const DATA_FILES: [&str; 4] = [SOCIAL_FILE, USER_ITEM_FILE, MEMBERS_FILE, GROUP_ITEM_FILE];

/// Raw string IDs per entity class, indexed by dense index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub groups: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct IdMapJson {
    users: BTreeMap<String, usize>,
    items: BTreeMap<String, usize>,
    groups: BTreeMap<String, usize>,
}

fn to_index_map(ids: &[String]) -> BTreeMap<String, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

fn from_index_map(class: &str, map: BTreeMap<String, usize>) -> Result<Vec<String>> {
    let mut out = vec![None; map.len()];
    for (raw, idx) in map {
        match out.get_mut(idx) {
            Some(slot @ None) => *slot = Some(raw),
            _ => return Err(Error::Integrity(format!("id_map {class}: bad index {idx}"))),
        }
    }
    Ok(out.into_iter().map(|s| s.unwrap_or_default()).collect())
}

impl IdMap {
    pub fn user_index(&self, raw: &str) -> Option<usize> {
        self.users.iter().position(|s| s == raw)
    }

    pub fn to_json(&self) -> Result<String> {
        let json = IdMapJson {
            users: to_index_map(&self.users),
            items: to_index_map(&self.items),
            groups: to_index_map(&self.groups),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: IdMapJson = serde_json::from_str(text)?;
        Ok(IdMap {
            users: from_index_map("users", json.users)?,
            items: from_index_map("items", json.items)?,
            groups: from_index_map("groups", json.groups)?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedDataset {
    pub dataset: InteractionDataset,
    pub ids: IdMap,
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, raw: &str) -> usize {
        if let Some(&i) = self.index.get(raw) {
            return i;
        }
        let i = self.names.len();
        self.names.push(raw.to_string());
        self.index.insert(raw.to_string(), i);
        i
    }

    fn get(&self, raw: &str) -> Option<usize> {
        self.index.get(raw).copied()
    }
}

struct Record<'a> {
    line: usize,
    left: &'a str,
    right: &'a str,
}

fn read_file(dir: &Path, name: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, text))
}

fn records<'a>(path: &Path, text: &'a str) -> Result<Vec<Record<'a>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (left, right) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => (a, b),
            _ => {
                return Err(Error::Parse {
                    file: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected two tab-separated fields, got {line:?}"),
                })
            }
        };
        out.push(Record {
            line: i + 1,
            left,
            right,
        });
    }
    Ok(out)
}

/// Loads the four TSV files from `dir`, remapping string IDs to dense
/// indices in first-seen order.
///
/// Users are introduced by `social.tsv` and `user_item.tsv`; items by
/// `user_item.tsv` and `group_item.tsv`; groups by `group_members.tsv`.
/// A membership naming an unknown user, or a group-item row naming a group
/// without members, is an integrity error.
pub fn load_dataset(dir: &Path) -> Result<LoadedDataset> {
    let mut users = Interner::default();
    let mut items = Interner::default();
    let mut groups = Interner::default();

    let (path, text) = read_file(dir, SOCIAL_FILE)?;
    let mut social_edges = Vec::new();
    for r in records(&path, &text)? {
        social_edges.push((users.intern(r.left), users.intern(r.right)));
    }

    let (path, text) = read_file(dir, USER_ITEM_FILE)?;
    let mut user_item = Vec::new();
    for r in records(&path, &text)? {
        user_item.push((users.intern(r.left), items.intern(r.right)));
    }

    let (path, text) = read_file(dir, MEMBERS_FILE)?;
    let mut memberships: Vec<Vec<usize>> = Vec::new();
    for r in records(&path, &text)? {
        let u = users.get(r.right).ok_or_else(|| {
            Error::Integrity(format!(
                "{}:{}: group {:?} references unknown user {:?}",
                path.display(),
                r.line,
                r.left,
                r.right
            ))
        })?;
        let g = groups.intern(r.left);
        if g == memberships.len() {
            memberships.push(Vec::new());
        }
        if memberships[g].contains(&u) {
            log::warn!("{}:{}: duplicate membership dropped", path.display(), r.line);
        } else {
            memberships[g].push(u);
        }
    }

    let (path, text) = read_file(dir, GROUP_ITEM_FILE)?;
    let mut group_item = Vec::new();
    for r in records(&path, &text)? {
        let g = groups.get(r.left).ok_or_else(|| {
            Error::Integrity(format!(
                "{}:{}: group {:?} has no members",
                path.display(),
                r.line,
                r.left
            ))
        })?;
        group_item.push((g, items.intern(r.right)));
    }

    let mut dataset = InteractionDataset {
        num_users: users.names.len(),
        num_items: items.names.len(),
        num_groups: groups.names.len(),
        social_edges,
        user_item,
        group_item,
        memberships,
    };
    let loops = dataset.canonicalize_social();
    if loops > 0 {
        log::warn!("dropped {loops} social self-loops");
    }
    let dup_u = dedup_pairs(&mut dataset.user_item);
    let dup_g = dedup_pairs(&mut dataset.group_item);
    if dup_u + dup_g > 0 {
        log::warn!("dropped {dup_u} duplicate user-item and {dup_g} duplicate group-item rows");
    }
    let singletons = dataset.memberships.iter().filter(|m| m.len() == 1).count();
    if singletons > 0 {
        log::warn!("{singletons} groups have a single member");
    }
    dataset.validate()?;
    Ok(LoadedDataset {
        dataset,
        ids: IdMap {
            users: users.names,
            items: items.names,
            groups: groups.names,
        },
    })
}

/// Writes the dataset as the four TSV files using raw IDs from `ids`.
pub fn write_dataset(dir: &Path, ds: &InteractionDataset, ids: &IdMap) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, rows: Vec<(&str, &str)>| -> Result<()> {
        let path = dir.join(name);
        let mut buf = Vec::new();
        for (a, b) in rows {
            writeln!(buf, "{a}\t{b}").expect("write to Vec");
        }
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))
    };
    let u = |i: usize| ids.users[i].as_str();
    let v = |i: usize| ids.items[i].as_str();
    let g = |i: usize| ids.groups[i].as_str();
    write(SOCIAL_FILE, ds.social_edges.iter().map(|&(a, b)| (u(a), u(b))).collect())?;
    write(USER_ITEM_FILE, ds.user_item.iter().map(|&(a, b)| (u(a), v(b))).collect())?;
    write(
        MEMBERS_FILE,
        ds.memberships
            .iter()
            .enumerate()
            .flat_map(|(gi, ms)| ms.iter().map(move |&m| (gi, m)))
            .map(|(gi, m)| (g(gi), u(m)))
            .collect(),
    )?;
    write(GROUP_ITEM_FILE, ds.group_item.iter().map(|&(a, b)| (g(a), v(b))).collect())?;
    Ok(())
}

/// SHA-256 over the four data files, in read order, as lowercase hex.
pub fn dataset_fingerprint(dir: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for name in DATA_FILES {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        hasher.update(name.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}
