//! Dataset manifests: which frames exist, how they split, and where each
//! sensor's clouds live.
//!
//! ```text
//! # dataset=<name>
//! annotations <path>
//! split train <frame_id> <frame_id> ...
//! split test <frame_id> ...
//! group <sensor> <dir>
//! ```
//!
//! Frame ids may appear in at most one split. Each `group` names a sensor
//! and a directory expected to hold one `<frame_id>.bin` cloud per frame;
//! groups share the split structure, which is what makes the layout
//! cross-sensor. Paths resolve relative to the manifest's directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::geom::Category;

use super::{annotations, IoError};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestGroup {
    pub sensor: String,
    /// Directory of this sensor's clouds, as written in the file.
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub name: String,
    /// Annotation file path as written, if any.
    pub annotations: Option<PathBuf>,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub groups: Vec<ManifestGroup>,
    /// Directory the relative paths resolve against (the manifest file's
    /// parent after reading, `.` for manifests built in memory).
    root: PathBuf,
}

impl Manifest {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            annotations: None,
            train: Vec::new(),
            test: Vec::new(),
            groups: Vec::new(),
            root: PathBuf::from("."),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Resolved annotation file path.
    pub fn annotations_file(&self) -> Option<PathBuf> {
        self.annotations.as_ref().map(|p| self.root.join(p))
    }

    /// Resolved cloud directory of a group.
    pub fn group_dir(&self, group: &ManifestGroup) -> PathBuf {
        self.root.join(&group.dir)
    }

    /// All frame ids, train first, then test.
    pub fn frame_ids(&self) -> impl Iterator<Item = &str> {
        self.train.iter().chain(&self.test).map(String::as_str)
    }

    fn validate(&self, path: &Path) -> Result<(), IoError> {
        let record_err = |detail: String| IoError::MalformedRecord {
            path: path.to_path_buf(),
            detail,
        };
        if self.name.trim().is_empty() {
            return Err(record_err("dataset name is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for id in self.frame_ids() {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(record_err(format!("bad frame id {id:?}")));
            }
            if !seen.insert(id) {
                return Err(record_err(format!(
                    "frame id {id:?} appears in more than one split position"
                )));
            }
        }
        let mut sensors = BTreeSet::new();
        for g in &self.groups {
            if g.sensor.is_empty() || g.sensor.chars().any(char::is_whitespace) {
                return Err(record_err(format!("bad sensor name {:?}", g.sensor)));
            }
            if !sensors.insert(&g.sensor) {
                return Err(record_err(format!("duplicate group for sensor {:?}", g.sensor)));
            }
        }
        Ok(())
    }
}

/// Parses a manifest. Group directories are recorded, not checked against
/// the filesystem.
pub fn read_manifest(path: &Path) -> Result<Manifest, IoError> {
    let text = fs::read_to_string(path)?;
    let header_err = |detail: String| IoError::MalformedHeader {
        path: path.to_path_buf(),
        detail,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| header_err("empty file".into()))?;
    let name = header
        .strip_prefix("# dataset=")
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .ok_or_else(|| header_err(format!("expected `# dataset=<name>`, got {header:?}")))?;
    let mut manifest = Manifest::new(name);
    manifest.root = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();

    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_err = |detail: String| IoError::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "annotations" => {
                if fields.len() != 2 {
                    return Err(line_err("expected `annotations <path>`".into()));
                }
                if manifest.annotations.is_some() {
                    return Err(line_err("duplicate annotations line".into()));
                }
                manifest.annotations = Some(PathBuf::from(fields[1]));
            }
            "split" => {
                let ids = fields[2..].iter().map(|s| s.to_string());
                match fields.get(1) {
                    Some(&"train") => manifest.train.extend(ids),
                    Some(&"test") => manifest.test.extend(ids),
                    other => {
                        return Err(line_err(format!(
                            "unknown split {:?} (expected train or test)",
                            other.copied().unwrap_or("")
                        )))
                    }
                }
            }
            "group" => {
                if fields.len() != 3 {
                    return Err(line_err("expected `group <sensor> <dir>`".into()));
                }
                manifest.groups.push(ManifestGroup {
                    sensor: fields[1].to_string(),
                    dir: PathBuf::from(fields[2]),
                });
            }
            other => return Err(line_err(format!("unknown directive {other:?}"))),
        }
    }
    manifest.validate(path)?;
    Ok(manifest)
}

/// Writes a manifest after checking its invariants. The `root` field is a
/// read-side concern and is not written.
pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), IoError> {
    manifest.validate(path)?;
    let mut text = format!("# dataset={}\n", manifest.name);
    if let Some(a) = &manifest.annotations {
        text.push_str(&format!("annotations {}\n", a.display()));
    }
    for (which, ids) in [("train", &manifest.train), ("test", &manifest.test)] {
        if !ids.is_empty() {
            text.push_str(&format!("split {} {}\n", which, ids.join(" ")));
        }
    }
    for g in &manifest.groups {
        text.push_str(&format!("group {} {}\n", g.sensor, g.dir.display()));
    }
    fs::write(path, text)?;
    Ok(())
}

/// Box and frame counts over the frames a manifest actually lists.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub dataset: String,
    pub train_frames: usize,
    pub test_frames: usize,
    pub sensor_groups: usize,
    /// Ground-truth boxes per category (in [`Category::ALL`] order) across
    /// all listed frames.
    pub category_counts: [usize; Category::COUNT],
    /// Listed frames that have at least one ground-truth box.
    pub annotated_frames: usize,
}

/// Computes counts from the manifest's annotation file, restricted to the
/// frames in its splits. A manifest without annotations yields zero counts.
pub fn dataset_stats(manifest: &Manifest) -> Result<DatasetStats, IoError> {
    let mut category_counts = [0usize; Category::COUNT];
    let mut annotated_frames = 0;
    if let Some(path) = manifest.annotations_file() {
        let ground_truth = annotations::read_ground_truth(&path)?;
        let listed: BTreeSet<&str> = manifest.frame_ids().collect();
        for (frame, boxes) in &ground_truth {
            if !listed.contains(frame.as_str()) || boxes.is_empty() {
                continue;
            }
            annotated_frames += 1;
            for b in boxes {
                category_counts[b.category.index()] += 1;
            }
        }
    }
    Ok(DatasetStats {
        dataset: manifest.name.clone(),
        train_frames: manifest.train.len(),
        test_frames: manifest.test.len(),
        sensor_groups: manifest.groups.len(),
        category_counts,
        annotated_frames,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use crate::geom::ObjectAnnotation;

    use super::*;

    fn sample_manifest() -> Manifest {
        let mut m = Manifest::new("mini");
        m.annotations = Some(PathBuf::from("boxes.txt"));
        m.train = vec!["000000".into(), "000001".into()];
        m.test = vec!["000002".into()];
        m.groups = vec![
            ManifestGroup { sensor: "vld16".into(), dir: PathBuf::from("clouds/vld16") },
            ManifestGroup { sensor: "vld64".into(), dir: PathBuf::from("clouds/vld64") },
        ];
        m
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.txt");
        let manifest = sample_manifest();
        write_manifest(&path, &manifest).unwrap();
        let loaded = read_manifest(&path).unwrap();
        assert_eq!(loaded.name, manifest.name);
        assert_eq!(loaded.annotations, manifest.annotations);
        assert_eq!(loaded.train, manifest.train);
        assert_eq!(loaded.test, manifest.test);
        assert_eq!(loaded.groups, manifest.groups);
        assert_eq!(loaded.root(), dir.path());
        assert_eq!(
            loaded.annotations_file().unwrap(),
            dir.path().join("boxes.txt")
        );
    }

    #[test]
    fn splits_must_be_disjoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.txt");
        fs::write(
            &path,
            "# dataset=mini\nsplit train a b\nsplit test b\n",
        )
        .unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(IoError::MalformedRecord { .. })
        ));
        let mut overlapping = sample_manifest();
        overlapping.test.push("000000".into());
        assert!(write_manifest(&path, &overlapping).is_err());
    }

    #[test]
    fn malformed_manifests_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.txt");
        for bad in [
            "",
            "dataset mini\n",
            "# dataset=\n",
        ] {
            fs::write(&path, bad).unwrap();
            assert!(
                matches!(read_manifest(&path), Err(IoError::MalformedHeader { .. })),
                "accepted header {bad:?}"
            );
        }
        for bad in [
            "# dataset=m\nannotations a.txt\nannotations b.txt\n",
            "# dataset=m\nsplit validation a\n",
            "# dataset=m\ngroup vld16\n",
            "# dataset=m\nteleporter x\n",
        ] {
            fs::write(&path, bad).unwrap();
            assert!(
                matches!(read_manifest(&path), Err(IoError::MalformedLine { .. })),
                "accepted {bad:?}"
            );
        }
        fs::write(&path, "# dataset=m\ngroup s a\ngroup s b\n").unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(IoError::MalformedRecord { .. })
        ));
    }

    #[test]
    fn stats_count_boxes_over_listed_frames_only() {
        let dir = tempfile::tempdir().unwrap();
        let car = ObjectAnnotation::new(Category::Car, 10.0, 0.0, 0.0, 2.0, 4.0, 1.5, 0.0).unwrap();
        let pedestrian =
            ObjectAnnotation::new(Category::Pedestrian, 5.0, 1.0, 0.0, 0.6, 0.6, 1.7, 0.0).unwrap();
        let mut frames = BTreeMap::new();
        for id in ["000000", "000001", "000002"] {
            frames.insert(id.to_string(), vec![car, car]);
        }
        // A frame outside the splits must not count.
        frames.insert("999999".to_string(), vec![pedestrian]);
        annotations::write_ground_truth(&dir.path().join("boxes.txt"), &frames).unwrap();
        let path = dir.path().join("dataset.txt");
        write_manifest(&path, &sample_manifest()).unwrap();
        let manifest = read_manifest(&path).unwrap();
        let stats = dataset_stats(&manifest).unwrap();
        assert_eq!(stats.dataset, "mini");
        assert_eq!(stats.train_frames, 2);
        assert_eq!(stats.test_frames, 1);
        assert_eq!(stats.sensor_groups, 2);
        assert_eq!(stats.category_counts[Category::Car.index()], 6);
        assert_eq!(stats.category_counts[Category::Pedestrian.index()], 0);
        assert_eq!(stats.annotated_frames, 3);
    }

    #[test]
    fn stats_for_a_bare_manifest_are_zero() {
        let manifest = Manifest::new("bare");
        let stats = dataset_stats(&manifest).unwrap();
        assert_eq!(stats.train_frames, 0);
        assert_eq!(stats.test_frames, 0);
        assert_eq!(stats.category_counts, [0; Category::COUNT]);
        assert_eq!(stats.annotated_frames, 0);
    }
}
