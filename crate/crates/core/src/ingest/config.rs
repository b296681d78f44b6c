//! Key-value text configs: label maps, sensor geometry, class weights.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::tokenize_config;
use crate::model::{ClassId, ClassWeights, SensorConfig};
use crate::scalar::Scalar;

const SEMANTIC_KITTI_LABELS: &str = include_str!("../../assets/labels-semantic-kitti.cfg");

/// Maps raw on-disk label ids into a compact training id space and records
/// which training classes are individually annotated objects ("things").
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelMap {
    raw_to_train: BTreeMap<u32, ClassId>,
    thing_classes: BTreeSet<ClassId>,
    class_names: BTreeMap<ClassId, String>,
}

impl LabelMap {
    /// The shipped SemanticKITTI mapping: 19 training classes, things 1..=8.
    pub fn semantic_kitti() -> Self {
        Self::parse(SEMANTIC_KITTI_LABELS).expect("embedded label map parses")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::format(path, msg),
            other => other,
        })
    }

    /// Directives: `remap RAW TRAIN`, `name TRAIN NAME`, `thing TRAIN`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = LabelMap::default();
        for (line, tokens) in tokenize_config(text) {
            match tokens.as_slice() {
                ["remap", raw, train] => {
                    let raw = parse_u32(raw, line)?;
                    let train = parse_u32(train, line)?;
                    if map.raw_to_train.insert(raw, train).is_some() {
                        return Err(Error::Config(format!(
                            "line {line}: duplicate remap for raw id {raw}"
                        )));
                    }
                }
                ["name", train, name] => {
                    let train = parse_u32(train, line)?;
                    if map.class_names.insert(train, (*name).to_owned()).is_some() {
                        return Err(Error::Config(format!(
                            "line {line}: duplicate name for class {train}"
                        )));
                    }
                }
                ["thing", train] => {
                    let train = parse_u32(train, line)?;
                    map.thing_classes.insert(train);
                }
                _ => {
                    return Err(Error::Config(format!(
                        "line {line}: unknown label map directive `{}`",
                        tokens.join(" ")
                    )))
                }
            }
        }
        Ok(map)
    }

    /// Training id for a raw id; `None` for ids absent from the map.
    pub fn train_id(&self, raw: u32) -> Option<ClassId> {
        self.raw_to_train.get(&raw).copied()
    }

    /// Smallest raw id that remaps to `train`, used when writing label files.
    pub fn raw_for_train(&self, train: ClassId) -> Option<u32> {
        self.raw_to_train
            .iter()
            .find(|(_, &t)| t == train)
            .map(|(&raw, _)| raw)
    }

    pub fn thing_classes(&self) -> &BTreeSet<ClassId> {
        &self.thing_classes
    }

    pub fn name_of(&self, class: ClassId) -> Option<&str> {
        self.class_names.get(&class).map(String::as_str)
    }

    pub fn class_for_name(&self, name: &str) -> Option<ClassId> {
        self.class_names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(&id, _)| id)
    }

    /// Every nonzero training id the map mentions (remap targets, names,
    /// things). Class 0 is reserved for unlabeled.
    pub fn classes(&self) -> BTreeSet<ClassId> {
        self.raw_to_train
            .values()
            .copied()
            .chain(self.class_names.keys().copied())
            .chain(self.thing_classes.iter().copied())
            .filter(|&c| c != 0)
            .collect()
    }
}

/// Load sensor geometry from a key-value file. Missing keys take the
/// defaults (2048 x 64, +3 deg / -25 deg, clamp rows).
pub fn load_sensor_config<S: Scalar>(path: impl AsRef<Path>) -> Result<SensorConfig<S>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sensor_config(&text)
}

/// Keys: `width`, `height`, `fov_up`, `fov_down`, `drop_out_of_fov`.
pub fn parse_sensor_config<S: Scalar>(text: &str) -> Result<SensorConfig<S>> {
    let defaults = SensorConfig::<S>::default();
    let mut width = defaults.width;
    let mut height = defaults.height;
    let mut fov_up = defaults.fov_up_deg;
    let mut fov_down = defaults.fov_down_deg;
    let mut drop = defaults.drop_out_of_fov;

    for (line, tokens) in tokenize_config(text) {
        match tokens.as_slice() {
            ["width", v] => width = parse_num::<usize>(v, line)?,
            ["height", v] => height = parse_num::<usize>(v, line)?,
            ["fov_up", v] => fov_up = S::from_f64_lossy(parse_num::<f64>(v, line)?),
            ["fov_down", v] => fov_down = S::from_f64_lossy(parse_num::<f64>(v, line)?),
            ["drop_out_of_fov", v] => drop = parse_bool(v, line)?,
            _ => {
                return Err(Error::Config(format!(
                    "line {line}: unknown sensor config directive `{}`",
                    tokens.join(" ")
                )))
            }
        }
    }
    SensorConfig::new(width, height, fov_up, fov_down, drop)
}

/// Load a class-weight table. Each line is `CLASS WEIGHT` where CLASS is a
/// training id or a name from the label map.
pub fn load_class_weights<S: Scalar>(
    path: impl AsRef<Path>,
    map: &LabelMap,
) -> Result<ClassWeights<S>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_class_weights(&text, map)
}

pub fn parse_class_weights<S: Scalar>(text: &str, map: &LabelMap) -> Result<ClassWeights<S>> {
    let mut table = BTreeMap::new();
    for (line, tokens) in tokenize_config(text) {
        let [key, value] = tokens.as_slice() else {
            return Err(Error::Config(format!(
                "line {line}: expected `CLASS WEIGHT`, got `{}`",
                tokens.join(" ")
            )));
        };
        let class = match key.parse::<u32>() {
            Ok(id) => id,
            Err(_) => map.class_for_name(key).ok_or_else(|| {
                Error::Config(format!("line {line}: unknown class name `{key}`"))
            })?,
        };
        let weight = S::from_f64_lossy(parse_num::<f64>(value, line)?);
        if !weight.is_finite() {
            return Err(Error::Config(format!(
                "line {line}: weight for class {class} is not finite"
            )));
        }
        if table.insert(class, weight).is_some() {
            return Err(Error::Config(format!(
                "line {line}: duplicate weight for class {class}"
            )));
        }
    }
    Ok(ClassWeights::new(table))
}

pub(crate) fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    LabelMap::from_file(path)
}

fn parse_u32(token: &str, line: usize) -> Result<u32> {
    parse_num::<u32>(token, line)
}

fn parse_num<T: std::str::FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .parse::<T>()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse `{token}`")))
}

fn parse_bool(token: &str, line: usize) -> Result<bool> {
    match token {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "line {line}: expected true/false, got `{token}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sensor_config_yields_defaults() {
        let cfg: SensorConfig<f64> = parse_sensor_config("").unwrap();
        assert_eq!((cfg.width, cfg.height), (2048, 64));
        assert_eq!((cfg.fov_up_deg, cfg.fov_down_deg), (3.0, -25.0));
        assert!(!cfg.drop_out_of_fov);
    }

    #[test]
    fn sensor_config_overrides_and_validation() {
        let cfg: SensorConfig<f64> =
            parse_sensor_config("width 512\nheight 64\n# comment\n").unwrap();
        assert_eq!((cfg.width, cfg.height), (512, 64));

        assert!(parse_sensor_config::<f64>("fov_up -30\nfov_down -25\n").is_err());
        assert!(parse_sensor_config::<f64>("widht 512\n").is_err());
    }

    #[test]
    fn semantic_kitti_map_remaps_known_ids() {
        let map = LabelMap::semantic_kitti();
        assert_eq!(map.train_id(10), Some(1)); // car
        assert_eq!(map.train_id(252), Some(1)); // moving car folds into car
        assert_eq!(map.train_id(40), Some(9)); // road
        assert_eq!(map.train_id(99), Some(0)); // other-object unlabels
        assert_eq!(map.train_id(12345), None);
        assert_eq!(map.name_of(4), Some("truck"));
        assert_eq!(map.class_for_name("bicyclist"), Some(7));
        assert_eq!(map.raw_for_train(1), Some(10));
        assert_eq!(map.classes().len(), 19);
    }

    #[test]
    fn class_weights_parse_by_name_and_id() {
        let map = LabelMap::semantic_kitti();
        let w: ClassWeights<f64> =
            parse_class_weights("motorcycle -1\n4 -1\nbicyclist -1\n", &map).unwrap();
        assert_eq!(w.weight(3), -1.0);
        assert_eq!(w.weight(4), -1.0);
        assert_eq!(w.weight(7), -1.0);
        assert_eq!(w.weight(1), 0.0);

        assert!(parse_class_weights::<f64>("flying-saucer 2\n", &map).is_err());
        assert!(parse_class_weights::<f64>("truck -1\ntruck 0\n", &map).is_err());
    }
}
