//! Core domain types shared by every stage of the pipeline.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ingest::LabelMap;
use crate::scalar::Scalar;

/// Semantic class id in the remapped training space (0 = unlabeled).
pub type ClassId = u32;
/// Per-scan object instance id (0 = not part of any instance).
pub type InstanceId = u32;

/// Default numerical-stability constant for the contextual policies.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// One LiDAR return: Cartesian position in meters plus remission intensity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
    pub z: S,
    pub remission: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S, z: S, remission: S) -> Self {
        Point { x, y, z, remission }
    }

    /// Euclidean distance to the sensor origin.
    #[inline]
    pub fn range(&self) -> S {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn xyz(&self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.remission.is_finite()
    }
}

/// A scan in sensor firing order.
///
/// Point order matters: scan unfolding walks consecutive azimuths, and pixel
/// contention ties break toward the earlier index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<S> {
    pub points: Vec<Point<S>>,
}

impl<S: Scalar> PointCloud<S> {
    pub fn new(points: Vec<Point<S>>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point<S>> {
        self.points.iter()
    }
}

/// Per-point semantic class and instance ids, parallel to a [`PointCloud`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointAnnotations {
    pub semantic: Vec<ClassId>,
    pub instance: Vec<InstanceId>,
}

impl PointAnnotations {
    pub fn new(semantic: Vec<ClassId>, instance: Vec<InstanceId>) -> Result<Self> {
        if semantic.len() != instance.len() {
            return Err(Error::Structure(format!(
                "semantic ids ({}) and instance ids ({}) differ in length",
                semantic.len(),
                instance.len()
            )));
        }
        Ok(PointAnnotations { semantic, instance })
    }

    pub fn len(&self) -> usize {
        self.semantic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantic.is_empty()
    }
}

/// Sensor image geometry: raster dimensions and vertical field of view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorConfig<S> {
    /// Image columns.
    pub width: usize,
    /// Image rows.
    pub height: usize,
    /// Upward inclination limit, degrees.
    pub fov_up_deg: S,
    /// Downward inclination limit, degrees (negative for below-horizon).
    pub fov_down_deg: S,
    /// Mark points outside `[fov_down, fov_up]` invalid instead of clamping
    /// their row.
    pub drop_out_of_fov: bool,
}

impl<S: Scalar> SensorConfig<S> {
    pub fn new(
        width: usize,
        height: usize,
        fov_up_deg: S,
        fov_down_deg: S,
        drop_out_of_fov: bool,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if fov_up_deg <= fov_down_deg {
            return Err(Error::Config(format!(
                "fov_up ({fov_up_deg}) must exceed fov_down ({fov_down_deg})"
            )));
        }
        let cfg = SensorConfig {
            width,
            height,
            fov_up_deg,
            fov_down_deg,
            drop_out_of_fov,
        };
        if cfg.fov_span_rad() <= S::zero() {
            return Err(Error::Config("vertical field of view is empty".into()));
        }
        Ok(cfg)
    }

    /// |fov_down| in radians, the offset term of the row mapping.
    #[inline]
    pub fn fov_down_abs_rad(&self) -> S {
        self.fov_down_deg.abs().to_radians()
    }

    /// Vertical span |fov_up| + |fov_down| in radians.
    #[inline]
    pub fn fov_span_rad(&self) -> S {
        (self.fov_up_deg.abs() + self.fov_down_deg.abs()).to_radians()
    }

    #[inline]
    pub fn fov_up_rad(&self) -> S {
        self.fov_up_deg.to_radians()
    }

    #[inline]
    pub fn fov_down_rad(&self) -> S {
        self.fov_down_deg.to_radians()
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

impl<S: Scalar> Default for SensorConfig<S> {
    /// 64-beam spinning sensor defaults: 64 x 2048, +3 deg to -25 deg.
    fn default() -> Self {
        SensorConfig {
            width: 2048,
            height: 64,
            fov_up_deg: S::from_f64_lossy(3.0),
            fov_down_deg: S::from_f64_lossy(-25.0),
            drop_out_of_fov: false,
        }
    }
}

/// Per-class weight table for the class-weighted policy.
///
/// Classes absent from the table weigh 0. Negative weights are allowed and
/// make their points beat every positive-key candidate in a pixel.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassWeights<S> {
    table: BTreeMap<ClassId, S>,
}

impl<S: Scalar> ClassWeights<S> {
    pub fn new(table: BTreeMap<ClassId, S>) -> Self {
        ClassWeights { table }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ClassId, S)>) -> Self {
        ClassWeights {
            table: pairs.into_iter().collect(),
        }
    }

    /// Weight for a class; absent classes weigh zero.
    #[inline]
    pub fn weight(&self, class: ClassId) -> S {
        self.table.get(&class).copied().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, S)> + '_ {
        self.table.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Every `weight + epsilon` must be nonzero or the selection key would
    /// divide by zero.
    pub fn validate_against_epsilon(&self, epsilon: S) -> Result<()> {
        for (&class, &w) in &self.table {
            if w + epsilon == S::zero() {
                return Err(Error::Config(format!(
                    "class {class} weight {w} cancels epsilon {epsilon} exactly"
                )));
            }
        }
        Ok(())
    }
}

/// Which point wins a contested pixel.
#[derive(Clone, Debug, PartialEq)]
pub enum SelectionPolicy<S> {
    /// Keep the return closest to the sensor.
    Depth,
    /// Divide depth by normalized instance centerness so instance interiors
    /// outrank boundary and background returns. Needs annotations.
    Cap { epsilon: S },
    /// Divide depth by a per-class weight. Needs annotations and a weight
    /// table.
    Cwap { epsilon: S, weights: ClassWeights<S> },
}

impl<S: Scalar> SelectionPolicy<S> {
    pub fn depth() -> Self {
        SelectionPolicy::Depth
    }

    pub fn cap(epsilon: S) -> Result<Self> {
        validate_epsilon(epsilon)?;
        Ok(SelectionPolicy::Cap { epsilon })
    }

    pub fn cwap(epsilon: S, weights: ClassWeights<S>) -> Result<Self> {
        validate_epsilon(epsilon)?;
        weights.validate_against_epsilon(epsilon)?;
        Ok(SelectionPolicy::Cwap { epsilon, weights })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::Depth => "depth",
            SelectionPolicy::Cap { .. } => "cap",
            SelectionPolicy::Cwap { .. } => "cwap",
        }
    }

    pub fn epsilon(&self) -> Option<S> {
        match self {
            SelectionPolicy::Depth => None,
            SelectionPolicy::Cap { epsilon } | SelectionPolicy::Cwap { epsilon, .. } => {
                Some(*epsilon)
            }
        }
    }

    /// True for the policies that read ground-truth annotations.
    pub fn needs_annotations(&self) -> bool {
        !matches!(self, SelectionPolicy::Depth)
    }
}

fn validate_epsilon<S: Scalar>(epsilon: S) -> Result<()> {
    if !(epsilon > S::zero()) || !epsilon.is_finite() {
        return Err(Error::Config(format!(
            "epsilon must be a positive finite value, got {epsilon}"
        )));
    }
    Ok(())
}

/// A cleaned frame: every surviving point is finite and annotations, when
/// present, stay index-aligned with the cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedFrame<S> {
    cloud: PointCloud<S>,
    annotations: Option<PointAnnotations>,
    removed: usize,
}

impl<S: Scalar> ValidatedFrame<S> {
    pub fn cloud(&self) -> &PointCloud<S> {
        &self.cloud
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.cloud.points
    }

    pub fn annotations(&self) -> Option<&PointAnnotations> {
        self.annotations.as_ref()
    }

    /// Count of non-finite points dropped during validation.
    pub fn removed(&self) -> usize {
        self.removed
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }
}

/// Drop non-finite points (and their annotations), preserving firing order.
///
/// Non-finite returns carry no recoverable geometry and would poison the
/// per-pixel min reductions downstream, so they are removed rather than
/// clamped.
pub fn validate_frame<S: Scalar>(
    cloud: PointCloud<S>,
    annotations: Option<PointAnnotations>,
) -> Result<ValidatedFrame<S>> {
    if let Some(ann) = &annotations {
        if ann.len() != cloud.len() {
            return Err(Error::Structure(format!(
                "cloud has {} points but annotations cover {}",
                cloud.len(),
                ann.len()
            )));
        }
    }

    let keep: Vec<bool> = cloud.points.iter().map(Point::is_finite).collect();
    let removed = keep.iter().filter(|&&k| !k).count();

    if removed == 0 {
        return Ok(ValidatedFrame {
            cloud,
            annotations,
            removed: 0,
        });
    }

    let points = cloud
        .points
        .into_iter()
        .zip(&keep)
        .filter_map(|(p, &k)| k.then_some(p))
        .collect();
    let annotations = annotations.map(|ann| {
        let filter = |v: Vec<u32>| -> Vec<u32> {
            v.into_iter()
                .zip(&keep)
                .filter_map(|(x, &k)| k.then_some(x))
                .collect()
        };
        PointAnnotations {
            semantic: filter(ann.semantic),
            instance: filter(ann.instance),
        }
    });

    Ok(ValidatedFrame {
        cloud: PointCloud::new(points),
        annotations,
        removed,
    })
}

/// The configured instance ("thing") class ids of a label map.
pub fn instance_class_set(map: &LabelMap) -> BTreeSet<ClassId> {
    map.thing_classes().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, z: f64) -> Point<f64> {
        Point::new(x, y, z, 0.5)
    }

    #[test]
    fn validate_passes_finite_frame_through() {
        let cloud = PointCloud::new(vec![pt(1.0, 0.0, 0.0), pt(0.0, 2.0, 0.0), pt(3.0, 3.0, 3.0)]);
        let ann = PointAnnotations::new(vec![1, 2, 3], vec![0, 0, 0]).unwrap();
        let frame = validate_frame(cloud.clone(), Some(ann)).unwrap();
        assert_eq!(frame.len(), 3);
        assert_eq!(frame.removed(), 0);
        assert_eq!(frame.cloud(), &cloud);
    }

    #[test]
    fn validate_drops_non_finite_point_and_keeps_order() {
        let cloud = PointCloud::new(vec![
            pt(1.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
            Point::new(f64::NAN, 0.0, 0.0, 0.0),
            pt(4.0, 0.0, 0.0),
            pt(5.0, 0.0, 0.0),
        ]);
        let ann = PointAnnotations::new(vec![1, 2, 3, 4, 5], vec![0; 5]).unwrap();
        let frame = validate_frame(cloud, Some(ann)).unwrap();
        assert_eq!(frame.len(), 4);
        assert_eq!(frame.removed(), 1);
        let xs: Vec<f64> = frame.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![1.0, 2.0, 4.0, 5.0]);
        assert_eq!(frame.annotations().unwrap().semantic, vec![1, 2, 4, 5]);
    }

    #[test]
    fn validate_rejects_length_mismatch() {
        let cloud = PointCloud::new(vec![pt(1.0, 0.0, 0.0); 10]);
        let ann = PointAnnotations::new(vec![0; 9], vec![0; 9]).unwrap();
        assert!(matches!(
            validate_frame(cloud, Some(ann)),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let cloud = PointCloud::new(vec![
            pt(1.0, 0.0, 0.0),
            Point::new(f64::INFINITY, 0.0, 0.0, 0.0),
            pt(2.0, 0.0, 0.0),
        ]);
        let once = validate_frame(cloud, None).unwrap();
        let twice = validate_frame(once.cloud().clone(), None).unwrap();
        assert_eq!(once.cloud(), twice.cloud());
        assert_eq!(twice.removed(), 0);
    }

    #[test]
    fn sensor_config_rejects_inverted_fov() {
        assert!(SensorConfig::new(512, 64, -30.0f64, -25.0, false).is_err());
        assert!(SensorConfig::new(0, 64, 3.0f64, -25.0, false).is_err());
        assert!(SensorConfig::new(512, 64, 3.0f64, -25.0, false).is_ok());
    }

    #[test]
    fn default_sensor_matches_shipped_values() {
        let cfg = SensorConfig::<f64>::default();
        assert_eq!((cfg.width, cfg.height), (2048, 64));
        assert_eq!((cfg.fov_up_deg, cfg.fov_down_deg), (3.0, -25.0));
    }

    #[test]
    fn policy_validation() {
        assert!(SelectionPolicy::cap(1e-6f64).is_ok());
        assert!(SelectionPolicy::cap(0.0f64).is_err());
        assert!(SelectionPolicy::cap(-1.0f64).is_err());

        // A weight that exactly cancels epsilon is rejected up front.
        let w = ClassWeights::from_pairs([(3u32, -1e-6f64)]);
        assert!(SelectionPolicy::cwap(1e-6, w).is_err());
        let w = ClassWeights::from_pairs([(3u32, -1.0f64)]);
        assert!(SelectionPolicy::cwap(1e-6, w).is_ok());
    }

    #[test]
    fn class_weights_default_to_zero() {
        let w: ClassWeights<f64> = ClassWeights::from_pairs([(4, -1.0)]);
        assert_eq!(w.weight(4), -1.0);
        assert_eq!(w.weight(17), 0.0);
    }

    #[test]
    fn instance_class_set_from_maps() {
        let map = LabelMap::semantic_kitti();
        let things = instance_class_set(&map);
        assert_eq!(things, (1..=8).collect::<BTreeSet<u32>>());

        let empty = LabelMap::parse("remap 10 1\nname 1 car\n").unwrap();
        assert!(instance_class_set(&empty).is_empty());

        let custom = LabelMap::parse("remap 7 12\nname 12 robot\nthing 12\n").unwrap();
        assert!(instance_class_set(&custom).contains(&12));
    }
}
