//! On-disk formats: scan/label binaries, key-value configs, and the
//! synthetic scan generator used for dataset-free testing.

mod config;
mod kitti;
mod synth;

pub use config::{
    load_class_weights, load_label_map, load_sensor_config, parse_class_weights,
    parse_sensor_config, LabelMap,
};
pub use kitti::{
    read_annotations, read_point_cloud, write_annotations, write_ground_truth_rows,
    write_point_cloud,
};
pub use synth::{
    generate_synthetic_scan, sample_occlusion_spec, ObjectShape, SynthObject, SynthSpec,
    SyntheticScan,
};

pub(crate) fn tokenize_config(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}
