//! File formats: binary voxel grids and JSON scenes and benchmark configs.

mod config_file;
mod grid_file;
mod scene_file;

pub use config_file::{load_config, parse_config, ConfigFile, NoiseFile, RangeFile};
pub use grid_file::{
    decode_grid, encode_grid, read_grid, rle_runs, write_grid, Encoding, GRID_MAGIC, GRID_VERSION, HEADER_LEN,
};
pub use scene_file::{
    load_scene, parse_scene, save_scene, AgentFile, GeometryFile, LabelRef, MeshFile, ObbFile, ObjectFile, PoseFile,
    SceneFile, SensorFile,
};
