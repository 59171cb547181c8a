//! Images, label maps, dataset manifests, synthetic phantoms and training
//! point sampling.

mod codec;
mod image;
mod manifest;
mod phantom;
mod sampling;

pub use codec::{
    decode_gray, decode_pgm, encode_pgm, encode_png_gray, load_image, load_label_map,
    save_image, save_label_map, save_rgb_png, Raster,
};
pub use image::{GrayImage, LabelMap};
pub use manifest::{load_manifest, Dataset, DatasetManifest, LabeledImage, ManifestEntry};
pub use phantom::{
    generate_phantom, phantom_id, phantom_seed, phantom_suite, PhantomConfig, Texture,
};
pub use sampling::{sample_training_points, SampleSource, TrainingSet};
