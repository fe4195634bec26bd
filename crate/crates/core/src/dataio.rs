//! MNIST-family datasets: IDX parsing and stratified subsets.
//!
//! Parsing works on byte slices so it stays usable without `std`; reading the
//! files from disk lives in the companion crate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::IdxError;
use crate::rng::{Purpose, Stream};
use crate::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_LEN: usize = IMAGE_SIDE * IMAGE_SIDE;
pub const NUM_CLASSES: usize = 10;

/// Images with labels. Pixels are kept as the raw bytes and scaled by 1/255
/// on access, so every feature lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImageSet {
    name: String,
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl LabeledImageSet {
    /// `pixels` holds `labels.len()` row-major 28×28 images back to back.
    pub fn new(name: impl Into<String>, pixels: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if pixels.len() != labels.len() * IMAGE_LEN {
            return Err(Error::LengthMismatch { expected: labels.len() * IMAGE_LEN, got: pixels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(Self { name: name.into(), pixels, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn raw_image(&self, i: usize) -> &[u8] {
        &self.pixels[i * IMAGE_LEN..(i + 1) * IMAGE_LEN]
    }

    /// Image `i` as 784 features in `[0, 1]`.
    pub fn image(&self, i: usize) -> Vec<f64> {
        self.raw_image(i).iter().map(|&p| p as f64 / 255.0).collect()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// New set holding items `indices` in the given order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Self {
        let mut pixels = Vec::with_capacity(indices.len() * IMAGE_LEN);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            pixels.extend_from_slice(self.raw_image(i));
            labels.push(self.labels[i]);
        }
        Self { name: name.into(), pixels, labels }
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> core::result::Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated { expected: offset + 4, found: bytes.len() })
}

fn check_magic(bytes: &[u8], expected: u32) -> core::result::Result<(), IdxError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

fn body(bytes: &[u8], header: usize, len: usize) -> core::result::Result<&[u8], IdxError> {
    let end = header + len;
    if bytes.len() < end {
        return Err(IdxError::Truncated { expected: end, found: bytes.len() });
    }
    Ok(&bytes[header..end])
}

/// Parses an IDX image file (magic 0x803, 28×28). Returns the pixel bytes.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)?;
    let cols = read_u32(bytes, 12)?;
    if rows as usize != IMAGE_SIDE || cols as usize != IMAGE_SIDE {
        return Err(IdxError::BadDimensions { rows, cols }.into());
    }
    Ok(body(bytes, 16, count * IMAGE_LEN)?.to_vec())
}

/// Parses an IDX label file (magic 0x801).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(body(bytes, 8, count)?.to_vec())
}

/// Parses a matching pair of IDX image and label files.
pub fn parse_idx(name: impl Into<String>, images: &[u8], labels: &[u8]) -> Result<LabeledImageSet> {
    let pixels = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    let n_images = pixels.len() / IMAGE_LEN;
    if n_images != labels.len() {
        return Err(IdxError::CountMismatch { images: n_images, labels: labels.len() }.into());
    }
    LabeledImageSet::new(name, pixels, labels)
}

/// Serializes images back to the IDX container.
pub fn encode_idx_images(set: &LabeledImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + set.pixels.len());
    for v in [IMAGE_MAGIC, set.len() as u32, IMAGE_SIDE as u32, IMAGE_SIDE as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&set.pixels);
    out
}

pub fn encode_idx_labels(set: &LabeledImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + set.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.len() as u32).to_be_bytes());
    out.extend_from_slice(&set.labels);
    out
}

/// How many items per class to draw for each split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub seed: u64,
    /// Classes to keep, ascending. All ten by default.
    pub classes: Vec<u8>,
}

impl SplitSpec {
    pub fn new(per_class_train: usize, per_class_test: usize, seed: u64) -> Self {
        Self { per_class_train, per_class_test, seed, classes: (0..NUM_CLASSES as u8).collect() }
    }

    pub fn with_classes(mut self, classes: Vec<u8>) -> Self {
        self.classes = classes;
        self
    }

    /// 100 train and 25 test images per class.
    pub fn short(seed: u64) -> Self {
        Self::new(100, 25, seed)
    }
}

/// Uniform draw of `per_class` item indices from each class, without
/// replacement. Indices are returned in ascending order.
///
/// Class `c` uses the stream keyed `(seed, Split, split_id, c)`, so the draw
/// for one class does not depend on which other classes are requested.
pub fn stratified_indices(
    set: &LabeledImageSet,
    per_class: usize,
    classes: &[u8],
    seed: u64,
    split_id: u64,
) -> Result<Vec<usize>> {
    let mut chosen = Vec::with_capacity(per_class * classes.len());
    for &class in classes {
        if class as usize >= NUM_CLASSES {
            return Err(Error::InvalidLabel(class));
        }
        let mut pool: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] == class).collect();
        if per_class == 0 || per_class > pool.len() {
            return Err(Error::InsufficientClass { class, requested: per_class, available: pool.len() });
        }
        let mut rng = Stream::derive(seed, Purpose::Split, split_id, class as u64);
        for k in 0..per_class {
            let j = k + rng.below((pool.len() - k) as u64) as usize;
            pool.swap(k, j);
        }
        chosen.extend_from_slice(&pool[..per_class]);
    }
    chosen.sort_unstable();
    chosen.dedup();
    Ok(chosen)
}

/// Draws the train subset from `train` and the test subset from `test`.
pub fn stratified_subset(
    train: &LabeledImageSet,
    test: &LabeledImageSet,
    spec: &SplitSpec,
) -> Result<(LabeledImageSet, LabeledImageSet)> {
    let tr = stratified_indices(train, spec.per_class_train, &spec.classes, spec.seed, 0)?;
    let te = stratified_indices(test, spec.per_class_test, &spec.classes, spec.seed, 1)?;
    let name = |base: &str, split: &str| alloc::format!("{base}-{split}");
    Ok((train.select(name(train.name(), "subset"), &tr), test.select(name(test.name(), "subset"), &te)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(labels: &[u8]) -> LabeledImageSet {
        let pixels = labels
            .iter()
            .enumerate()
            .flat_map(|(i, _)| (0..IMAGE_LEN).map(move |p| ((i * 7 + p) % 256) as u8))
            .collect();
        LabeledImageSet::new("synthetic", pixels, labels.to_vec()).unwrap()
    }

    #[test]
    fn round_trip() {
        let set = synthetic(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let back = parse_idx("synthetic", &encode_idx_images(&set), &encode_idx_labels(&set)).unwrap();
        assert_eq!(back, set);
        assert!(back.image(2).iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert_eq!(back.image(0)[255], 1.0);
    }

    #[test]
    fn format_errors() {
        let set = synthetic(&[0, 1, 2]);
        let imgs = encode_idx_images(&set);
        let labs = encode_idx_labels(&set);
        assert!(matches!(
            parse_idx_images(&labs),
            Err(Error::Idx(IdxError::BadMagic { expected: IMAGE_MAGIC, found: LABEL_MAGIC }))
        ));
        assert!(matches!(parse_idx_images(&imgs[..imgs.len() - 1]), Err(Error::Idx(IdxError::Truncated { .. }))));
        assert!(matches!(parse_idx_labels(&labs[..3]), Err(Error::Idx(IdxError::Truncated { .. }))));
        let short = synthetic(&[0, 1]);
        assert!(matches!(
            parse_idx("x", &imgs, &encode_idx_labels(&short)),
            Err(Error::Idx(IdxError::CountMismatch { images: 3, labels: 2 }))
        ));
        let mut wide = imgs.clone();
        wide[15] = 29;
        assert!(matches!(parse_idx_images(&wide), Err(Error::Idx(IdxError::BadDimensions { rows: 28, cols: 29 }))));
        let mut bad_label = labs.clone();
        bad_label[8] = 10;
        assert_eq!(parse_idx("x", &imgs, &bad_label), Err(Error::InvalidLabel(10)));
    }

    #[test]
    fn exhaustive_draw_takes_every_item() {
        let labels: Vec<u8> = (0..50).map(|i| (i % 5) as u8).collect();
        let set = synthetic(&labels);
        let idx = stratified_indices(&set, 10, &[0, 1, 2, 3, 4], 9, 0).unwrap();
        assert_eq!(idx, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn insufficient_class() {
        let set = synthetic(&[0, 0, 1]);
        assert_eq!(
            stratified_indices(&set, 2, &[0, 1], 1, 0),
            Err(Error::InsufficientClass { class: 1, requested: 2, available: 1 })
        );
        assert!(stratified_indices(&set, 1, &[0, 1, 2], 1, 0).is_err());
    }

    #[test]
    fn subset_is_deterministic_and_uniform() {
        let labels: Vec<u8> = (0..400).map(|i| ((i * 7) % 10) as u8).collect();
        let set = synthetic(&labels);
        let spec = SplitSpec::new(12, 5, 7);
        let (a_tr, a_te) = stratified_subset(&set, &set, &spec).unwrap();
        let (b_tr, b_te) = stratified_subset(&set, &set, &spec).unwrap();
        assert_eq!(a_tr, b_tr);
        assert_eq!(a_te, b_te);
        assert_eq!(a_tr.class_counts(), [12; 10]);
        assert_eq!(a_te.class_counts(), [5; 10]);
        let (c_tr, _) = stratified_subset(&set, &set, &SplitSpec::new(12, 5, 8)).unwrap();
        assert_ne!(a_tr, c_tr);
    }

    proptest! {
        #[test]
        fn histogram_exact_and_no_repeats(seed in any::<u64>(), per in 1usize..8, n_classes in 1usize..10) {
            let labels: Vec<u8> = (0..300).map(|i| ((i * 3 + i / 7) % 10) as u8).collect();
            let set = synthetic(&labels);
            let classes: Vec<u8> = (0..n_classes as u8).collect();
            let idx = stratified_indices(&set, per, &classes, seed, 0).unwrap();
            prop_assert_eq!(idx.len(), per * n_classes);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            let sub = set.select("s", &idx);
            let counts = sub.class_counts();
            for c in 0..10 {
                prop_assert_eq!(counts[c], if c < n_classes { per } else { 0 });
            }
        }
    }
}
