//! Benchmark construction: CIFAR-100 binary records, the 8+4 superclass
//! plan, and the shortcut patch / mask interventions.
//!
//! Interventions work on canonical 8-bit images. Training code that applies
//! random crops or flips must do so before calling [`inject_patch`] so the
//! patch always lands in the same corner.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IMAGE_SIDE: usize = 32;
pub const CHANNELS: usize = 3;
pub const PIXEL_BYTES: usize = IMAGE_SIDE * IMAGE_SIDE * CHANNELS;
/// Coarse label, fine label, then three 1024-byte colour planes.
pub const RECORD_BYTES: usize = 2 + PIXEL_BYTES;
pub const COARSE_CLASSES: u8 = 20;
pub const FINE_CLASSES: u8 = 100;

pub const T1_SUPERCLASSES: usize = 8;
pub const T2_SUPERCLASSES: usize = 4;
pub const SHORTCUT_SUPERCLASSES: usize = 2;

pub type Rgb = [u8; 3];

pub const MAGENTA: Rgb = [255, 0, 255];
pub const BLACK: Rgb = [0, 0, 0];

/// One 32x32 RGB image. Pixels are stored interleaved (R, G, B) in row-major
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    coarse_label: u8,
    fine_label: u8,
    pixels: Vec<u8>,
}

impl ImageRecord {
    pub fn new(coarse_label: u8, fine_label: u8, pixels: Vec<u8>) -> Result<Self> {
        if coarse_label >= COARSE_CLASSES || fine_label >= FINE_CLASSES {
            return Err(Error::LabelOutOfRange {
                index: 0,
                coarse: coarse_label,
                fine: fine_label,
            });
        }
        if pixels.len() != PIXEL_BYTES {
            return Err(Error::InvalidConfig(format!(
                "image needs {PIXEL_BYTES} pixel bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            coarse_label,
            fine_label,
            pixels,
        })
    }

    pub fn coarse_label(&self) -> u8 {
        self.coarse_label
    }

    pub fn fine_label(&self) -> u8 {
        self.fine_label
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        let i = (row * IMAGE_SIDE + col) * CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn fill(&mut self, top: usize, left: usize, height: usize, width: usize, color: Rgb) {
        for row in top..top + height {
            for col in left..left + width {
                let i = (row * IMAGE_SIDE + col) * CHANNELS;
                self.pixels[i..i + CHANNELS].copy_from_slice(&color);
            }
        }
    }
}

/// Reads CIFAR-100 binary records, converting the planar colour layout to
/// interleaved RGB.
pub fn parse_cifar100<R: Read>(mut reader: R) -> Result<Vec<ImageRecord>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let rest = bytes.len() % RECORD_BYTES;
    if rest != 0 {
        return Err(Error::TruncatedRecord {
            index: bytes.len() / RECORD_BYTES,
            len: rest,
        });
    }
    const PLANE: usize = IMAGE_SIDE * IMAGE_SIDE;
    bytes
        .chunks_exact(RECORD_BYTES)
        .enumerate()
        .map(|(index, chunk)| {
            let (coarse, fine) = (chunk[0], chunk[1]);
            if coarse >= COARSE_CLASSES || fine >= FINE_CLASSES {
                return Err(Error::LabelOutOfRange { index, coarse, fine });
            }
            let planes = &chunk[2..];
            let mut pixels = vec![0u8; PIXEL_BYTES];
            for p in 0..PLANE {
                for c in 0..CHANNELS {
                    pixels[p * CHANNELS + c] = planes[c * PLANE + p];
                }
            }
            Ok(ImageRecord {
                coarse_label: coarse,
                fine_label: fine,
                pixels,
            })
        })
        .collect()
}

/// Writes records back in the CIFAR-100 binary layout.
pub fn write_cifar100<W: Write>(records: &[ImageRecord], mut writer: W) -> Result<()> {
    const PLANE: usize = IMAGE_SIDE * IMAGE_SIDE;
    let mut buf = vec![0u8; RECORD_BYTES];
    for record in records {
        buf[0] = record.coarse_label;
        buf[1] = record.fine_label;
        for p in 0..PLANE {
            for c in 0..CHANNELS {
                buf[2 + c * PLANE + p] = record.pixels[p * CHANNELS + c];
            }
        }
        writer.write_all(&buf)?;
    }
    writer.flush()?;
    Ok(())
}

/// Location and colours of the shortcut patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
    pub inject_color: Rgb,
    pub mask_color: Rgb,
}

impl Default for PatchSpec {
    /// 4x4 magenta square in the top-left corner, masked with black.
    fn default() -> Self {
        Self {
            top: 0,
            left: 0,
            height: 4,
            width: 4,
            inject_color: MAGENTA,
            mask_color: BLACK,
        }
    }
}

impl PatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0
            || self.width == 0
            || self.top + self.height > IMAGE_SIDE
            || self.left + self.width > IMAGE_SIDE
        {
            return Err(Error::InvalidConfig(format!(
                "patch {}x{} at ({}, {}) does not fit a {IMAGE_SIDE}x{IMAGE_SIDE} image",
                self.height, self.width, self.top, self.left
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.top..self.top + self.height).contains(&row) && (self.left..self.left + self.width).contains(&col)
    }
}

/// Paints the shortcut patch. Labels and all pixels outside the patch are
/// left untouched.
///
/// # Panics
///
/// Panics if the spec does not fit the image; call [`PatchSpec::validate`] first.
pub fn inject_patch(image: &ImageRecord, spec: &PatchSpec) -> ImageRecord {
    let mut out = image.clone();
    out.fill(spec.top, spec.left, spec.height, spec.width, spec.inject_color);
    out
}

/// Overwrites the patch region with the mask colour. Because the whole region
/// is replaced, masking a patched image equals masking the original.
pub fn mask_patch(image: &ImageRecord, spec: &PatchSpec) -> ImageRecord {
    let mut out = image.clone();
    out.fill(spec.top, spec.left, spec.height, spec.width, spec.mask_color);
    out
}

/// Superclass assignment for the two phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub t1: Vec<u8>,
    pub t2: Vec<u8>,
    /// Phase-2 superclasses that carry the patch.
    pub sc: Vec<u8>,
    pub nsc: Vec<u8>,
    pub rng_seed: u64,
}

/// Explicit superclass choice; `nsc` is whatever part of `t2` is not in `sc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperclassOverrides {
    pub t1: Vec<u8>,
    pub t2: Vec<u8>,
    pub sc: Vec<u8>,
}

fn sorted_set(labels: &[u8]) -> Vec<u8> {
    labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidPlan(msg));
        let set = |v: &[u8]| v.iter().copied().collect::<BTreeSet<u8>>();
        let (t1, t2, sc, nsc) = (set(&self.t1), set(&self.t2), set(&self.sc), set(&self.nsc));
        if let Some(l) = t1.iter().chain(&t2).find(|l| **l >= COARSE_CLASSES) {
            return fail(format!("coarse label {l} is out of range"));
        }
        if t1.len() != T1_SUPERCLASSES || self.t1.len() != T1_SUPERCLASSES {
            return fail(format!(
                "t1 needs {T1_SUPERCLASSES} distinct superclasses, got {:?}",
                self.t1
            ));
        }
        if t2.len() != T2_SUPERCLASSES || self.t2.len() != T2_SUPERCLASSES {
            return fail(format!(
                "t2 needs {T2_SUPERCLASSES} distinct superclasses, got {:?}",
                self.t2
            ));
        }
        if !t1.is_disjoint(&t2) {
            return fail("t1 and t2 overlap".into());
        }
        if sc.len() != SHORTCUT_SUPERCLASSES || self.sc.len() != SHORTCUT_SUPERCLASSES {
            return fail(format!(
                "sc needs {SHORTCUT_SUPERCLASSES} distinct superclasses, got {:?}",
                self.sc
            ));
        }
        if nsc.len() != SHORTCUT_SUPERCLASSES || self.nsc.len() != SHORTCUT_SUPERCLASSES {
            return fail(format!(
                "nsc needs {SHORTCUT_SUPERCLASSES} distinct superclasses, got {:?}",
                self.nsc
            ));
        }
        if !sc.is_disjoint(&nsc) || sc.union(&nsc).copied().collect::<BTreeSet<_>>() != t2 {
            return fail("sc and nsc must partition t2".into());
        }
        Ok(())
    }

    pub fn is_shortcut(&self, coarse: u8) -> bool {
        self.sc.contains(&coarse)
    }

    pub fn is_t1(&self, coarse: u8) -> bool {
        self.t1.contains(&coarse)
    }

    pub fn is_t2(&self, coarse: u8) -> bool {
        self.t2.contains(&coarse)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Builds a plan from a seed, or echoes validated overrides.
///
/// Without overrides the 20 coarse labels are shuffled with a ChaCha8
/// generator seeded from `rng_seed`; the first 8 form T1, the next 4 form T2,
/// and the first two of those T2 labels (in shuffled order) carry the patch.
/// Every set is stored sorted.
pub fn plan_benchmark(rng_seed: u64, overrides: Option<&SuperclassOverrides>) -> Result<BenchmarkPlan> {
    let plan = match overrides {
        Some(o) => {
            let nsc: Vec<u8> = sorted_set(&o.t2).into_iter().filter(|l| !o.sc.contains(l)).collect();
            let plan = BenchmarkPlan {
                t1: sorted_set(&o.t1),
                t2: sorted_set(&o.t2),
                sc: sorted_set(&o.sc),
                nsc,
                rng_seed,
            };
            // Duplicates collapse in sorted_set; compare lengths against the raw input.
            if plan.t1.len() != o.t1.len() || plan.t2.len() != o.t2.len() || plan.sc.len() != o.sc.len() {
                return Err(Error::InvalidPlan("override lists contain duplicates".into()));
            }
            plan
        }
        None => {
            let mut labels: Vec<u8> = (0..COARSE_CLASSES).collect();
            labels.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
            let t1 = &labels[..T1_SUPERCLASSES];
            let t2 = &labels[T1_SUPERCLASSES..T1_SUPERCLASSES + T2_SUPERCLASSES];
            BenchmarkPlan {
                t1: sorted_set(t1),
                t2: sorted_set(t2),
                sc: sorted_set(&t2[..SHORTCUT_SUPERCLASSES]),
                nsc: sorted_set(&t2[SHORTCUT_SUPERCLASSES..]),
                rng_seed,
            }
        }
    };
    plan.validate()?;
    Ok(plan)
}

/// Phase-2 records with every shortcut-superclass image patched, in input order.
pub fn t2_with_patches(records: &[ImageRecord], plan: &BenchmarkPlan, spec: &PatchSpec) -> Vec<ImageRecord> {
    records
        .iter()
        .filter(|r| plan.is_t2(r.coarse_label))
        .map(|r| {
            if plan.is_shortcut(r.coarse_label) {
                inject_patch(r, spec)
            } else {
                r.clone()
            }
        })
        .collect()
}

/// Shortcut-superclass records only, patched.
pub fn sc_patched(records: &[ImageRecord], plan: &BenchmarkPlan, spec: &PatchSpec) -> Vec<ImageRecord> {
    records
        .iter()
        .filter(|r| plan.is_shortcut(r.coarse_label))
        .map(|r| inject_patch(r, spec))
        .collect()
}

/// Shortcut-superclass records only, masked. Aligned index-for-index with
/// [`sc_patched`] on the same input.
pub fn sc_masked(records: &[ImageRecord], plan: &BenchmarkPlan, spec: &PatchSpec) -> Vec<ImageRecord> {
    records
        .iter()
        .filter(|r| plan.is_shortcut(r.coarse_label))
        .map(|r| mask_patch(r, spec))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseDatasets {
    pub t1_train: Vec<ImageRecord>,
    pub t1_test: Vec<ImageRecord>,
    pub t2_train: Vec<ImageRecord>,
    pub t2_test_patched: Vec<ImageRecord>,
    pub t2_test_masked: Vec<ImageRecord>,
    pub t2_test_nsc: Vec<ImageRecord>,
}

/// Splits CIFAR train/test records into the phase datasets. T1 data is never
/// patched; T2 training data carries the patch on shortcut superclasses; the
/// patched and masked test sets hold the same images in the same order.
pub fn build_phase_datasets(
    train: &[ImageRecord],
    test: &[ImageRecord],
    plan: &BenchmarkPlan,
    spec: &PatchSpec,
) -> Result<PhaseDatasets> {
    plan.validate()?;
    spec.validate()?;
    for records in [train, test] {
        let present: BTreeSet<u8> = records.iter().map(|r| r.coarse_label).collect();
        if let Some(missing) = plan.t1.iter().chain(&plan.t2).find(|l| !present.contains(l)) {
            return Err(Error::AbsentSuperclass(*missing));
        }
    }
    let select = |records: &[ImageRecord], keep: &dyn Fn(u8) -> bool| -> Vec<ImageRecord> {
        records.iter().filter(|r| keep(r.coarse_label)).cloned().collect()
    };
    Ok(PhaseDatasets {
        t1_train: select(train, &|c| plan.is_t1(c)),
        t1_test: select(test, &|c| plan.is_t1(c)),
        t2_train: t2_with_patches(train, plan, spec),
        t2_test_patched: sc_patched(test, plan, spec),
        t2_test_masked: sc_masked(test, plan, spec),
        t2_test_nsc: select(test, &|c| plan.nsc.contains(&c)),
    })
}

/// Seeded split of `records` into `(kept, held_out)` with `fraction` of the
/// records held out for validation. Both halves keep input order.
pub fn hold_out(records: &[ImageRecord], fraction: f64, rng_seed: u64) -> Result<(Vec<ImageRecord>, Vec<ImageRecord>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!(
            "hold-out fraction {fraction} must be in [0, 1)"
        )));
    }
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let n_held = (records.len() as f64 * fraction).round() as usize;
    let held: BTreeSet<usize> = idx[..n_held].iter().copied().collect();
    let (mut kept, mut out) = (Vec::new(), Vec::new());
    for (i, r) in records.iter().enumerate() {
        if held.contains(&i) {
            out.push(r.clone());
        } else {
            kept.push(r.clone());
        }
    }
    Ok((kept, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, RngCore};

    fn blank(coarse: u8, value: u8) -> ImageRecord {
        ImageRecord::new(coarse, coarse * 5, vec![value; PIXEL_BYTES]).unwrap()
    }

    fn random_image(rng: &mut impl RngCore) -> ImageRecord {
        let mut pixels = vec![0u8; PIXEL_BYTES];
        rng.fill_bytes(&mut pixels);
        ImageRecord::new(rng.random_range(0..20), rng.random_range(0..100), pixels).unwrap()
    }

    fn count_color(img: &ImageRecord, color: Rgb) -> usize {
        (0..IMAGE_SIDE)
            .flat_map(|r| (0..IMAGE_SIDE).map(move |c| (r, c)))
            .filter(|&(r, c)| img.pixel(r, c) == color)
            .count()
    }

    #[test]
    fn single_record_parse() {
        let mut bytes = vec![0u8; RECORD_BYTES];
        bytes[0] = 3;
        bytes[1] = 17;
        let recs = parse_cifar100(bytes.as_slice()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!((recs[0].coarse_label(), recs[0].fine_label()), (3, 17));
        assert!(recs[0].pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn planar_to_interleaved() {
        let mut bytes = vec![0u8; RECORD_BYTES];
        bytes[2] = 10; // R of pixel (0, 0)
        bytes[2 + 1024] = 20; // G of pixel (0, 0)
        bytes[2 + 2048 + 33] = 30; // B of pixel (1, 1)
        let rec = &parse_cifar100(bytes.as_slice()).unwrap()[0];
        assert_eq!(rec.pixel(0, 0), [10, 20, 0]);
        assert_eq!(rec.pixel(1, 1), [0, 0, 30]);
    }

    #[test]
    fn truncated_and_bad_labels() {
        assert!(matches!(
            parse_cifar100(vec![0u8; 3073].as_slice()),
            Err(Error::TruncatedRecord { index: 0, len: 3073 })
        ));
        let mut bytes = vec![0u8; 2 * RECORD_BYTES];
        bytes[RECORD_BYTES] = 20;
        assert!(matches!(
            parse_cifar100(bytes.as_slice()),
            Err(Error::LabelOutOfRange {
                index: 1,
                coarse: 20,
                ..
            })
        ));
    }

    #[test]
    fn ten_record_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut bytes = Vec::new();
        for _ in 0..10 {
            bytes.push(rng.random_range(0..20u8));
            bytes.push(rng.random_range(0..100u8));
            let mut px = vec![0u8; PIXEL_BYTES];
            rng.fill_bytes(&mut px);
            bytes.extend(px);
        }
        let recs = parse_cifar100(bytes.as_slice()).unwrap();
        let mut out = Vec::new();
        write_cifar100(&recs, &mut out).unwrap();
        assert_eq!(out, bytes);
    }

    #[test]
    fn patch_counts() {
        let spec = PatchSpec::default();
        let img = inject_patch(&blank(0, 0), &spec);
        assert_eq!(count_color(&img, MAGENTA), 16);
        assert_eq!(count_color(&img, BLACK), 1008);
        assert_eq!(inject_patch(&img, &spec), img);

        let white = blank(1, 255);
        let masked = mask_patch(&white, &spec);
        assert_eq!(count_color(&masked, BLACK), 16);
        assert_eq!(mask_patch(&masked, &spec), masked);
        assert_eq!(masked.coarse_label(), 1);
    }

    #[test]
    fn random_images_change_only_the_patch() {
        let spec = PatchSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let img = random_image(&mut rng);
            let patched = inject_patch(&img, &spec);
            let masked = mask_patch(&img, &spec);
            assert_eq!(mask_patch(&patched, &spec), masked);
            for r in 0..IMAGE_SIDE {
                for c in 0..IMAGE_SIDE {
                    if spec.contains(r, c) {
                        assert_eq!(patched.pixel(r, c), MAGENTA);
                        assert_eq!(masked.pixel(r, c), BLACK);
                    } else {
                        assert_eq!(patched.pixel(r, c), img.pixel(r, c));
                        assert_eq!(masked.pixel(r, c), img.pixel(r, c));
                    }
                }
            }
        }
    }

    #[test]
    fn patch_spec_bounds() {
        assert!(PatchSpec::default().validate().is_ok());
        let bad = PatchSpec {
            top: 30,
            ..PatchSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn plan_is_deterministic_and_valid() {
        assert_eq!(plan_benchmark(42, None).unwrap(), plan_benchmark(42, None).unwrap());
        for seed in 0..100 {
            plan_benchmark(seed, None).unwrap().validate().unwrap();
        }
        assert_ne!(plan_benchmark(1, None).unwrap().t1, plan_benchmark(2, None).unwrap().t1);
    }

    #[test]
    fn seed_42_plan_is_frozen() {
        // Guards against changes in the shuffle implementation.
        let plan = plan_benchmark(42, None).unwrap();
        let json = plan.to_json().unwrap();
        assert_eq!(BenchmarkPlan::from_json(&json).unwrap(), plan);
        let expected = include_str!("../tests/fixtures/plan_seed42.json");
        assert_eq!(BenchmarkPlan::from_json(expected).unwrap(), plan);
    }

    #[test]
    fn overrides_are_echoed() {
        let o = SuperclassOverrides {
            t1: (0..8).collect(),
            t2: vec![8, 9, 10, 11],
            sc: vec![8, 9],
        };
        let plan = plan_benchmark(5, Some(&o)).unwrap();
        assert_eq!(plan.t1, (0..8).collect::<Vec<u8>>());
        assert_eq!(plan.t2, vec![8, 9, 10, 11]);
        assert_eq!(plan.sc, vec![8, 9]);
        assert_eq!(plan.nsc, vec![10, 11]);

        let overlap = SuperclassOverrides {
            t2: vec![7, 9, 10, 11],
            ..o.clone()
        };
        assert!(plan_benchmark(5, Some(&overlap)).is_err());
        let bad_sc = SuperclassOverrides {
            sc: vec![8, 12],
            ..o.clone()
        };
        assert!(plan_benchmark(5, Some(&bad_sc)).is_err());
        let dup = SuperclassOverrides { sc: vec![8, 8], ..o };
        assert!(plan_benchmark(5, Some(&dup)).is_err());
    }

    fn fixed_plan() -> BenchmarkPlan {
        plan_benchmark(
            0,
            Some(&SuperclassOverrides {
                t1: (0..8).collect(),
                t2: vec![8, 9, 10, 11],
                sc: vec![8, 9],
            }),
        )
        .unwrap()
    }

    fn corpus(seed: u64, per_class: usize) -> Vec<ImageRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for _ in 0..per_class {
            for coarse in 0..20u8 {
                let mut img = random_image(&mut rng);
                img.coarse_label = coarse;
                // Keep the top-left block free of the injection colour.
                img.fill(0, 0, 4, 4, [1, 2, 3]);
                out.push(img);
            }
        }
        out
    }

    #[test]
    fn phase_datasets() {
        let plan = fixed_plan();
        let spec = PatchSpec::default();
        let train = corpus(1, 3);
        let test = corpus(2, 2);
        let d = build_phase_datasets(&train, &test, &plan, &spec).unwrap();

        assert_eq!(d.t1_train.len(), 8 * 3);
        assert_eq!(d.t2_train.len(), 4 * 3);
        assert_eq!(d.t2_test_patched.len(), 2 * 2);
        assert_eq!(d.t2_test_masked.len(), d.t2_test_patched.len());
        assert_eq!(d.t2_test_nsc.len(), 2 * 2);

        for r in &d.t2_train {
            let patched = (0..4).all(|row| (0..4).all(|col| r.pixel(row, col) == MAGENTA));
            assert_eq!(patched, [8, 9].contains(&r.coarse_label()));
        }
        for r in d.t1_train.iter().chain(&d.t1_test).chain(&d.t2_test_nsc) {
            assert_eq!(count_color(r, MAGENTA), 0);
        }
        for (p, m) in d.t2_test_patched.iter().zip(&d.t2_test_masked) {
            assert_eq!(p.coarse_label(), m.coarse_label());
            let diffs = p
                .pixels()
                .chunks(3)
                .zip(m.pixels().chunks(3))
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(diffs, 16);
        }

        let missing: Vec<ImageRecord> = train.iter().filter(|r| r.coarse_label() != 9).cloned().collect();
        assert!(matches!(
            build_phase_datasets(&missing, &test, &plan, &spec),
            Err(Error::AbsentSuperclass(9))
        ));
    }

    #[test]
    fn hold_out_is_seeded_partition() {
        let recs = corpus(3, 5);
        let (kept, held) = hold_out(&recs, 0.1, 9).unwrap();
        assert_eq!(held.len(), 10);
        assert_eq!(kept.len() + held.len(), recs.len());
        assert_eq!(hold_out(&recs, 0.1, 9).unwrap(), (kept, held));
        assert!(hold_out(&recs, 1.0, 9).is_err());
    }

    proptest! {
        #[test]
        fn interventions_touch_exactly_the_patch(pixels in prop::collection::vec(any::<u8>(), PIXEL_BYTES)) {
            let spec = PatchSpec::default();
            let img = ImageRecord::new(0, 0, pixels).unwrap();
            let p = inject_patch(&img, &spec);
            let m = mask_patch(&img, &spec);
            prop_assert_eq!(mask_patch(&p, &spec), m.clone());
            prop_assert_eq!(inject_patch(&p, &spec), p.clone());
            prop_assert_eq!(mask_patch(&m, &spec), m);
        }
    }
}
