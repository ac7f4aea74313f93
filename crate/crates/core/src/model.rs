//! Domain types, dataset manifest and detection-file input/output.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

/// Where a detection's label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    BaseOcr,
    Corrected,
}

/// Character bounding box in line-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn center_x(&self) -> f64 {
        self.x as f64 + self.w as f64 / 2.0
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    /// Clamp a possibly loose box to `(img_w, img_h)`. Returns `None` when
    /// the box lies fully outside the image.
    pub fn clamp_to(x: i64, y: i64, w: i64, h: i64, img_w: u32, img_h: u32) -> Option<BoundingBox> {
        if w <= 0 || h <= 0 {
            return None;
        }
        let x0 = x.max(0);
        let y0 = y.max(0);
        let x1 = (x + w).min(img_w as i64);
        let y1 = (y + h).min(img_h as i64);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(BoundingBox {
            x: x0 as u32,
            y: y0 as u32,
            w: (x1 - x0) as u32,
            h: (y1 - y0) as u32,
        })
    }
}

/// One character detection: a box plus its predicted symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub line_id: String,
    pub box_: BoundingBox,
    /// Exactly one grapheme cluster, never whitespace.
    pub label: String,
    pub source: LabelSource,
}

/// A single line of text: its image, optional transcription and detections.
#[derive(Debug, Clone)]
pub struct LineRecord {
    pub line_id: String,
    pub image_path: PathBuf,
    pub image_width: u32,
    pub image_height: u32,
    pub ground_truth: Option<String>,
    pub detections: Vec<Detection>,
}

/// A typographically consistent group of lines; clustering models are fit
/// per sub-collection.
#[derive(Debug, Clone)]
pub struct SubCollection {
    pub name: String,
    pub lines: Vec<LineRecord>,
}

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Standardized character height in pixels.
    pub target_height: usize,
    /// Standardized character width in pixels.
    pub target_width: usize,
    /// Base of the discrete down-scaling factor (crops shrink by powers of it).
    pub scale_base: f64,
    /// Fraction of total variance the PCA projection retains.
    pub q_variance: f64,
    /// Initial number of mixture components.
    pub components: usize,
    /// Minimal cluster size kept by the refinement.
    pub min_cluster_size: usize,
    /// p-value threshold of the per-component normality tests.
    pub p_threshold: f64,
    /// Number of principal components tested per refinement node.
    pub num_pcs: usize,
    /// Majority frequency a cluster vote must exceed to relabel.
    pub majority_threshold: f64,
    /// Guidance weight of the horizontal boundary paths.
    pub lambda_h: f64,
    /// Initial rigidity of the vertical separator paths.
    pub lambda_v0: f64,
    /// Rigidity increment per separator retry.
    pub delta_lambda_v: f64,
    /// Maximum separator retries per character.
    pub max_lambda_iters: usize,
    /// Rounds of 3x3 binary dilation applied to the foreground mask.
    pub dilation_rounds: usize,
    /// Seed all random streams derive from.
    pub rng_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            target_height: 48,
            target_width: 32,
            scale_base: 1.2,
            q_variance: 0.9,
            components: 700,
            min_cluster_size: 20,
            // P(|X| > 2) for a standard normal.
            p_threshold: 0.045_500_263_896_358_42,
            num_pcs: 9,
            majority_threshold: 0.6,
            lambda_h: 0.1,
            lambda_v0: 0.05,
            delta_lambda_v: 0.15,
            max_lambda_iters: 8,
            dilation_rounds: 5,
            rng_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("H", self.target_height as f64),
            ("W", self.target_width as f64),
            ("n-min", self.min_cluster_size as f64),
            ("num-pcs", self.num_pcs as f64),
            ("lambda-h", self.lambda_h),
            ("lambda-v0", self.lambda_v0),
            ("delta-lambda-v", self.delta_lambda_v),
            ("max-lambda-iters", self.max_lambda_iters as f64),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.scale_base <= 1.0 {
            return Err(Error::InvalidConfig("scale-base must exceed 1".into()));
        }
        for (name, v) in [
            ("q-variance", self.q_variance),
            ("f-thr", self.majority_threshold),
            ("p-thr", self.p_threshold),
        ] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.components < 2 {
            return Err(Error::InvalidConfig("K must be at least 2".into()));
        }
        Ok(())
    }
}

/// Returns true when `label` is a single non-space grapheme cluster.
pub fn valid_label(label: &str) -> bool {
    let mut graphemes = label.graphemes(true);
    match (graphemes.next(), graphemes.next()) {
        (Some(g), None) => !g.chars().all(char::is_whitespace),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    sub_collections: Vec<ManifestSubCollection>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSubCollection {
    name: String,
    lines: Vec<ManifestLine>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLine {
    line_id: String,
    image: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_truth: Option<String>,
    detections: String,
}

/// Load a dataset manifest.
///
/// The manifest is a JSON file listing sub-collections; image and
/// detection-file paths are resolved relative to the manifest's directory.
/// Every referenced image must exist; boxes partially outside the image are
/// clamped, fully-outside boxes are an error naming the offending line.
pub fn load_manifest(path: &Path) -> Result<Vec<SubCollection>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let manifest: ManifestFile =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let mut out = Vec::with_capacity(manifest.sub_collections.len());
    for sc in manifest.sub_collections {
        let mut lines = Vec::with_capacity(sc.lines.len());
        for line in sc.lines {
            let image_path = base.join(&line.image);
            let (img_w, img_h) = image::image_dimensions(&image_path).map_err(|e| Error::Image {
                path: image_path.clone(),
                message: e.to_string(),
            })?;
            let det_path = base.join(&line.detections);
            let (file_line_id, detections) =
                read_detections(&det_path, LabelSource::BaseOcr, Some((img_w, img_h)))?;
            if file_line_id != line.line_id {
                return Err(Error::record(
                    line.line_id,
                    format!("detection file names line '{file_line_id}'"),
                ));
            }
            lines.push(LineRecord {
                line_id: line.line_id,
                image_path,
                image_width: img_w,
                image_height: img_h,
                ground_truth: line.ground_truth,
                detections,
            });
        }
        out.push(SubCollection { name: sc.name, lines });
    }
    Ok(out)
}

/// Write a manifest; paths are stored as given (callers pass paths relative
/// to the manifest's directory).
pub fn write_manifest(
    path: &Path,
    entries: &[(String, Vec<(String, String, Option<String>, String)>)],
) -> Result<()> {
    let manifest = ManifestFile {
        sub_collections: entries
            .iter()
            .map(|(name, lines)| ManifestSubCollection {
                name: name.clone(),
                lines: lines
                    .iter()
                    .map(|(line_id, image, gt, det)| ManifestLine {
                        line_id: line_id.clone(),
                        image: image.clone(),
                        ground_truth: gt.clone(),
                        detections: det.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Detection files
//
// Line-oriented UTF-8 text, one file per text line:
//
//     line_id <id>
//     x y w h label
//     ...
//
// The record field order is normative.

/// Read a detection file. When `bounds` is given, boxes are clamped to the
/// image and fully-outside boxes rejected; otherwise they are taken as-is.
pub fn read_detections(
    path: &Path,
    source: LabelSource,
    bounds: Option<(u32, u32)>,
) -> Result<(String, Vec<Detection>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Manifest(format!("{}: empty detection file", path.display())))?;
    let line_id = header
        .strip_prefix("line_id ")
        .ok_or_else(|| Error::Manifest(format!("{}: missing line_id header", path.display())))?
        .to_string();

    let mut detections = Vec::new();
    for (idx, raw) in lines.enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let mut parts = raw.splitn(5, ' ');
        let parse = |s: Option<&str>| -> Result<i64> {
            s.and_then(|v| v.parse::<i64>().ok()).ok_or_else(|| {
                Error::record(&line_id, format!("record {}: malformed '{raw}'", idx + 1))
            })
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        let w = parse(parts.next())?;
        let h = parse(parts.next())?;
        let label = parts
            .next()
            .ok_or_else(|| Error::record(&line_id, format!("record {}: missing label", idx + 1)))?
            .to_string();
        if !valid_label(&label) {
            return Err(Error::record(
                &line_id,
                format!("record {}: label {label:?} is not a single non-space symbol", idx + 1),
            ));
        }
        let box_ = match bounds {
            Some((img_w, img_h)) => BoundingBox::clamp_to(x, y, w, h, img_w, img_h)
                .ok_or_else(|| {
                    Error::record(&line_id, format!("record {}: box fully outside image", idx + 1))
                })?,
            None => {
                if x < 0 || y < 0 || w <= 0 || h <= 0 {
                    return Err(Error::record(
                        &line_id,
                        format!("record {}: negative box without image bounds", idx + 1),
                    ));
                }
                BoundingBox {
                    x: x as u32,
                    y: y as u32,
                    w: w as u32,
                    h: h as u32,
                }
            }
        };
        detections.push(Detection {
            line_id: line_id.clone(),
            box_,
            label,
            source,
        });
    }
    Ok((line_id, detections))
}

/// Write detections for one line; `load(write(d)) == d` with order preserved.
pub fn write_detections(path: &Path, line_id: &str, detections: &[Detection]) -> Result<()> {
    let mut buf = String::new();
    buf.push_str("line_id ");
    buf.push_str(line_id);
    buf.push('\n');
    for d in detections {
        buf.push_str(&format!(
            "{} {} {} {} {}\n",
            d.box_.x, d.box_.y, d.box_.w, d.box_.h, d.label
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSource::BaseOcr => write!(f, "base_ocr"),
            LabelSource::Corrected => write!(f, "corrected"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(x: u32, label: &str) -> Detection {
        Detection {
            line_id: "l0".into(),
            box_: BoundingBox { x, y: 2, w: 10, h: 20 },
            label: label.into(),
            source: LabelSource::Corrected,
        }
    }

    #[test]
    fn empty_manifest_file_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        std::fs::write(&path, "").unwrap();
        assert!(load_manifest(&path).unwrap().is_empty());
        std::fs::write(&path, "{\"sub_collections\": []}").unwrap();
        assert!(load_manifest(&path).unwrap().is_empty());
    }

    #[test]
    fn manifest_roundtrip_with_clamping() {
        let dir = tempfile::tempdir().unwrap();
        let img = crate::raster::Gray::from_elem((30, 60), 1.0);
        crate::raster::save_gray(&img, &dir.path().join("line.png")).unwrap();
        // x=-5 must clamp to x=0 with width reduced accordingly
        std::fs::write(
            dir.path().join("line.det"),
            "line_id l0\n-5 2 12 20 a\n10 2 10 20 b\n20 2 10 20 c\n",
        )
        .unwrap();
        write_manifest(
            &dir.path().join("manifest.json"),
            &[(
                "sc".into(),
                vec![("l0".into(), "line.png".into(), Some("abc".into()), "line.det".into())],
            )],
        )
        .unwrap();

        let scs = load_manifest(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(scs.len(), 1);
        assert_eq!(scs[0].lines.len(), 1);
        let dets = &scs[0].lines[0].detections;
        assert_eq!(dets.len(), 3);
        assert_eq!(dets[0].box_, BoundingBox { x: 0, y: 2, w: 7, h: 20 });
    }

    #[test]
    fn fully_outside_box_is_an_error_naming_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let img = crate::raster::Gray::from_elem((30, 60), 1.0);
        crate::raster::save_gray(&img, &dir.path().join("line.png")).unwrap();
        std::fs::write(dir.path().join("line.det"), "line_id l9\n70 2 10 20 a\n").unwrap();
        write_manifest(
            &dir.path().join("manifest.json"),
            &[("sc".into(), vec![("l9".into(), "line.png".into(), None, "line.det".into())])],
        )
        .unwrap();
        let err = load_manifest(&dir.path().join("manifest.json")).unwrap_err();
        assert!(matches!(err, Error::Record { ref line_id, .. } if line_id == "l9"));
    }

    #[test]
    fn detection_roundtrip_unicode_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.det");
        let dets = vec![det(0, "é"), det(12, "\u{00e9}"), det(24, "x")];
        write_detections(&path, "l0", &dets).unwrap();
        let (id, back) = read_detections(&path, LabelSource::Corrected, None).unwrap();
        assert_eq!(id, "l0");
        assert_eq!(back, dets);
    }

    #[test]
    fn empty_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.det");
        write_detections(&path, "l0", &[]).unwrap();
        let (_, back) = read_detections(&path, LabelSource::Corrected, None).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn label_validation() {
        assert!(valid_label("a"));
        assert!(valid_label("é"));
        assert!(valid_label("e\u{0301}")); // one grapheme, two code points
        assert!(!valid_label(""));
        assert!(!valid_label(" "));
        assert!(!valid_label("ab"));
    }

    proptest! {
        #[test]
        fn roundtrip_preserves_order_and_content(
            xs in proptest::collection::vec((0u32..5000, 1u32..40, 1u32..60), 0..1000)
        ) {
            let labels = ["a", "b", "é", "ß", "ж"];
            let dets: Vec<Detection> = xs
                .iter()
                .enumerate()
                .map(|(i, &(x, w, h))| Detection {
                    line_id: "p".into(),
                    box_: BoundingBox { x, y: 1, w, h },
                    label: labels[i % labels.len()].into(),
                    source: LabelSource::Corrected,
                })
                .collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("d.det");
            write_detections(&path, "p", &dets).unwrap();
            let (_, back) = read_detections(&path, LabelSource::Corrected, None).unwrap();
            prop_assert_eq!(back, dets);
        }
    }
}
