//! Dataset loading: manifests, frame decoding, external frame extraction,
//! thumbnail fetching and segment selection.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest parse error at line {line}: {source}")]
    ManifestParse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate video id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("record {id:?} at line {line} has no video, frames, thumbnail or transcript source")]
    NoSource { id: String, line: usize },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),
    #[error("bad ppm header: {0}")]
    PpmHeader(String),
    #[error("ppm maxval {0} not supported (only 255)")]
    PpmMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image decode error: {0}")]
    Image(#[from] image::ImageError),
    #[error("decoder exited with status {status}: {stderr}")]
    DecoderFailed { status: i32, stderr: String },
    #[error("decoder produced no frames in {0}")]
    NoFrames(PathBuf),
    #[error("http {status} fetching {url}")]
    HttpStatus { status: u16, url: String },
    #[error("http error fetching {url}: {source}")]
    Http {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("empty frame list")]
    EmptyFrames,
}

/// Corpus attitude label attached to a video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Conspiracy,
    Debunking,
    Normal,
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Conspiracy => "conspiracy",
            Label::Debunking => "debunking",
            Label::Normal => "normal",
            Label::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "conspiracy" => Some(Label::Conspiracy),
            "debunking" => Some(Label::Debunking),
            "normal" => Some(Label::Normal),
            "unlabeled" => Some(Label::Unlabeled),
            _ => None,
        }
    }
}

/// One corpus entry from a JSONL manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub label: Label,
    #[serde(default)]
    pub video_path: Option<PathBuf>,
    #[serde(default)]
    pub frames_dir: Option<PathBuf>,
    /// Local path or HTTP(S) URL.
    #[serde(default)]
    pub thumbnail: Option<String>,
    #[serde(default)]
    pub transcript_path: Option<PathBuf>,
    #[serde(default)]
    pub duration_s: Option<f64>,
}

impl VideoRecord {
    pub fn has_visual_source(&self) -> bool {
        self.video_path.is_some() || self.frames_dir.is_some() || self.thumbnail.is_some()
    }
}

/// Decoded raster image with a timestamp; the unit of pixel-level analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, 3 bytes per pixel.
    pub pixels: Vec<u8>,
    pub timestamp_s: f64,
    pub index: usize,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Frame {
        assert_eq!(pixels.len(), 3 * width as usize * height as usize);
        Frame {
            width,
            height,
            pixels,
            timestamp_s: 0.0,
            index: 0,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Iterate over (r, g, b) triples.
    pub fn rgb_iter(&self) -> impl Iterator<Item = (u8, u8, u8)> + '_ {
        self.pixels.chunks_exact(3).map(|c| (c[0], c[1], c[2]))
    }
}

/// Which slice of a video's frames to analyze.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    AllFrames,
    FirstSeconds(f64),
    MiddleSeconds(f64),
    Thumbnail,
}

impl Segment {
    /// Stable name used in CSV cells and file names, e.g. `first10s`.
    pub fn name(&self) -> String {
        match self {
            Segment::AllFrames => "all".to_string(),
            Segment::FirstSeconds(n) => format!("first{}s", fmt_secs(*n)),
            Segment::MiddleSeconds(n) => format!("middle{}s", fmt_secs(*n)),
            Segment::Thumbnail => "thumbnail".to_string(),
        }
    }

    pub fn parse(s: &str) -> Option<Segment> {
        if s == "all" {
            return Some(Segment::AllFrames);
        }
        if s == "thumbnail" {
            return Some(Segment::Thumbnail);
        }
        for (prefix, ctor) in [
            ("first", Segment::FirstSeconds as fn(f64) -> Segment),
            ("middle", Segment::MiddleSeconds as fn(f64) -> Segment),
        ] {
            if let Some(rest) = s.strip_prefix(prefix) {
                if let Some(num) = rest.strip_suffix('s') {
                    if let Ok(n) = num.parse::<f64>() {
                        if n > 0.0 {
                            return Some(ctor(n));
                        }
                    }
                }
            }
        }
        None
    }
}

fn fmt_secs(n: f64) -> String {
    if n == n.trunc() {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

/// Load a JSONL manifest, one record per line. Blank lines are skipped,
/// unknown fields ignored, input order preserved.
pub fn load_manifest(path: &Path) -> Result<Vec<VideoRecord>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: VideoRecord = serde_json::from_str(line)
            .map_err(|source| IngestError::ManifestParse { line: lineno, source })?;
        if !seen.insert(record.id.clone()) {
            return Err(IngestError::DuplicateId {
                id: record.id,
                line: lineno,
            });
        }
        if !record.has_visual_source() && record.transcript_path.is_none() {
            return Err(IngestError::NoSource {
                id: record.id,
                line: lineno,
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Decode a binary portable pixmap (P6, maxval 255) byte-for-byte.
pub fn decode_ppm(bytes: &[u8]) -> Result<Frame, IngestError> {
    let mut pos = 0usize;
    let mut fields: Vec<u32> = Vec::new();
    if bytes.len() < 2 || &bytes[0..2] != b"P6" {
        return Err(IngestError::PpmHeader("missing P6 magic".into()));
    }
    pos += 2;
    // header: three whitespace-separated integers, # comments allowed
    while fields.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(IngestError::PpmHeader("expected integer".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        fields.push(
            text.parse()
                .map_err(|_| IngestError::PpmHeader(format!("bad integer {text:?}")))?,
        );
    }
    // exactly one whitespace byte after maxval
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(IngestError::PpmHeader("missing separator after maxval".into()));
    }
    pos += 1;
    let (width, height, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(IngestError::PpmMaxval(maxval));
    }
    let expected = 3 * width as usize * height as usize;
    let data = &bytes[pos..];
    if data.len() < expected {
        return Err(IngestError::Truncated {
            expected,
            found: data.len(),
        });
    }
    Ok(Frame::new(width, height, data[..expected].to_vec()))
}

/// Encode a frame as a P6 pixmap; `decode_ppm(encode_ppm(f))` round-trips.
pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.pixels);
    out
}

/// Decode an image file into a frame. P6 pixmaps are decoded by the
/// built-in bit-exact reader; other formats go through the `image` crate.
pub fn decode_image(path: &Path) -> Result<Frame, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P6") {
        return decode_ppm(&bytes);
    }
    let img = image::load_from_memory(&bytes)?.to_rgb8();
    let (width, height) = img.dimensions();
    Ok(Frame::new(width, height, img.into_raw()))
}

/// Run the external decoder command template and report how many frames
/// it produced. The template must contain `{input}`, `{rate}` and
/// `{out_pattern}` placeholders; tokens are split on whitespace before
/// substitution.
pub fn extract_frames(
    record: &VideoRecord,
    rate_fps: f64,
    out_dir: &Path,
    decoder_cmd: &str,
) -> Result<usize, IngestError> {
    assert!(rate_fps > 0.0);
    let input = record
        .video_path
        .as_ref()
        .expect("extract_frames requires video_path");
    fs::create_dir_all(out_dir).map_err(|source| IngestError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let out_pattern = out_dir.join("%06d.png");
    let tokens: Vec<String> = decoder_cmd
        .split_whitespace()
        .map(|t| {
            t.replace("{input}", &input.to_string_lossy())
                .replace("{rate}", &format!("{rate_fps}"))
                .replace("{out_pattern}", &out_pattern.to_string_lossy())
        })
        .collect();
    let (program, args) = tokens.split_first().expect("empty decoder command");
    let output = Command::new(program)
        .args(args)
        .output()
        .map_err(|source| IngestError::Io {
            path: PathBuf::from(program),
            source,
        })?;
    if !output.status.success() {
        return Err(IngestError::DecoderFailed {
            status: output.status.code().unwrap_or(-1),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let count = count_frame_files(out_dir)?;
    if count == 0 {
        return Err(IngestError::NoFrames(out_dir.to_path_buf()));
    }
    Ok(count)
}

fn count_frame_files(dir: &Path) -> Result<usize, IngestError> {
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut count = 0;
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        if entry.path().is_file() {
            count += 1;
        }
    }
    Ok(count)
}

/// Load all frames from a directory, sorted by file name, with frame `i`
/// stamped at `i / rate_fps` seconds.
pub fn load_frames_dir(dir: &Path, rate_fps: f64) -> Result<Vec<Frame>, IngestError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut frames = crate::par::map_ordered(&paths, |p| decode_image(p))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    for (i, frame) in frames.iter_mut().enumerate() {
        frame.index = i;
        frame.timestamp_s = i as f64 / rate_fps;
    }
    Ok(frames)
}

/// Download a thumbnail, skipping the transfer when the target file
/// already holds a body of the same length.
pub fn fetch_thumbnail(
    url: &str,
    out_path: &Path,
    timeout: Duration,
) -> Result<PathBuf, IngestError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|source| IngestError::Http {
            url: url.to_string(),
            source,
        })?;
    let response = client.get(url).send().map_err(|source| IngestError::Http {
        url: url.to_string(),
        source,
    })?;
    if !response.status().is_success() {
        return Err(IngestError::HttpStatus {
            status: response.status().as_u16(),
            url: url.to_string(),
        });
    }
    if let (Some(len), Ok(meta)) = (response.content_length(), fs::metadata(out_path)) {
        if meta.is_file() && meta.len() == len {
            return Ok(out_path.to_path_buf());
        }
    }
    let body = response.bytes().map_err(|source| IngestError::Http {
        url: url.to_string(),
        source,
    })?;
    let mut file = fs::File::create(out_path).map_err(|source| IngestError::Io {
        path: out_path.to_path_buf(),
        source,
    })?;
    file.write_all(&body).map_err(|source| IngestError::Io {
        path: out_path.to_path_buf(),
        source,
    })?;
    Ok(out_path.to_path_buf())
}

/// Pick the frames belonging to a segment. Frames must be ordered by
/// timestamp. Short videos clamp: the result is all frames whenever the
/// requested span covers the whole video.
pub fn select_segment(
    frames: &[Frame],
    segment: Segment,
    rate_fps: f64,
) -> Result<Vec<Frame>, IngestError> {
    if frames.is_empty() {
        return Err(IngestError::EmptyFrames);
    }
    let selected: Vec<Frame> = match segment {
        Segment::AllFrames | Segment::Thumbnail => frames.to_vec(),
        Segment::FirstSeconds(n) => {
            let kept: Vec<Frame> = frames
                .iter()
                .filter(|f| f.timestamp_s < n)
                .cloned()
                .collect();
            if kept.is_empty() {
                // clamp: a video shorter than one frame period still yields its frames
                frames.to_vec()
            } else {
                kept
            }
        }
        Segment::MiddleSeconds(n) => {
            let total = frames.len();
            let k = ((n * rate_fps).round() as usize).min(total).max(1);
            let start = (total - k) / 2;
            frames[start..start + k].to_vec()
        }
    };
    Ok(selected)
}
