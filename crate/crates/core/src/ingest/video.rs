//! Video decoding and frame sampling.
//!
//! Real containers need a codec library, so decoding sits behind
//! [`VideoDecoder`]. The bundled [`FrameStripDecoder`] reads a simple frame
//! strip used by the synthetic corpora (integers little-endian):
//!
//! ```text
//! magic        8 bytes "MQVIDEO1"
//! duration_ms  u32
//! frame_count  u32
//! frames       frame_count x { timestamp_ms u32, len u32, bytes[len] }
//! ```
//!
//! Frame timestamps must be non-decreasing.

use crate::gateway::Frame;

use super::IngestError;

pub const FRAME_STRIP_MAGIC: &[u8; 8] = b"MQVIDEO1";

/// Number of frames sampled per video.
pub const SAMPLED_FRAMES: usize = 10;
/// Only the opening seconds of a video are sampled.
pub const SAMPLED_SECONDS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedVideo {
    pub duration_secs: f64,
    /// Frames in presentation order.
    pub frames: Vec<Frame>,
}

pub trait VideoDecoder: Send + Sync {
    fn decode(&self, bytes: &[u8]) -> Result<DecodedVideo, String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FrameStripDecoder;

impl VideoDecoder for FrameStripDecoder {
    fn decode(&self, bytes: &[u8]) -> Result<DecodedVideo, String> {
        let mut rest = bytes
            .strip_prefix(FRAME_STRIP_MAGIC.as_slice())
            .ok_or("not a frame strip")?;
        let u32_at = |rest: &mut &[u8]| -> Result<u32, String> {
            let (head, tail) = rest.split_at_checked(4).ok_or("truncated frame strip")?;
            *rest = tail;
            Ok(u32::from_le_bytes(head.try_into().unwrap()))
        };
        let duration_ms = u32_at(&mut rest)?;
        let count = u32_at(&mut rest)?;
        let mut frames = Vec::with_capacity(count as usize);
        let mut last = 0;
        for _ in 0..count {
            let ts = u32_at(&mut rest)?;
            let len = u32_at(&mut rest)? as usize;
            if ts < last {
                return Err("frame timestamps go backwards".into());
            }
            last = ts;
            let (data, tail) = rest.split_at_checked(len).ok_or("truncated frame")?;
            rest = tail;
            frames.push(Frame {
                timestamp_secs: f64::from(ts) / 1000.0,
                bytes: data.to_vec(),
            });
        }
        if !rest.is_empty() {
            return Err("trailing bytes after last frame".into());
        }
        Ok(DecodedVideo {
            duration_secs: f64::from(duration_ms) / 1000.0,
            frames,
        })
    }
}

/// Encodes frames as a frame strip.
pub fn encode_frame_strip(duration_ms: u32, frames: &[(u32, Vec<u8>)]) -> Vec<u8> {
    let mut out = FRAME_STRIP_MAGIC.to_vec();
    out.extend_from_slice(&duration_ms.to_le_bytes());
    out.extend_from_slice(&(frames.len() as u32).to_le_bytes());
    for (ts, data) in frames {
        out.extend_from_slice(&ts.to_le_bytes());
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
    }
    out
}

/// Sample instants `k * span / 10` for `k = 0..10`, where `span` is the
/// first ten seconds of the video (or all of it, if shorter).
pub fn frame_timestamps(duration_secs: f64) -> [f64; SAMPLED_FRAMES] {
    let span = duration_secs.clamp(0.0, SAMPLED_SECONDS);
    std::array::from_fn(|k| k as f64 * span / SAMPLED_FRAMES as f64)
}

/// Samples ten frames from the opening of a video. Each sample takes the
/// last decoded frame shown at or before its instant, so short clips
/// repeat frames.
pub fn sample_video_frames(
    decoder: &dyn VideoDecoder,
    bytes: &[u8],
) -> Result<Vec<Frame>, IngestError> {
    let video = decoder
        .decode(bytes)
        .map_err(|reason| IngestError::UndecodableVideo {
            id: None,
            reason,
        })?;
    if video.frames.is_empty() {
        return Err(IngestError::UndecodableVideo {
            id: None,
            reason: "video has no frames".into(),
        });
    }
    Ok(frame_timestamps(video.duration_secs)
        .into_iter()
        .map(|t| {
            let idx = video
                .frames
                .partition_point(|f| f.timestamp_secs <= t + 1e-9)
                .saturating_sub(1);
            Frame {
                timestamp_secs: t,
                bytes: video.frames[idx].bytes.clone(),
            }
        })
        .collect())
}
