//! WAV file I/O (RIFF, PCM16 / float32, mono or stereo).

use std::path::Path;

use crate::error::{Error, Result};

use super::{AudioSegment, Label};

/// Read a WAV file into a normalized mono segment.
///
/// Stereo channels are averaged; integer samples are scaled to [-1, 1].
/// Unreadable files and unsupported encodings are reported as distinct
/// errors.
pub fn read_wav(path: &Path) -> Result<AudioSegment> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: io.to_string(),
        },
        other => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            reason: format!("{} channels (expected 1 or 2)", spec.channels),
        });
    }

    let mut reader = reader;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::UnreadableFile {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::UnreadableFile {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {fmt:?} (expected 16-bit PCM or 32-bit float)"),
            })
        }
    };

    let samples: Vec<f64> = if spec.channels == 2 {
        interleaved.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    } else {
        interleaved
    };
    if samples.is_empty() {
        return Err(Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: "no samples".into(),
        });
    }

    // Peak-normalize only if the file overshoots [-1, 1].
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let samples = if peak > 1.0 {
        samples.iter().map(|s| s / peak).collect()
    } else {
        samples
    };

    Ok(AudioSegment {
        samples,
        sample_rate: spec.sample_rate,
        speaker_id: String::new(),
        label: Label::Unknown,
        segment_index: 0,
    })
}

/// Write a mono segment as 16-bit PCM.
pub fn write_wav(seg: &AudioSegment, path: &Path) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: seg.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| Error::WriteFailed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    for &s in &seg.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| Error::WriteFailed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    }
    writer.finalize().map_err(|e| Error::WriteFailed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("voicedx-wav-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn sine_roundtrip_preserves_length_and_rate() {
        let seg = synth::sine(44100, 440.0, 1.0, 0.5);
        let path = tmp("sine.wav");
        write_wav(&seg, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.samples.len(), 44100);
        assert_eq!(back.sample_rate, 44100);
    }

    #[test]
    fn pcm16_roundtrip_is_bit_exact() {
        // Samples already on the i16 grid survive write->read unchanged.
        let samples: Vec<f64> = (-100i32..100).map(|v| (v * 163) as f64 / 32768.0).collect();
        let seg = AudioSegment::new(samples.clone(), 16000).unwrap();
        let path = tmp("grid.wav");
        write_wav(&seg, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.samples, samples);
    }

    #[test]
    fn stereo_opposite_channels_cancel() {
        let path = tmp("stereo.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for i in 0..800i32 {
            let v = ((i % 100) - 50) as i16 * 100;
            w.write_sample(v).unwrap();
            w.write_sample(-v).unwrap();
        }
        w.finalize().unwrap();
        let seg = read_wav(&path).unwrap();
        assert_eq!(seg.samples.len(), 800);
        assert!(seg.samples.iter().all(|&s| s.abs() < 1e-4));
    }

    #[test]
    fn unsupported_encoding_is_distinct_from_unreadable() {
        // 8-bit PCM is outside the declared contract.
        let path = tmp("eightbit.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 8,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..100 {
            w.write_sample(0i8).unwrap();
        }
        w.finalize().unwrap();
        match read_wav(&path) {
            Err(Error::UnsupportedEncoding { .. }) => {}
            other => panic!("expected UnsupportedEncoding, got {other:?}"),
        }

        match read_wav(Path::new("/definitely/not/here.wav")) {
            Err(Error::UnreadableFile { .. }) => {}
            other => panic!("expected UnreadableFile, got {other:?}"),
        }
    }
}
