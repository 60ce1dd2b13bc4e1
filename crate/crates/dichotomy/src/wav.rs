//! PCM-16 WAV input and output.

use std::path::Path;

use dichotomy_core::corpus::{Waveform, PIPELINE_RATE};
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Reads a 16-bit PCM file with one or two channels. Samples are scaled by
/// 1/32768 and stereo frames are averaged.
pub fn read_wav(path: &Path) -> Result<Waveform> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let unsupported = |msg: String| Error::Audio {
        path: path.to_path_buf(),
        msg,
    };
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(unsupported(format!(
            "{:?} {}-bit samples; only 16-bit PCM is read",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(unsupported(format!("{channels} channels")));
    }
    let raw = reader
        .into_samples::<i16>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    let samples: Vec<f64> = raw
        .chunks_exact(channels)
        .map(|frame| frame.iter().map(|&s| f64::from(s) / 32768.0).sum::<f64>() / channels as f64)
        .collect();
    if samples.is_empty() {
        return Err(unsupported("no sample data".into()));
    }
    Ok(Waveform::new(samples, spec.sample_rate)?)
}

/// Reads a file and resamples it to the pipeline rate.
pub fn load_audio(path: &Path) -> Result<Waveform> {
    Ok(read_wav(path)?.resample(PIPELINE_RATE)?)
}

/// Writes mono 16-bit PCM, rounding and saturating each sample.
pub fn write_wav(path: &Path, w: &Waveform) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut out = WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in w.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.write_sample(q).map_err(wav_err)?;
    }
    out.finalize().map_err(wav_err)
}
