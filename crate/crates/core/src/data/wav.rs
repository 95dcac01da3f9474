use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat as HoundFormat, WavReader, WavSpec, WavWriter};

use crate::dsp::AudioSignal;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleFormat {
    Int16,
    #[default]
    Float32,
}

fn wav_err(path: &Path) -> impl Fn(hound::Error) -> Error + '_ {
    move |source| Error::Wav { path: path.to_path_buf(), source }
}

/// Reads every channel of a 16-bit integer or 32-bit float WAV file,
/// scaled to [-1, 1].
pub fn load_audio_channels(path: &Path) -> Result<(Vec<Vec<f64>>, u32)> {
    let mut reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(Error::Data(format!("{}: {channels} channels, expected 1 or 2", path.display())));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (HoundFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(wav_err(path))?,
        (HoundFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(wav_err(path))?,
        (fmt, bits) => {
            return Err(Error::Data(format!(
                "{}: unsupported encoding {fmt:?} {bits}-bit",
                path.display()
            )))
        }
    };
    if interleaved.is_empty() {
        return Err(Error::Data(format!("{}: file holds no samples", path.display())));
    }
    let mut out = vec![Vec::with_capacity(interleaved.len() / channels); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (c, v) in frame.iter().enumerate() {
            out[c].push(*v);
        }
    }
    Ok((out, spec.sample_rate))
}

/// Reads a mono file. Stereo files are an error; use [`load_audio_mono`].
pub fn load_audio(path: &Path) -> Result<AudioSignal> {
    let (mut channels, sr) = load_audio_channels(path)?;
    if channels.len() != 1 {
        return Err(Error::Data(format!(
            "{}: {} channels; downmix with load_audio_mono",
            path.display(),
            channels.len()
        )));
    }
    AudioSignal::new(channels.remove(0), sr)
}

/// Reads a mono or stereo file, averaging stereo channels.
pub fn load_audio_mono(path: &Path) -> Result<AudioSignal> {
    let (channels, sr) = load_audio_channels(path)?;
    match channels.as_slice() {
        [mono] => AudioSignal::new(mono.clone(), sr),
        [left, right] => to_mono(&AudioSignal::new(left.clone(), sr)?, &AudioSignal::new(right.clone(), sr)?),
        _ => unreachable!("channel count checked on load"),
    }
}

pub fn to_mono(left: &AudioSignal, right: &AudioSignal) -> Result<AudioSignal> {
    if left.len() != right.len() || left.sample_rate() != right.sample_rate() {
        return Err(Error::Signal("channels differ in length or sample rate".into()));
    }
    let samples = left.samples().iter().zip(right.samples()).map(|(l, r)| (l + r) / 2.0).collect();
    AudioSignal::new(samples, left.sample_rate())
}

pub fn save_audio(signal: &AudioSignal, path: &Path, format: SampleFormat) -> Result<()> {
    let (bits, fmt) = match format {
        SampleFormat::Int16 => (16, HoundFormat::Int),
        SampleFormat::Float32 => (32, HoundFormat::Float),
    };
    let spec = WavSpec { channels: 1, sample_rate: signal.sample_rate(), bits_per_sample: bits, sample_format: fmt };
    let mut buf = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut buf, spec).map_err(wav_err(path))?;
        for &v in signal.samples() {
            match format {
                SampleFormat::Int16 => {
                    let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    w.write_sample(q)
                }
                SampleFormat::Float32 => w.write_sample(v as f32),
            }
            .map_err(wav_err(path))?;
        }
        w.finalize().map_err(wav_err(path))?;
    }
    super::write_atomic(path, &buf.into_inner())
}
