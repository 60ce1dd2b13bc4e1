use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::blocks::{
    duration_feature_block, f0_feature_block, formant_feature_block, perturbation_block,
    track_feature_block,
};
use super::registry::{external_group_of, FeatureGroup, FeatureRegistry};
use super::{FeatureError, FeatureVector};
use crate::corpus::Waveform;
use crate::dsp::{
    audibility, band_intensity_track, f0_track, formant_tracks, intensity_track,
    mfcc_scalar_track, AudibilitySegmentation, Band, FormantTracks, ScalarTrack, HOP_S,
};

/// Externally computed feature values for one utterance, keyed by name.
pub type Sidecar = BTreeMap<String, f64>;

/// Every track the native feature blocks read, computed once.
#[derive(Debug, Clone)]
pub struct AcousticAnalysis {
    pub intensity: ScalarTrack,
    pub lowpass: ScalarTrack,
    pub highpass: ScalarTrack,
    pub f0: ScalarTrack,
    pub mfcc: ScalarTrack,
    pub formants: FormantTracks,
    pub audibility: AudibilitySegmentation,
}

impl AcousticAnalysis {
    pub fn of(w: &Waveform) -> Self {
        let intensity = intensity_track(w);
        let f0 = f0_track(w);
        let formants = formant_tracks(w, &f0);
        let audibility = audibility(&intensity);
        Self {
            lowpass: band_intensity_track(w, Band::Lowpass),
            highpass: band_intensity_track(w, Band::Highpass),
            mfcc: mfcc_scalar_track(w),
            intensity,
            f0,
            formants,
            audibility,
        }
    }

    /// Native blocks in registry order, optionally without run durations.
    pub fn native_values(&self, with_duration: bool) -> Vec<f64> {
        let mut v = f0_feature_block(&self.f0);
        for t in [&self.intensity, &self.lowpass, &self.highpass, &self.mfcc] {
            v.extend(track_feature_block(t));
        }
        v.extend(formant_feature_block(&self.formants));
        if with_duration {
            v.extend(duration_feature_block(&self.audibility, HOP_S));
        }
        v.extend(perturbation_block(&self.f0, &self.intensity));
        v
    }
}

/// External groups present in a sidecar. Every name must belong to an
/// external group, every value must be finite, and a group is either
/// complete or absent.
pub fn sidecar_groups(sidecar: &Sidecar) -> Result<Vec<FeatureGroup>, FeatureError> {
    let mut groups = BTreeSet::new();
    for (name, &value) in sidecar {
        let group = external_group_of(name).ok_or_else(|| FeatureError::UnknownSidecarFeature(name.clone()))?;
        if !value.is_finite() {
            return Err(FeatureError::NonFiniteSidecar(name.clone()));
        }
        groups.insert(group);
    }
    for &g in &groups {
        if let Some(missing) = g.names().into_iter().find(|n| !sidecar.contains_key(n)) {
            return Err(FeatureError::IncompleteSidecarGroup {
                group: g.as_str(),
                missing,
            });
        }
    }
    Ok(FeatureGroup::EXTERNAL.into_iter().filter(|g| groups.contains(g)).collect())
}

pub(crate) fn append_sidecar(values: &mut Vec<f64>, groups: &[FeatureGroup], sidecar: &Sidecar) {
    for g in groups {
        values.extend(g.names().iter().map(|n| sidecar[n]));
    }
}

/// Native utterance vector (248 values) followed by any complete external
/// groups supplied in `sidecar`.
pub fn utterance_features(w: &Waveform, sidecar: Option<&Sidecar>) -> Result<FeatureVector, FeatureError> {
    utterance_features_from(&AcousticAnalysis::of(w), sidecar)
}

pub fn utterance_features_from(
    analysis: &AcousticAnalysis,
    sidecar: Option<&Sidecar>,
) -> Result<FeatureVector, FeatureError> {
    let groups = match sidecar {
        Some(s) => sidecar_groups(s)?,
        None => Vec::new(),
    };
    let mut values = analysis.native_values(true);
    if let Some(s) = sidecar {
        append_sidecar(&mut values, &groups, s);
    }
    FeatureVector::new(values, Arc::new(FeatureRegistry::utterance(&groups)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use core::f64::consts::PI;

    fn tone(secs: f64) -> Waveform {
        let n = (16000.0 * secs) as usize;
        let x = (0..n)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.5 * (2.0 * PI * 150.0 * t).sin() + 0.2 * (2.0 * PI * 450.0 * t).sin()
            })
            .collect();
        Waveform::new(x, 16000).unwrap()
    }

    fn full_sidecar() -> Sidecar {
        FeatureGroup::EXTERNAL
            .iter()
            .flat_map(|g| g.names())
            .enumerate()
            .map(|(i, n)| (n, i as f64 * 0.5))
            .collect()
    }

    #[test]
    fn native_length_and_finiteness() {
        let v = utterance_features(&tone(0.6), None).unwrap();
        assert_eq!(v.len(), 248);
        assert!(v.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn silence_is_finite_with_zero_f0_block() {
        let w = Waveform::new(vec![0.0; 8000], 16000).unwrap();
        let v = utterance_features(&w, None).unwrap();
        assert_eq!(v.len(), 248);
        assert!(v.values().iter().all(|x| x.is_finite()));
        assert_eq!(&v.values()[..44], &[0.0; 44]);
    }

    #[test]
    fn full_sidecar_gives_318() {
        let s = full_sidecar();
        let v = utterance_features(&tone(0.3), Some(&s)).unwrap();
        assert_eq!(v.len(), 318);
        let i = v.registry().index_of("msl b1").unwrap();
        assert_eq!(v.values()[i], s["msl b1"]);
    }

    #[test]
    fn sidecar_errors() {
        let w = tone(0.3);
        let mut s = full_sidecar();
        s.insert("not a feature".to_string(), 1.0);
        assert!(matches!(
            utterance_features(&w, Some(&s)),
            Err(FeatureError::UnknownSidecarFeature(n)) if n == "not a feature"
        ));

        let mut s = full_sidecar();
        s.insert("msl b1".to_string(), f64::NAN);
        assert!(matches!(utterance_features(&w, Some(&s)), Err(FeatureError::NonFiniteSidecar(_))));

        let mut s = full_sidecar();
        s.remove("msl b13");
        assert!(matches!(
            utterance_features(&w, Some(&s)),
            Err(FeatureError::IncompleteSidecarGroup { group: "loudness", .. })
        ));

        // A native name is not a sidecar feature.
        let mut s = Sidecar::new();
        s.insert("mean F1".to_string(), 1.0);
        assert!(utterance_features(&w, Some(&s)).is_err());
    }

    #[test]
    fn partial_sidecar_by_group() {
        let s: Sidecar = FeatureGroup::Harmonicity.names().into_iter().map(|n| (n, 1.0)).collect();
        let v = utterance_features(&tone(0.3), Some(&s)).unwrap();
        assert_eq!(v.len(), 248 + 14);
    }

    #[test]
    fn halving_amplitude_shifts_intensity_locations() {
        let w = tone(0.8);
        let a = utterance_features(&w, None).unwrap();
        let b = utterance_features(&w.scaled(0.5), None).unwrap();
        let shift = 20.0 * 0.5f64.log10();
        let base = a.registry().index_of("intensity series mean").unwrap();
        for (k, location) in [true, true, true, false, false, true, true, true, false].iter().enumerate() {
            let (x, y) = (a.values()[base + k], b.values()[base + k]);
            let expected = if *location { x + shift } else { x };
            assert!((y - expected).abs() < 1e-6, "stat {k}: {x} -> {y}");
        }
        let f0 = a.registry().index_of("f0 series mean").unwrap();
        assert!((a.values()[f0] - b.values()[f0]).abs() < 1e-9);
    }
}
