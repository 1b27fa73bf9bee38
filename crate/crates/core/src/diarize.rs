//! Two-speaker segmentation: MFCCs on speech frames, k-means++ seeding, then
//! alternating Fisher-discriminant projection and nearest-mean relabelling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::dsp::{frame_signal, stft, WindowKind};
use crate::error::{Error, Result};
use crate::features::MelBank;
use crate::real::Real;
use crate::vad::VadDecision;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiarizeConfig {
    pub seed: u64,
    pub smooth_frames: usize,
    pub min_turn_frames: usize,
    pub max_iter: usize,
    pub kmeans_iter: usize,
    pub ridge: f64,
    /// Projected class separation (difference of means over pooled std)
    /// below which the clip is treated as a single speaker.
    pub min_separation: f64,
}

impl Default for DiarizeConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            smooth_frames: 25,
            min_turn_frames: 50,
            max_iter: 20,
            kmeans_iter: 100,
            ridge: 1e-6,
            min_separation: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeakerId {
    S1,
    S2,
}

impl SpeakerId {
    pub fn index(self) -> usize {
        self as usize
    }

    fn from_index(i: usize) -> Self {
        if i == 0 {
            SpeakerId::S1
        } else {
            SpeakerId::S2
        }
    }
}

/// Frame range `[start_frame, end_frame)` in the clip's frame grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerSegment {
    pub start_frame: usize,
    pub end_frame: usize,
    pub speaker: SpeakerId,
}

impl SpeakerSegment {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample range covered by the segment's frames.
    pub fn sample_range(&self, frame_len: usize, hop: usize, n_samples: usize) -> std::ops::Range<usize> {
        let start = (self.start_frame * hop).min(n_samples);
        let end = ((self.end_frame - 1) * hop + frame_len).min(n_samples);
        start..end.max(start)
    }
}

/// Per-speech-frame labels plus the segments built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Diarization {
    /// Clip frame index of every speech frame.
    pub speech_frames: Vec<usize>,
    /// Speaker of every speech frame after smoothing and turn merging.
    pub labels: Vec<SpeakerId>,
    pub segments: Vec<SpeakerSegment>,
    pub iterations: usize,
    pub separation: f64,
}

pub fn diarize<T: Real>(clip: &AudioClip<T>, vad: &VadDecision<T>, cfg: &DiarizeConfig) -> Result<Vec<SpeakerSegment>> {
    diarize_detailed(clip, vad, cfg).map(|d| d.segments)
}

/// Like [`diarize`], but a clip judged to hold a single speaker yields one
/// `S1` segment per contiguous speech run instead of an error.
pub fn diarize_or_single<T: Real>(
    clip: &AudioClip<T>,
    vad: &VadDecision<T>,
    cfg: &DiarizeConfig,
) -> Result<(Vec<SpeakerSegment>, bool)> {
    match diarize(clip, vad, cfg) {
        Ok(s) => Ok((s, false)),
        Err(Error::DegenerateClusters) => {
            let speech: Vec<usize> = (0..vad.len()).filter(|&i| vad.speech_flags[i]).collect();
            Ok((segments_from(&speech, &vec![SpeakerId::S1; speech.len()]), true))
        }
        Err(e) => Err(e),
    }
}

pub fn diarize_detailed<T: Real>(clip: &AudioClip<T>, vad: &VadDecision<T>, cfg: &DiarizeConfig) -> Result<Diarization> {
    let frames = frame_signal(clip, WindowKind::Hann)?;
    if frames.len() != vad.len() {
        return Err(Error::LengthMismatch { left: frames.len(), right: vad.len() });
    }
    let speech: Vec<usize> = (0..vad.len()).filter(|&i| vad.speech_flags[i]).collect();
    let needed = 2 * cfg.min_turn_frames.max(1);
    if speech.len() < needed {
        return Err(Error::TooLittleSpeech { speech_frames: speech.len(), needed });
    }
    let spec = stft(&frames)?;
    let bank = MelBank::<T>::standard();
    let mut x: Vec<Vec<f64>> = speech
        .iter()
        .map(|&t| bank.mfcc(spec.power(t)).iter().map(|v| v.to_f64_lossy()).collect())
        .collect();
    standardize(&mut x);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels = kmeans2(&x, cfg.kmeans_iter, &mut rng);
    let mut iterations = 0;
    let mut proj = Vec::new();
    for _ in 0..cfg.max_iter {
        iterations += 1;
        let w = match fld_axis(&x, &labels, cfg.ridge) {
            Ok(w) => w,
            Err(Error::DegenerateMeans) => return Err(Error::DegenerateClusters),
            Err(e) => return Err(e),
        };
        proj = x.iter().map(|r| dot(r, &w)).collect();
        let (m0, m1) = projected_means(&proj, &labels)?;
        let raw: Vec<usize> = proj.iter().map(|&p| usize::from((p - m1).abs() < (p - m0).abs())).collect();
        let next = median_smooth(&raw, cfg.smooth_frames);
        if next == labels {
            break;
        }
        labels = next;
    }
    if proj.is_empty() || labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::DegenerateClusters);
    }
    let separation = projected_separation(&proj, &labels)?;
    if !(separation >= cfg.min_separation) {
        return Err(Error::DegenerateClusters);
    }
    merge_short_runs(&mut labels, cfg.min_turn_frames);
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::DegenerateClusters);
    }
    // first speech frame defines S1, making output independent of cluster order
    let flip = labels[0] == 1;
    let ids: Vec<SpeakerId> = labels.iter().map(|&l| SpeakerId::from_index(l ^ usize::from(flip))).collect();
    let segments = segments_from(&speech, &ids);
    Ok(Diarization { speech_frames: speech, labels: ids, segments, iterations, separation })
}

/// Contiguous runs of equal labels over the speech-frame sequence. A new
/// segment starts whenever the speaker changes; gaps of non-speech frames
/// between same-speaker speech frames also split segments.
fn segments_from(speech: &[usize], labels: &[SpeakerId]) -> Vec<SpeakerSegment> {
    let mut out: Vec<SpeakerSegment> = Vec::new();
    for (&t, &s) in speech.iter().zip(labels) {
        match out.last_mut() {
            Some(seg) if seg.speaker == s && seg.end_frame == t => seg.end_frame = t + 1,
            _ => out.push(SpeakerSegment { start_frame: t, end_frame: t + 1, speaker: s }),
        }
    }
    out
}

fn standardize(x: &mut [Vec<f64>]) {
    let n = x.len() as f64;
    let d = x[0].len();
    for j in 0..d {
        let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let s = (x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n).sqrt();
        let s = if s > 1e-12 { s } else { 1.0 };
        x.iter_mut().for_each(|r| r[j] = (r[j] - m) / s);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Two-cluster k-means with k-means++ seeding.
pub(crate) fn kmeans2(x: &[Vec<f64>], max_iter: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let first = rng.gen_range(0..x.len());
    let d2: Vec<f64> = x.iter().map(|r| dist2(r, &x[first])).collect();
    let total: f64 = d2.iter().sum();
    let second = if total > 0.0 {
        let mut target = rng.gen::<f64>() * total;
        let mut pick = x.len() - 1;
        for (i, &d) in d2.iter().enumerate() {
            if target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        pick
    } else {
        first
    };
    let mut centres = [x[first].clone(), x[second].clone()];
    let mut labels = vec![0usize; x.len()];
    for it in 0..max_iter.max(1) {
        let next: Vec<usize> = x.iter().map(|r| usize::from(dist2(r, &centres[1]) < dist2(r, &centres[0]))).collect();
        if it > 0 && next == labels {
            break;
        }
        labels = next;
        for (k, c) in centres.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = x.iter().zip(&labels).filter(|(_, &l)| l == k).map(|(r, _)| r).collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len() as f64;
            for (j, cj) in c.iter_mut().enumerate() {
                *cj = members.iter().map(|r| r[j]).sum::<f64>() / n;
            }
        }
    }
    labels
}

fn class_stats(x: &[Vec<f64>], labels: &[usize]) -> Result<([Vec<f64>; 2], Vec<Vec<f64>>)> {
    let d = x.first().map_or(0, |r| r.len());
    let mut means = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for (r, &l) in x.iter().zip(labels) {
        counts[l] += 1;
        for (m, v) in means[l].iter_mut().zip(r) {
            *m += v;
        }
    }
    if counts.contains(&0) {
        return Err(Error::DegenerateClusters);
    }
    for k in 0..2 {
        means[k].iter_mut().for_each(|m| *m /= counts[k] as f64);
    }
    let mut sw = vec![vec![0.0; d]; d];
    for (r, &l) in x.iter().zip(labels) {
        let c: Vec<f64> = r.iter().zip(&means[l]).map(|(v, m)| v - m).collect();
        for i in 0..d {
            for j in 0..d {
                sw[i][j] += c[i] * c[j];
            }
        }
    }
    Ok((means, sw))
}

/// Fisher discriminant direction `S_w^-1 (mu_0 - mu_1)` for labels in {0, 1},
/// unit length, with `ridge` added to the diagonal of the within-class scatter.
pub fn fld_axis(x: &[Vec<f64>], labels: &[usize], ridge: f64) -> Result<Vec<f64>> {
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: labels.len() });
    }
    let (means, mut sw) = class_stats(x, labels)?;
    let diff: Vec<f64> = means[0].iter().zip(&means[1]).map(|(a, b)| a - b).collect();
    let scale = means[0].iter().chain(&means[1]).fold(1.0f64, |a, v| a.max(v.abs()));
    if diff.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::DegenerateMeans);
    }
    for (i, row) in sw.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let w = cholesky_solve(&sw, &diff).ok_or(Error::SingularScatter)?;
    let norm = dot(&w, &w).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::SingularScatter);
    }
    Ok(w.into_iter().map(|v| v / norm).collect())
}

/// Between-class over within-class scatter along `w`.
pub fn fisher_criterion(x: &[Vec<f64>], labels: &[usize], w: &[f64]) -> Result<f64> {
    let (means, sw) = class_stats(x, labels)?;
    let between = (dot(&means[0], w) - dot(&means[1], w)).powi(2);
    let within: f64 = sw.iter().zip(w).map(|(row, wi)| wi * dot(row, w)).sum();
    Ok(between / within)
}

fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        z[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * z[k]).sum::<f64>()) / l[i][i];
    }
    Some(z)
}

fn projected_means(p: &[f64], labels: &[usize]) -> Result<(f64, f64)> {
    let mut s = [0.0; 2];
    let mut c = [0usize; 2];
    for (&v, &l) in p.iter().zip(labels) {
        s[l] += v;
        c[l] += 1;
    }
    if c.contains(&0) {
        return Err(Error::DegenerateClusters);
    }
    Ok((s[0] / c[0] as f64, s[1] / c[1] as f64))
}

fn projected_separation(p: &[f64], labels: &[usize]) -> Result<f64> {
    let (m0, m1) = projected_means(p, labels)?;
    let within: f64 = p.iter().zip(labels).map(|(&v, &l)| (v - if l == 0 { m0 } else { m1 }).powi(2)).sum();
    let sd = (within / p.len() as f64).sqrt();
    Ok(if sd > 0.0 { (m0 - m1).abs() / sd } else { f64::INFINITY })
}

/// Majority vote over a centred window of `width` labels (a running median
/// for binary labels); the window is truncated at the edges, ties keep the
/// current label.
pub fn median_smooth(labels: &[usize], width: usize) -> Vec<usize> {
    let half = width / 2;
    let mut prefix = vec![0usize; labels.len() + 1];
    for (i, &l) in labels.iter().enumerate() {
        prefix[i + 1] = prefix[i] + l;
    }
    (0..labels.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(labels.len());
            let ones = prefix[hi] - prefix[lo];
            let n = hi - lo;
            match (2 * ones).cmp(&n) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => labels[i],
            }
        })
        .collect()
}

fn runs(labels: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.2 == l => r.1 = i + 1,
            _ => out.push((i, i + 1, l)),
        }
    }
    out
}

/// Repeatedly absorbs the shortest run below `min_len` into its longer neighbour.
pub fn merge_short_runs(labels: &mut [usize], min_len: usize) {
    loop {
        let r = runs(labels);
        if r.len() < 2 {
            return;
        }
        let Some((k, _)) = r.iter().enumerate().filter(|(_, x)| x.1 - x.0 < min_len).min_by_key(|(_, x)| x.1 - x.0)
        else {
            return;
        };
        let left = k.checked_sub(1).map(|j| r[j]);
        let right = r.get(k + 1).copied();
        let target = match (left, right) {
            (Some(a), Some(b)) => {
                if b.1 - b.0 > a.1 - a.0 {
                    b.2
                } else {
                    a.2
                }
            }
            (Some(a), None) => a.2,
            (None, Some(b)) => b.2,
            (None, None) => return,
        };
        labels[r[k].0..r[k].1].iter_mut().for_each(|l| *l = target);
    }
}
