// aldr/dataset.cc

// Copyright 2026  The ALDR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "aldr/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace aldr {
namespace data {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
// Peak amplitude of the summed identity harmonics.
constexpr double kIdentityAmplitude = 0.35;
// RMS of the colored noise before the per-utterance gain.
constexpr double kNoiseRms = 0.07;
// Tremolo depth on the identity harmonics. The speaker-specific tremolo
// rate is temporal structure, so it survives per-bin normalization, which
// erases any purely stationary spectral shape.
constexpr double kAmDepth = 0.9;

// Uniform double in [lo, hi); owned here so regeneration is bitwise
// reproducible regardless of the standard library's distributions.
double runif(std::mt19937_64 &rng, double lo, double hi) {
  const double u = (rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

int rint_below(std::mt19937_64 &rng, int n) {
  return static_cast<int>(rng() % static_cast<uint64_t>(n));
}

struct SpeakerProfile {
  double freqs[3];    // bin-centered harmonic frequencies, Hz
  double amps[3];     // envelope-shaped amplitudes, sum = kIdentityAmplitude
  double am_rate_hz;  // speaker-specific tremolo rate
};

struct NuisanceProfile {
  double center_hz;  // resonator center
  double r;          // class-specific pole radius (sets coherence time)
};

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return v < 10 ? "0" + s : s;
}

}  // namespace

int Manifest::find(const std::string &id) const {
  if (index_.size() != entries.size()) {
    index_.clear();
    for (size_t i = 0; i < entries.size(); ++i)
      index_[entries[i].id] = static_cast<int>(i);
  }
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::string Manifest::resolve(const Utterance &u) const {
  if (root.empty() || fs::path(u.path).is_absolute()) return u.path;
  return (fs::path(root) / u.path).string();
}

GeneratedDataset generate_synthetic(const SynthSpec &spec,
                                    const std::string &out_dir) {
  if (spec.n_speakers < 2)
    throw ConfigError("need at least 2 speakers, got " +
                      std::to_string(spec.n_speakers));
  if (spec.n_nuisance < 2)
    throw ConfigError("need at least 2 nuisance classes, got " +
                      std::to_string(spec.n_nuisance));
  if (spec.utts_per_speaker < 2)
    throw ConfigError("need at least 2 utterances per speaker, got " +
                      std::to_string(spec.utts_per_speaker));
  if (spec.seconds <= 0.1 || spec.sample_rate < 8000)
    throw ConfigError("utterance length or sample rate out of range");

  fs::create_directories(fs::path(out_dir) / "wav");
  std::mt19937_64 rng(spec.seed);

  // Harmonics sit on DFT bins: multiples of sample_rate / window.
  const double bin_hz =
      static_cast<double>(spec.sample_rate) / audio::kWindowSamples;
  std::vector<SpeakerProfile> speakers(spec.n_speakers);
  for (int s = 0; s < spec.n_speakers; ++s) {
    SpeakerProfile &sp = speakers[s];
    std::set<int> picked;
    while (picked.size() < 3) picked.insert(8 + rint_below(rng, 73));
    const double mu = runif(rng, 500.0, 2500.0);
    const double sigma = runif(rng, 300.0, 800.0);
    int i = 0;
    double sum = 0.0;
    for (int k : picked) {
      sp.freqs[i] = k * bin_hz;
      const double d = sp.freqs[i] - mu;
      sp.amps[i] = 0.3 + 0.7 * std::exp(-d * d / (2.0 * sigma * sigma));
      sum += sp.amps[i];
      ++i;
    }
    for (double &a : sp.amps) a *= kIdentityAmplitude / sum;
    // Evenly spread rates in [1.5, 7.5] Hz, a few cycles per segment.
    sp.am_rate_hz =
        1.5 + 6.0 * s / std::max(1, spec.n_speakers - 1);
  }

  // Nuisance classes occupy staggered bands and distinct pole radii, so both
  // the band position and the noise coherence time identify the class.
  std::vector<NuisanceProfile> classes(spec.n_nuisance);
  const double band = 2800.0 / spec.n_nuisance;
  for (int j = 0; j < spec.n_nuisance; ++j) {
    classes[j].center_hz = runif(rng, 400.0 + j * band, 400.0 + (j + 0.7) * band);
    classes[j].r = 0.90 + 0.07 * j / (spec.n_nuisance - 1);
  }

  const int n_samples =
      static_cast<int>(std::llround(spec.seconds * spec.sample_rate));
  GeneratedDataset out;
  out.manifest.root = out_dir;
  std::vector<double> noise(n_samples);
  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int u = 0; u < spec.utts_per_speaker; ++u) {
      const int nuisance = u % spec.n_nuisance;
      const double gain = runif(rng, 0.5, 2.0);
      const double offset = runif(rng, 0.0, 1.0);  // seconds
      const double am_phase = runif(rng, 0.0, 2.0 * kPi);

      const NuisanceProfile &np = classes[nuisance];
      const double r = np.r + runif(rng, -0.003, 0.003);
      const double c1 =
          2.0 * r * std::cos(2.0 * kPi * np.center_hz / spec.sample_rate);
      const double c2 = -r * r;
      double y1 = 0.0, y2 = 0.0, energy = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        const double white = runif(rng, -1.0, 1.0);
        const double y = white + c1 * y1 + c2 * y2;
        noise[i] = y;
        energy += y * y;
        y2 = y1;
        y1 = y;
      }
      const double scale = kNoiseRms / std::sqrt(energy / n_samples);

      audio::Waveform wav;
      wav.sample_rate = spec.sample_rate;
      wav.samples.resize(n_samples);
      const SpeakerProfile &sp = speakers[s];
      for (int i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate + offset;
        double v = 0.0;
        for (int h = 0; h < 3; ++h)
          v += sp.amps[h] * std::sin(2.0 * kPi * sp.freqs[h] * t);
        const double env =
            1.0 + kAmDepth * std::sin(2.0 * kPi * sp.am_rate_hz * t + am_phase);
        wav.samples[i] = env * v + gain * scale * noise[i];
      }

      Utterance utt;
      utt.id = "s" + two_digits(s) + "_u" + two_digits(u);
      utt.speaker_id = s;
      utt.speaker_label = "spk" + two_digits(s);
      utt.path = "wav/" + utt.id + ".wav";
      write_wav((fs::path(out_dir) / utt.path).string(), wav);
      out.manifest.entries.push_back(utt);
      out.nuisance_ids.push_back(nuisance);
    }
    out.manifest.speaker_names.push_back("spk" + two_digits(s));
  }

  write_manifest(out.manifest, (fs::path(out_dir) / "manifest.txt").string());
  {
    std::ofstream nf(fs::path(out_dir) / "nuisance.txt");
    for (size_t i = 0; i < out.manifest.entries.size(); ++i)
      nf << out.manifest.entries[i].id << " " << out.nuisance_ids[i] << "\n";
  }
  std::vector<TrialPair> trials =
      make_trials(out.manifest, out.nuisance_ids, rng);
  write_trials(trials, (fs::path(out_dir) / "trials.txt").string());
  return out;
}

std::vector<TrialPair> make_trials(const Manifest &manifest,
                                   const std::vector<int> &nuisance_ids,
                                   std::mt19937_64 &rng) {
  const int n = static_cast<int>(manifest.entries.size());
  if (nuisance_ids.size() != manifest.entries.size())
    throw DataError("nuisance labels do not align with the manifest");
  std::vector<TrialPair> trials;
  trials.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const Utterance &a = manifest.entries[i];
    std::vector<int> same_pref, same_any, diff_pref, diff_any;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool same_spk = manifest.entries[j].speaker_id == a.speaker_id;
      const bool same_nui = nuisance_ids[j] == nuisance_ids[i];
      if (same_spk) {
        same_any.push_back(j);
        if (!same_nui) same_pref.push_back(j);  // score across nuisance
      } else {
        diff_any.push_back(j);
        if (same_nui) diff_pref.push_back(j);  // share the nuisance class
      }
    }
    if (same_any.empty() || diff_any.empty())
      throw DataError("utterance " + a.id +
                      " lacks a same-speaker or different-speaker partner");
    const std::vector<int> &s = same_pref.empty() ? same_any : same_pref;
    const std::vector<int> &d = diff_pref.empty() ? diff_any : diff_pref;
    TrialPair same;
    same.same = true;
    same.a = a.id;
    same.b = manifest.entries[s[rint_below(rng, static_cast<int>(s.size()))]].id;
    trials.push_back(same);
    TrialPair diff;
    diff.same = false;
    diff.a = a.id;
    diff.b = manifest.entries[d[rint_below(rng, static_cast<int>(d.size()))]].id;
    trials.push_back(diff);
  }
  return trials;
}

void write_manifest(const Manifest &manifest, const std::string &path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open " + path + " for writing");
  for (const Utterance &u : manifest.entries)
    f << u.id << " " << u.speaker_label << " " << u.path << "\n";
}

Manifest load_manifest(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open manifest " + path);
  Manifest m;
  m.root = fs::path(path).parent_path().string();
  std::unordered_map<std::string, int> speaker_index;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Utterance u;
    std::string extra;
    if (!(ss >> u.id >> u.speaker_label >> u.path) || (ss >> extra))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected `id speaker path`");
    if (!seen_ids.insert(u.id).second)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": duplicate utterance id " + u.id);
    auto it = speaker_index.find(u.speaker_label);
    if (it == speaker_index.end()) {
      it = speaker_index.emplace(u.speaker_label, m.n_speakers()).first;
      m.speaker_names.push_back(u.speaker_label);
    }
    u.speaker_id = it->second;
    m.entries.push_back(std::move(u));
  }
  if (m.entries.empty())
    throw DataError(path + ": manifest contains no utterances");
  return m;
}

void write_trials(const std::vector<TrialPair> &trials,
                  const std::string &path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open " + path + " for writing");
  for (const TrialPair &t : trials)
    f << (t.same ? 1 : 0) << " " << t.a << " " << t.b << "\n";
}

std::vector<TrialPair> load_trials(const std::string &path,
                                   const Manifest &manifest) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open trial list " + path);
  std::vector<TrialPair> trials;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string label, extra;
    TrialPair t;
    if (!(ss >> label >> t.a >> t.b) || (ss >> extra))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected `label id_a id_b`");
    if (label == "1") {
      t.same = true;
    } else if (label == "0") {
      t.same = false;
    } else {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": label must be 0 or 1, got " + label);
    }
    if (manifest.find(t.a) < 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown utterance id " + t.a);
    if (manifest.find(t.b) < 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown utterance id " + t.b);
    trials.push_back(std::move(t));
  }
  if (trials.empty()) throw DataError(path + ": no trials");
  return trials;
}

std::vector<int> load_nuisance(const std::string &path,
                               const Manifest &manifest) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open nuisance file " + path);
  std::vector<int> labels(manifest.entries.size(), -1);
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string id, extra;
    int cls = -1;
    if (!(ss >> id >> cls) || (ss >> extra) || cls < 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected `id class`");
    const int idx = manifest.find(id);
    if (idx < 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown utterance id " + id);
    labels[idx] = cls;
  }
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0)
      throw DataError(path + ": no nuisance label for " +
                      manifest.entries[i].id);
  return labels;
}

}  // namespace data
}  // namespace aldr
