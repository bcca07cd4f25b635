// Copyright 2026 the framescore authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end: distort | score | eval-detect | eval-coupling |
// eval-corr. Every command writes its effective run_config.json (with the
// tool version) into the output directory and is deterministic given the
// inputs, the configuration, and the seed.
//
// Exit codes: 0 = success, 1 = fatal error (bad arguments, unreadable
// required inputs), 2 = completed with per-utterance failures (see
// skipped.tsv / stderr).

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "framescore/alignment.hpp"
#include "framescore/audio.hpp"
#include "framescore/distortion.hpp"
#include "framescore/eval_corr.hpp"
#include "framescore/eval_detect.hpp"
#include "framescore/manifest.hpp"
#include "framescore/rng.hpp"
#include "framescore/scoring.hpp"
#include "framescore/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace framescore;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

/// Runs fn over [0, n) with per-item error capture; results are keyed by
/// index so the output does not depend on scheduling.
template <class Fn>
std::vector<std::string> for_each_utterance(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::string> errors(n);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  return errors;
}

void write_run_config(const RunConfig& config, const fs::path& out_dir) {
  json j = config.to_json();
  j["tool_version"] = kToolVersion;
  write_json_atomic(j, out_dir / "run_config.json");
}

fs::path resolve_out_dir(std::string out_flag) {
  if (out_flag.empty()) {
    if (const char* env = std::getenv("FRAMESCORE_OUT")) out_flag = env;
  }
  if (out_flag.empty()) {
    throw Error("no output directory: pass --out or set FRAMESCORE_OUT");
  }
  fs::path dir(out_flag);
  fs::create_directories(dir);
  return dir;
}

/// Output location for a distorted file: the wav path relative to the
/// manifest directory when it is inside it, otherwise just the file name,
/// with `.distorted.wav` replacing the extension.
fs::path distorted_rel_path(const Manifest& manifest, const fs::path& wav_path) {
  std::error_code ec;
  fs::path rel = fs::relative(wav_path, manifest.directory, ec);
  if (ec || rel.empty() || rel.native().rfind("..", 0) == 0) rel = wav_path.filename();
  rel.replace_extension();
  rel += ".distorted.wav";
  return rel;
}

json record_to_json(const DistortionRecord& rec) {
  json j;
  j["utterance_id"] = rec.utterance_id;
  j["class"] = std::string(to_string(rec.kind));
  j["seed"] = rec.seed;
  j["requested_areas"] = rec.requested_areas;
  auto events_json = [](const std::vector<Interval>& events) {
    json arr = json::array();
    for (const auto& ev : events) arr.push_back({{"onset", ev.onset}, {"offset", ev.offset}});
    return arr;
  };
  j["events"] = events_json(rec.events);
  j["source_events"] = events_json(rec.source_events);
  switch (rec.kind) {
    case DistortionKind::pink_noise:
      j["noise_sigma"] = rec.noise_sigma;
      break;
    case DistortionKind::pitch_shift:
      j["pitch_magnitude"] = rec.pitch_magnitude;
      j["area_pitch_ratios"] = rec.area_pitch_ratios;
      break;
    case DistortionKind::vowel_stretch:
      j["stretch_factor"] = rec.stretch_factor;
      break;
    case DistortionKind::random_phase:
      break;
  }
  json timeline = json::array();
  for (const auto& [pre, post] : rec.timeline.nodes) timeline.push_back({pre, post});
  j["timeline"] = timeline;
  j["clipped_samples"] = rec.clipped_samples;
  return j;
}

// ---------------------------------------------------------------------------
// distort
// ---------------------------------------------------------------------------

int cmd_distort(const fs::path& manifest_path, RunConfig config, const fs::path& out_dir,
                const std::string& phone_map_path, bool float_output) {
  const Manifest manifest = parse_manifest(manifest_path);
  if (manifest.rows.empty()) throw Error("manifest has no rows");
  config.validate();
  write_run_config(config, out_dir);
  fs::create_directories(out_dir / "wavs");

  PhoneClassMap phone_map;
  const bool use_phone_map = !phone_map_path.empty();
  if (use_phone_map) phone_map = load_phone_class_map(phone_map_path);

  PlanOptions plan_options;
  plan_options.n_areas = config.n_areas;
  plan_options.min_duration = config.duration_min;
  plan_options.max_duration = config.duration_max;
  plan_options.allowed = config.classes;
  const bool needs_voicing =
      std::any_of(config.classes.begin(), config.classes.end(), [](DistortionKind k) {
        return k == DistortionKind::random_phase || k == DistortionKind::pitch_shift;
      });

  const std::size_t n = manifest.rows.size();
  std::vector<DistortionRecord> records(n);
  std::vector<char> ok(n, 0);
  std::vector<fs::path> out_paths(n);

  auto errors = for_each_utterance(n, config.jobs, [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    if (row.alignment_path.empty()) throw Error("no alignment_path in manifest");
    const AudioBuffer raw = read_wav(row.wav_path);
    AlignmentTrack track = parse_alignment(row.alignment_path, raw.duration());
    track.utterance_id = row.utterance_id;
    if (use_phone_map) track = apply_phone_class_map(std::move(track), phone_map);
    if (needs_voicing) track = with_voicing_fallback(std::move(track), raw);

    const AudioBuffer clean = loudness_normalize(raw, config.target_dbfs);
    const std::uint64_t seed = derive_seed(config.global_seed, row.utterance_id);
    const DistortionRecord plan = sample_plan(track, seed, plan_options);
    auto [distorted, record] = inject(clean, plan);

    const fs::path rel = distorted_rel_path(manifest, row.wav_path);
    const fs::path out_path = out_dir / "wavs" / rel;
    fs::create_directories(out_path.parent_path());
    const fs::path tmp = out_path.string() + ".tmp";
    write_wav(distorted, tmp, float_output ? WavDepth::float32 : WavDepth::pcm16);
    fs::rename(tmp, out_path);

    records[i] = std::move(record);
    out_paths[i] = out_path;
    ok[i] = 1;
  });

  // Aggregate in manifest (sorted-id) order.
  std::vector<DistortionRecord> done;
  Manifest out_manifest;
  out_manifest.directory = out_dir;
  std::ostringstream skipped;
  skipped << "utterance_id\treason\n";
  std::size_t n_failed = 0;
  std::map<std::string, int> class_counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) {
      done.push_back(records[i]);
      ++class_counts[std::string(to_string(records[i].kind))];
      ManifestRow row = manifest.rows[i];
      row.wav_path = out_paths[i];
      out_manifest.rows.push_back(std::move(row));
    } else {
      ++n_failed;
      skipped << manifest.rows[i].utterance_id << '\t' << errors[i] << '\n';
      std::cerr << "skipped " << manifest.rows[i].utterance_id << ": " << errors[i] << "\n";
    }
  }

  const fs::path gt_tmp = out_dir / "ground_truth.tsv.tmp";
  write_ground_truth(done, gt_tmp);
  fs::rename(gt_tmp, out_dir / "ground_truth.tsv");

  json records_json = json::array();
  for (const auto& rec : done) records_json.push_back(record_to_json(rec));
  write_json_atomic(records_json, out_dir / "records.json");
  write_text_atomic(skipped.str(), out_dir / "skipped.tsv");
  write_manifest(out_manifest, out_dir / "manifest.tsv");

  std::cout << "distorted " << done.size() << "/" << n << " utterances\n";
  for (const auto& [name, count] : class_counts) {
    std::cout << "  " << name << ": " << count << "\n";
  }
  return n_failed == 0 ? 0 : kExitPartial;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const fs::path& manifest_path, RunConfig config, const fs::path& out_dir,
              const std::string& scorer_name, const std::string& reference_manifest_path,
              bool unchunked, double constant_raw, bool binary_scores) {
  const Manifest manifest = parse_manifest(manifest_path);
  if (manifest.rows.empty()) throw Error("manifest has no rows");
  config.validate();
  write_run_config(config, out_dir);
  fs::create_directories(out_dir / "scores");

  // Resolve scorer inputs up front so missing files are reported before any
  // processing starts.
  std::map<std::string, fs::path> references;
  if (scorer_name == "spectral-ref") {
    const Manifest ref_manifest = reference_manifest_path.empty()
                                      ? manifest
                                      : parse_manifest(reference_manifest_path);
    for (const auto& row : ref_manifest.rows) references[row.utterance_id] = row.wav_path;
  }
  std::vector<std::string> missing;
  for (const auto& row : manifest.rows) {
    if (!fs::exists(row.wav_path)) {
      missing.push_back(row.utterance_id + ": wav " + row.wav_path.string());
    }
    if (scorer_name == "file") {
      if (row.score_path.empty() || !fs::exists(row.score_path)) {
        missing.push_back(row.utterance_id + ": score file " + row.score_path.string());
      }
    } else if (scorer_name == "spectral-ref") {
      const auto it = references.find(row.utterance_id);
      if (it == references.end() || !fs::exists(it->second)) {
        missing.push_back(row.utterance_id + ": clean reference");
      }
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "missing scorer inputs:";
    for (const auto& m : missing) os << "\n  " << m;
    throw Error(os.str());
  }

  ScoreOptions options;
  if (unchunked) {
    options.fusion = std::nullopt;
  } else {
    ResolutionFusion fusion;
    fusion.block_seconds = config.block_seconds;
    fusion.shift_fraction = config.shift_fraction;
    fusion.weight_logits = config.weight_logits;
    options.fusion = fusion;
  }
  options.clip = config.clip;
  options.gamma = config.gamma;
  options.beta = config.beta;
  options.frame_rate = config.frame_rate;
  options.target_dbfs = config.target_dbfs;

  const ConstantScorer constant_scorer(constant_raw);
  const SpectralReferenceScorer spectral_scorer;

  const std::size_t n = manifest.rows.size();
  std::vector<double> pooled(n, 0.0);
  std::vector<char> ok(n, 0);

  auto errors = for_each_utterance(n, config.jobs, [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    const AudioBuffer degraded = read_wav(row.wav_path);

    FrameScoreSequence scores;
    if (scorer_name == "constant") {
      scores = score_utterance(degraded, constant_scorer, options, nullptr, row.utterance_id);
    } else if (scorer_name == "spectral-ref") {
      const AudioBuffer clean = read_wav(references.at(row.utterance_id));
      scores = score_utterance(degraded, spectral_scorer, options, &clean, row.utterance_id);
    } else if (scorer_name == "file") {
      const FrameScoreSequence file_scores =
          read_score_file(row.score_path, config.frame_rate);
      const FileBackedScorer scorer(file_scores.scores, file_scores.frame_rate);
      scores = score_utterance(degraded, scorer, options, nullptr, row.utterance_id);
    } else {
      throw Error("unknown scorer: " + scorer_name);
    }

    const fs::path score_path =
        out_dir / "scores" / (row.utterance_id + (binary_scores ? ".scores.f32" : ".scores.txt"));
    if (binary_scores) {
      const fs::path tmp = score_path.string() + ".tmp";
      write_score_file(scores, tmp, true);
      fs::rename(fs::path(tmp.string() + ".json"), fs::path(score_path.string() + ".json"));
      fs::rename(tmp, score_path);
    } else {
      std::ostringstream os;
      os.precision(17);
      for (double s : scores.scores) os << s << '\n';
      write_text_atomic(os.str(), score_path);
    }
    pooled[i] = pool_utterance_score(scores);
    ok[i] = 1;
  });

  std::ostringstream pooled_csv;
  pooled_csv << "utterance_id,pooled_score\n";
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) {
      pooled_csv << manifest.rows[i].utterance_id << ',' << format_double(pooled[i]) << '\n';
    } else {
      ++n_failed;
      std::cerr << "failed " << manifest.rows[i].utterance_id << ": " << errors[i] << "\n";
    }
  }
  write_text_atomic(pooled_csv.str(), out_dir / "pooled.csv");
  std::cout << "scored " << (n - n_failed) << "/" << n << " utterances\n";
  return n_failed == 0 ? 0 : kExitPartial;
}

// ---------------------------------------------------------------------------
// eval-detect
// ---------------------------------------------------------------------------

struct GroupedGroundTruth {
  std::vector<std::string> ids;  // sorted
  std::map<std::string, std::vector<Interval>> events;
  std::map<std::string, std::string> klass;
};

GroupedGroundTruth group_ground_truth(const std::vector<GroundTruthEvent>& events) {
  GroupedGroundTruth g;
  for (const auto& ev : events) {
    g.events[ev.utterance_id].push_back({ev.onset, ev.offset});
    g.klass.emplace(ev.utterance_id, ev.klass);
  }
  for (const auto& [id, _] : g.events) g.ids.push_back(id);
  return g;
}

fs::path find_score_file(const fs::path& dir, const std::string& id) {
  for (const char* suffix : {".scores.txt", ".scores.f32", ".txt", ".f32"}) {
    const fs::path p = dir / (id + suffix);
    if (fs::exists(p)) return p;
  }
  return {};
}

std::vector<EvalUtterance> load_eval_utterances_from_scores(const fs::path& scores_dir,
                                                            const GroupedGroundTruth& gt,
                                                            double frame_rate) {
  std::vector<std::string> missing;
  std::vector<EvalUtterance> utts;
  for (const auto& id : gt.ids) {
    const fs::path p = find_score_file(scores_dir, id);
    if (p.empty()) {
      missing.push_back(id);
      continue;
    }
    FrameScoreSequence seq = read_score_file(p, frame_rate);
    seq.utterance_id = id;
    utts.push_back(make_eval_utterance(seq, gt.events.at(id), gt.klass.at(id)));
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "no score file for " << missing.size() << " utterance(s):";
    for (const auto& id : missing) os << ' ' << id;
    throw Error(os.str());
  }
  return utts;
}

std::vector<EvalUtterance> load_eval_utterances_from_annotations(const fs::path& counts_path,
                                                                 const fs::path& ratings_path,
                                                                 const GroupedGroundTruth& gt,
                                                                 double frame_rate) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == '\t') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    return fields;
  };

  std::map<std::string, int> ratings;
  {
    std::ifstream in(ratings_path);
    if (!in) throw Error("cannot open ratings file: " + ratings_path.string());
    std::string line;
    std::getline(in, line);  // header: utterance_id\tratings
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      if (f.size() != 2) throw Error("malformed ratings row: " + line);
      ratings[f[0]] = std::stoi(f[1]);
    }
  }

  std::map<std::string, std::vector<int>> counts;
  {
    std::ifstream in(counts_path);
    if (!in) throw Error("cannot open annotation counts: " + counts_path.string());
    std::string line;
    std::getline(in, line);  // header: utterance_id\tframe_index\tcount
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      if (f.size() != 3) throw Error("malformed annotation row: " + line);
      auto& v = counts[f[0]];
      const auto idx = static_cast<std::size_t>(std::stoul(f[1]));
      if (v.size() <= idx) v.resize(idx + 1, 0);
      v[idx] = std::stoi(f[2]);
    }
  }

  std::vector<EvalUtterance> utts;
  std::vector<std::string> missing;
  for (const auto& id : gt.ids) {
    const auto cit = counts.find(id);
    const auto rit = ratings.find(id);
    if (cit == counts.end() || rit == ratings.end()) {
      missing.push_back(id);
      continue;
    }
    EvalUtterance utt;
    utt.utterance_id = id;
    utt.curve = soft_scores_from_annotations(cit->second, rit->second);
    utt.frame_rate = frame_rate;
    utt.gt = gt.events.at(id);
    utt.klass = gt.klass.at(id);
    utts.push_back(std::move(utt));
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "no annotations for " << missing.size() << " utterance(s):";
    for (const auto& id : missing) os << ' ' << id;
    throw Error(os.str());
  }
  return utts;
}

int cmd_eval_detect(const fs::path& gt_path, const fs::path& scores_dir, RunConfig config,
                    const fs::path& out_dir, int kfold, const fs::path& annotations_path,
                    const fs::path& ratings_path) {
  config.validate();
  write_run_config(config, out_dir);

  const auto gt = group_ground_truth(read_ground_truth(gt_path));
  if (gt.ids.empty()) throw Error("ground truth file has no events");

  const std::vector<EvalUtterance> utts =
      annotations_path.empty()
          ? load_eval_utterances_from_scores(scores_dir, gt, config.frame_rate)
          : load_eval_utterances_from_annotations(annotations_path, ratings_path, gt,
                                                  config.frame_rate);

  std::set<std::string> classes;
  for (const auto& u : utts) classes.insert(u.klass);

  json report;
  report["tool_version"] = kToolVersion;
  report["n_utterances"] = utts.size();
  std::int64_t total_gt = 0;
  double total_seconds = 0.0;
  for (const auto& u : utts) {
    total_gt += static_cast<std::int64_t>(u.gt.size());
    total_seconds += static_cast<double>(u.curve.size()) / u.frame_rate;
  }
  report["total_gt_events"] = total_gt;
  report["total_audio_seconds"] = total_seconds;
  report["e_max"] = config.e_max;

  std::ostringstream csv;
  csv << "rho_dtc,medfilt_ms,auc\n";

  json results = json::array();
  for (double rho : config.rho_dtc) {
    json entry;
    entry["rho_dtc"] = rho;
    const SweepResult sweep = sweep_median_filter(utts, rho, config.medfilt_sweep_ms, config.e_max);
    json sweep_json = json::array();
    for (const auto& [ms, auc] : sweep.table) {
      sweep_json.push_back({{"medfilt_ms", ms}, {"auc", auc}});
      csv << format_double(rho) << ',' << format_double(ms) << ',' << format_double(auc) << '\n';
    }
    entry["sweep"] = sweep_json;
    entry["best_medfilt_ms"] = sweep.best_length_ms;

    const RocCurve roc = roc_auc(utts, sweep.best_length_ms, rho, config.e_max);
    entry["best_auc"] = roc.auc;
    json roc_json = json::array();
    for (const auto& p : roc.points) roc_json.push_back({{"efpr", p.efpr}, {"tpr", p.tpr}});
    entry["roc"] = roc_json;

    json per_class = json::array();
    for (const auto& klass : classes) {
      std::vector<EvalUtterance> subset;
      for (const auto& u : utts) {
        if (u.klass == klass) subset.push_back(u);
      }
      json c;
      c["class"] = klass;
      c["n_utterances"] = subset.size();
      c["auc"] = roc_auc(subset, sweep.best_length_ms, rho, config.e_max).auc;
      per_class.push_back(c);
    }
    entry["per_class"] = per_class;

    if (kfold > 0) {
      const KfoldResult kf = kfold_tune(utts, kfold, config.medfilt_sweep_ms, rho, config.e_max);
      json folds = json::array();
      for (const auto& f : kf.folds) {
        folds.push_back({{"fold", f.fold},
                         {"medfilt_ms", f.tuned_medfilt_ms},
                         {"threshold", f.tuned_threshold},
                         {"auc", f.test_auc},
                         {"f1", f.test_f1}});
      }
      entry["kfold"] = {{"k", kfold},
                        {"folds", folds},
                        {"mean_auc", kf.mean_auc},
                        {"mean_f1", kf.mean_f1}};
    }
    results.push_back(entry);
  }
  report["results"] = results;

  write_json_atomic(report, out_dir / "report.json");
  write_text_atomic(csv.str(), out_dir / "summary.csv");

  for (const auto& entry : results) {
    std::cout << "rho_dtc=" << entry["rho_dtc"] << " best medfilt " << entry["best_medfilt_ms"]
              << " ms, AUC " << entry["best_auc"] << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval-coupling
// ---------------------------------------------------------------------------

int cmd_eval_coupling(const fs::path& before_dir, const fs::path& after_dir,
                      const fs::path& gt_path, RunConfig config, const fs::path& out_dir) {
  config.validate();
  write_run_config(config, out_dir);

  const auto gt = group_ground_truth(read_ground_truth(gt_path));
  if (gt.ids.empty()) throw Error("ground truth file has no events");

  std::vector<std::string> missing;
  for (const auto& id : gt.ids) {
    if (find_score_file(before_dir, id).empty()) missing.push_back(id + " (before)");
    if (find_score_file(after_dir, id).empty()) missing.push_back(id + " (after)");
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "missing score files:";
    for (const auto& m : missing) os << ' ' << m;
    throw Error(os.str());
  }

  json utterances = json::array();
  std::ostringstream csv;
  csv << "utterance_id,lpcc,rpcc,ldtw,rdtw\n";
  double sum_lpcc = 0, sum_rpcc = 0, sum_ldtw = 0, sum_rdtw = 0;
  std::size_t n_lpcc = 0, n_rpcc = 0, n_ldtw = 0, n_rdtw = 0;
  std::size_t missing_left = 0, missing_right = 0;

  for (const auto& id : gt.ids) {
    FrameScoreSequence before = read_score_file(find_score_file(before_dir, id), config.frame_rate);
    FrameScoreSequence after = read_score_file(find_score_file(after_dir, id), config.frame_rate);
    const CouplingReport rep =
        coupling_analysis(before, after, gt.events.at(id), config.collar);

    json u;
    u["utterance_id"] = id;
    u["lpcc"] = optional_json(rep.lpcc);
    u["rpcc"] = optional_json(rep.rpcc);
    u["ldtw"] = optional_json(rep.ldtw);
    u["rdtw"] = optional_json(rep.rdtw);
    utterances.push_back(u);

    auto cell = [](const std::optional<double>& v) {
      return v ? format_double(*v) : std::string();
    };
    csv << id << ',' << cell(rep.lpcc) << ',' << cell(rep.rpcc) << ',' << cell(rep.ldtw) << ','
        << cell(rep.rdtw) << '\n';

    if (rep.lpcc) { sum_lpcc += *rep.lpcc; ++n_lpcc; }
    if (rep.rpcc) { sum_rpcc += *rep.rpcc; ++n_rpcc; }
    if (rep.ldtw) { sum_ldtw += *rep.ldtw; ++n_ldtw; } else { ++missing_left; }
    if (rep.rdtw) { sum_rdtw += *rep.rdtw; ++n_rdtw; } else { ++missing_right; }
  }

  json report;
  report["tool_version"] = kToolVersion;
  report["collar"] = config.collar;
  report["n_utterances"] = gt.ids.size();
  report["utterances"] = utterances;
  report["mean"] = {
      {"lpcc", n_lpcc > 0 ? json(sum_lpcc / n_lpcc) : json(nullptr)},
      {"rpcc", n_rpcc > 0 ? json(sum_rpcc / n_rpcc) : json(nullptr)},
      {"ldtw", n_ldtw > 0 ? json(sum_ldtw / n_ldtw) : json(nullptr)},
      {"rdtw", n_rdtw > 0 ? json(sum_rdtw / n_rdtw) : json(nullptr)},
  };
  report["missing"] = {{"left", missing_left}, {"right", missing_right}};

  write_json_atomic(report, out_dir / "coupling.json");
  write_text_atomic(csv.str(), out_dir / "coupling.csv");
  std::cout << "coupling over " << gt.ids.size() << " utterances written\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval-corr
// ---------------------------------------------------------------------------

int cmd_eval_corr(const fs::path& ratings_path, RunConfig config, const fs::path& out_dir) {
  config.validate();
  write_run_config(config, out_dir);

  std::ifstream in(ratings_path);
  if (!in) throw Error("cannot open ratings CSV: " + ratings_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty ratings CSV");
  std::vector<RatedUtterance> rated;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 4) {
      throw Error(ratings_path.string() + " line " + std::to_string(line_no) +
                  ": expected utterance_id,system_id,true_mos,predicted_mos");
    }
    RatedUtterance r;
    r.utterance_id = fields[0];
    r.system_id = fields[1];
    try {
      r.true_mos = std::stod(fields[2]);
      r.predicted_mos = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw Error(ratings_path.string() + " line " + std::to_string(line_no) +
                  ": cannot parse MOS value");
    }
    rated.push_back(std::move(r));
  }
  if (rated.empty()) throw Error("ratings CSV has no rows");

  auto metrics_json = [](const CorrMetrics& m) {
    return json{{"mse", optional_json(m.mse)},
                {"lcc", optional_json(m.lcc)},
                {"srcc", optional_json(m.srcc)},
                {"count", m.count}};
  };

  json report;
  report["tool_version"] = kToolVersion;
  report["utterance_level"] = metrics_json(utterance_level(rated));

  std::set<std::string> systems;
  for (const auto& r : rated) systems.insert(r.system_id);
  report["n_systems"] = systems.size();
  if (systems.size() >= 2) {
    report["system_level"] = metrics_json(system_level(rated));
  } else {
    report["system_level"] = nullptr;
  }

  write_json_atomic(report, out_dir / "corr.json");
  std::cout << "utterance-level: " << report["utterance_level"] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-level speech quality toolkit"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_path;
  std::string out_flag;
  std::vector<std::string> class_names;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration (flags override it)");
    cmd->add_option("--out", out_flag, "output directory (default: $FRAMESCORE_OUT)");
    cmd->add_option("--seed", config.global_seed, "global seed");
    cmd->add_option("--jobs", config.jobs, "worker threads (0 = hardware default)");
    cmd->add_option("--frame-rate", config.frame_rate, "score frame rate in frames/second");
  };

  // distort
  std::string manifest_path, phone_map_path;
  bool float_output = false;
  auto* distort = app.add_subcommand("distort", "inject annotated artificial distortions");
  add_common(distort);
  distort->add_option("--manifest", manifest_path, "corpus manifest TSV")->required();
  distort->add_option("--n-areas", config.n_areas, "distortion areas per utterance");
  distort->add_option("--duration-min", config.duration_min, "minimum area duration (s)");
  distort->add_option("--duration-max", config.duration_max, "maximum area duration (s)");
  distort->add_option("--classes", class_names,
                      "allowed distortion classes (comma separated)")
      ->delimiter(',');
  distort->add_option("--phone-map", phone_map_path, "phone label to class mapping TSV");
  distort->add_flag("--float-wav", float_output, "write 32-bit float WAVs");

  // score
  std::string scorer_name = "spectral-ref", reference_manifest;
  bool unchunked = false, binary_scores = false;
  double constant_raw = 0.0;
  auto* score = app.add_subcommand("score", "compute frame-level scores");
  add_common(score);
  score->add_option("--manifest", manifest_path, "corpus manifest TSV")->required();
  score->add_option("--scorer", scorer_name, "file | spectral-ref | constant")
      ->check(CLI::IsMember({"file", "spectral-ref", "constant"}));
  score->add_option("--reference-manifest", reference_manifest,
                    "clean reference manifest for spectral-ref (default: the manifest itself)");
  score->add_flag("--unchunked", unchunked, "score the whole utterance as one block");
  score->add_option("--block-lengths", config.block_seconds,
                    "chunk block lengths in seconds (comma separated)")
      ->delimiter(',');
  score->add_option("--shift-fraction", config.shift_fraction, "block shift as fraction of block");
  score->add_option("--weights", config.weight_logits,
                    "fusion weight logits, softmax-normalized (comma separated)")
      ->delimiter(',');
  score->add_option("--gamma", config.gamma, "range clipping scale");
  score->add_option("--beta", config.beta, "range clipping shift");
  bool no_clip = false;
  score->add_flag("--no-clip", no_clip, "emit raw scores without range clipping");
  score->add_option("--constant-raw", constant_raw, "raw value for the constant scorer");
  score->add_flag("--binary-scores", binary_scores, "write .f32 score files with JSON sidecars");
  score->add_option("--target-dbfs", config.target_dbfs, "loudness normalization target");

  // eval-detect
  std::string gt_path, scores_dir, annotations_path, ratings_path;
  int kfold = 0;
  auto* eval_detect = app.add_subcommand("eval-detect", "distortion localization metrics");
  add_common(eval_detect);
  eval_detect->add_option("--ground-truth", gt_path, "ground truth TSV")->required();
  eval_detect->add_option("--scores-dir", scores_dir, "directory with per-utterance score files");
  eval_detect->add_option("--annotations", annotations_path,
                          "per-frame annotator mark counts TSV (instead of --scores-dir)");
  eval_detect->add_option("--ratings-file", ratings_path,
                          "per-utterance ratings count TSV (with --annotations)");
  eval_detect->add_option("--rho-dtc", config.rho_dtc, "intersection criteria (comma separated)")
      ->delimiter(',');
  eval_detect->add_option("--medfilt-sweep", config.medfilt_sweep_ms,
                          "median filter lengths in ms (comma separated)")
      ->delimiter(',');
  eval_detect->add_option("--e-max", config.e_max, "false-alarms-per-hour cap for the AUC");
  eval_detect->add_option("--kfold", kfold, "run k-fold cross-validated tuning");

  // eval-coupling
  std::string before_dir, after_dir;
  auto* eval_coupling = app.add_subcommand("eval-coupling", "local-global coupling diagnostics");
  add_common(eval_coupling);
  eval_coupling->add_option("--before", before_dir, "score dir for the clean audio")->required();
  eval_coupling->add_option("--after", after_dir, "score dir for the distorted audio")->required();
  eval_coupling->add_option("--ground-truth", gt_path, "ground truth TSV")->required();
  eval_coupling->add_option("--collar", config.collar, "guard interval around events (s)");

  // eval-corr
  std::string ratings_csv;
  auto* eval_corr = app.add_subcommand("eval-corr", "MOS correlation metrics");
  add_common(eval_corr);
  eval_corr->add_option("--ratings", ratings_csv, "ratings CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    // A config file forms the base; explicitly passed flags already
    // overwrote the in-memory defaults, so merge field by field.
    if (!config_path.empty()) {
      std::ifstream cf(config_path);
      if (!cf) throw Error("cannot open config file: " + config_path);
      RunConfig base = RunConfig::from_json(json::parse(cf));
      CLI::App* active = app.get_subcommands().front();
      auto keep = [&](const std::string& flag) { return active->count(flag) > 0; };
      if (!keep("--seed")) config.global_seed = base.global_seed;
      if (!keep("--jobs")) config.jobs = base.jobs;
      if (!keep("--frame-rate")) config.frame_rate = base.frame_rate;
      if (!keep("--n-areas")) config.n_areas = base.n_areas;
      if (!keep("--duration-min")) config.duration_min = base.duration_min;
      if (!keep("--duration-max")) config.duration_max = base.duration_max;
      if (class_names.empty()) config.classes = base.classes;
      if (!keep("--block-lengths")) config.block_seconds = base.block_seconds;
      if (!keep("--shift-fraction")) config.shift_fraction = base.shift_fraction;
      if (!keep("--weights")) config.weight_logits = base.weight_logits;
      if (!keep("--gamma")) config.gamma = base.gamma;
      if (!keep("--beta")) config.beta = base.beta;
      if (!keep("--target-dbfs")) config.target_dbfs = base.target_dbfs;
      if (!keep("--rho-dtc")) config.rho_dtc = base.rho_dtc;
      if (!keep("--medfilt-sweep")) config.medfilt_sweep_ms = base.medfilt_sweep_ms;
      if (!keep("--e-max")) config.e_max = base.e_max;
      if (!keep("--collar")) config.collar = base.collar;
      config.clip = base.clip;
    }
    if (no_clip) config.clip = false;
    if (!class_names.empty()) {
      config.classes.clear();
      for (const auto& name : class_names) {
        const auto kind = distortion_kind_from_string(name);
        if (!kind) throw Error("unknown distortion class: " + name);
        config.classes.push_back(*kind);
      }
    }

    const fs::path out_dir = resolve_out_dir(out_flag);
    if (app.got_subcommand("distort")) {
      return cmd_distort(manifest_path, config, out_dir, phone_map_path, float_output);
    }
    if (app.got_subcommand("score")) {
      return cmd_score(manifest_path, config, out_dir, scorer_name, reference_manifest, unchunked,
                       constant_raw, binary_scores);
    }
    if (app.got_subcommand("eval-detect")) {
      if (scores_dir.empty() && annotations_path.empty()) {
        throw Error("eval-detect needs --scores-dir or --annotations");
      }
      if (!annotations_path.empty() && ratings_path.empty()) {
        throw Error("--annotations needs --ratings-file");
      }
      return cmd_eval_detect(gt_path, scores_dir, config, out_dir, kfold, annotations_path,
                             ratings_path);
    }
    if (app.got_subcommand("eval-coupling")) {
      return cmd_eval_coupling(before_dir, after_dir, gt_path, config, out_dir);
    }
    if (app.got_subcommand("eval-corr")) {
      return cmd_eval_corr(ratings_csv, config, out_dir);
    }
    throw Error("no subcommand");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}
