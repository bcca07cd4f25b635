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

#include "framescore/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace framescore {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
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
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Manifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open manifest: ", path.string());

  Manifest manifest;
  manifest.directory = std::filesystem::absolute(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) fail(path.string(), ": empty manifest (header required)");
  const auto header = split_tabs(line);
  const std::vector<std::string> expected{"utterance_id", "wav_path",  "alignment_path",
                                          "score_path",   "system_id", "true_mos"};
  if (header.size() < 2 || header[0] != "utterance_id" || header[1] != "wav_path") {
    fail(path.string(), " line 1: manifest header must start with 'utterance_id\\twav_path'");
  }
  for (std::size_t i = 0; i < header.size() && i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      fail(path.string(), " line 1: unexpected manifest column '", header[i], "'");
    }
  }

  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    fields.resize(expected.size());
    ManifestRow row;
    row.utterance_id = fields[0];
    if (row.utterance_id.empty()) fail(path.string(), " line ", line_no, ": empty utterance_id");
    if (!seen.insert(row.utterance_id).second) {
      fail(path.string(), " line ", line_no, ": duplicate utterance_id '", row.utterance_id, "'");
    }
    row.wav_path = resolve(manifest.directory, fields[1]);
    if (row.wav_path.empty()) fail(path.string(), " line ", line_no, ": empty wav_path");
    row.alignment_path = resolve(manifest.directory, fields[2]);
    row.score_path = resolve(manifest.directory, fields[3]);
    row.system_id = fields[4];
    if (!fields[5].empty()) {
      try {
        row.true_mos = std::stod(fields[5]);
      } catch (const std::exception&) {
        fail(path.string(), " line ", line_no, ": cannot parse true_mos '", fields[5], "'");
      }
    }
    manifest.rows.push_back(std::move(row));
  }
  std::sort(manifest.rows.begin(), manifest.rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) {
              return a.utterance_id < b.utterance_id;
            });
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "utterance_id\twav_path\talignment_path\tscore_path\tsystem_id\ttrue_mos\n";
  out.precision(17);
  for (const auto& row : manifest.rows) {
    out << row.utterance_id << '\t' << row.wav_path.string() << '\t'
        << row.alignment_path.string() << '\t' << row.score_path.string() << '\t'
        << row.system_id << '\t';
    if (row.true_mos) out << *row.true_mos;
    out << '\n';
  }
  write_text_atomic(out.str(), path);
}

void RunConfig::validate() const {
  if (n_areas < 1) fail("config: n_areas must be >= 1");
  if (!(duration_min > 0.0) || duration_max < duration_min) {
    fail("config: invalid distortion duration range");
  }
  if (classes.empty()) fail("config: empty distortion class set");
  if (block_seconds.empty()) fail("config: no block lengths");
  if (!(shift_fraction > 0.0) || shift_fraction > 1.0) {
    fail("config: shift fraction must be in (0, 1]");
  }
  if (!weight_logits.empty() && weight_logits.size() != block_seconds.size()) {
    fail("config: ", weight_logits.size(), " weight logits for ", block_seconds.size(),
         " block lengths");
  }
  if (frame_rate <= 0.0 || frame_rate != std::floor(frame_rate)) {
    fail("config: frame_rate must be a positive integer");
  }
  if (medfilt_sweep_ms.empty()) fail("config: empty median filter sweep");
  for (double ms : medfilt_sweep_ms) {
    if (ms < 0.0) fail("config: negative median filter length");
  }
  for (double rho : rho_dtc) {
    if (rho < 0.0 || rho > 1.0) fail("config: rho_dtc must be in [0, 1]");
  }
  if (rho_dtc.empty()) fail("config: empty rho_dtc list");
  if (e_max <= 0.0) fail("config: e_max must be positive");
  if (collar < 0.0) fail("config: negative collar");
  if (jobs < 0) fail("config: negative job count");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["global_seed"] = global_seed;
  j["n_areas"] = n_areas;
  j["duration_min"] = duration_min;
  j["duration_max"] = duration_max;
  std::vector<std::string> class_names;
  for (auto kind : classes) class_names.emplace_back(to_string(kind));
  j["classes"] = class_names;
  j["block_seconds"] = block_seconds;
  j["shift_fraction"] = shift_fraction;
  j["weight_logits"] = weight_logits;
  j["gamma"] = gamma;
  j["beta"] = beta;
  j["clip"] = clip;
  j["frame_rate"] = frame_rate;
  j["target_dbfs"] = target_dbfs;
  j["medfilt_sweep_ms"] = medfilt_sweep_ms;
  j["rho_dtc"] = rho_dtc;
  j["e_max"] = e_max;
  j["collar"] = collar;
  j["jobs"] = jobs;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.global_seed = j.value("global_seed", c.global_seed);
  c.n_areas = j.value("n_areas", c.n_areas);
  c.duration_min = j.value("duration_min", c.duration_min);
  c.duration_max = j.value("duration_max", c.duration_max);
  if (j.contains("classes")) {
    c.classes.clear();
    for (const auto& name : j.at("classes")) {
      const auto kind = distortion_kind_from_string(name.get<std::string>());
      if (!kind) fail("config: unknown distortion class '", name.get<std::string>(), "'");
      c.classes.push_back(*kind);
    }
  }
  c.block_seconds = j.value("block_seconds", c.block_seconds);
  c.shift_fraction = j.value("shift_fraction", c.shift_fraction);
  c.weight_logits = j.value("weight_logits", c.weight_logits);
  c.gamma = j.value("gamma", c.gamma);
  c.beta = j.value("beta", c.beta);
  c.clip = j.value("clip", c.clip);
  c.frame_rate = j.value("frame_rate", c.frame_rate);
  c.target_dbfs = j.value("target_dbfs", c.target_dbfs);
  c.medfilt_sweep_ms = j.value("medfilt_sweep_ms", c.medfilt_sweep_ms);
  c.rho_dtc = j.value("rho_dtc", c.rho_dtc);
  c.e_max = j.value("e_max", c.e_max);
  c.collar = j.value("collar", c.collar);
  c.jobs = j.value("jobs", c.jobs);
  c.validate();
  return c;
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write ", tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail("short write to ", tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const nlohmann::json& j, const std::filesystem::path& path) {
  write_text_atomic(j.dump(2) + "\n", path);
}

}  // namespace framescore
