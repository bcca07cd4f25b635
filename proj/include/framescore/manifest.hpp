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

#ifndef FRAMESCORE_MANIFEST_HPP
#define FRAMESCORE_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framescore/distortion.hpp"

namespace framescore {

/// One corpus row. Relative paths are resolved against the manifest's
/// directory at parse time.
struct ManifestRow {
  std::string utterance_id;
  std::filesystem::path wav_path;
  std::filesystem::path alignment_path;  // may be empty
  std::filesystem::path score_path;      // may be empty
  std::string system_id;                 // may be empty
  std::optional<double> true_mos;
};

struct Manifest {
  std::filesystem::path directory;
  std::vector<ManifestRow> rows;  // sorted by utterance_id, ids unique
};

/// TSV with header
/// `utterance_id\twav_path\talignment_path\tscore_path\tsystem_id\ttrue_mos`;
/// the trailing four columns may be empty.
Manifest parse_manifest(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Everything a run needs, serialized next to every output for provenance.
struct RunConfig {
  std::uint64_t global_seed = 0;

  // distortion
  int n_areas = 3;
  double duration_min = 0.4;
  double duration_max = 0.7;
  std::vector<DistortionKind> classes{kAllDistortionKinds,
                                      kAllDistortionKinds + std::size(kAllDistortionKinds)};

  // chunked scoring
  std::vector<double> block_seconds{1.0, 0.6, 0.4};
  double shift_fraction = 0.5;
  std::vector<double> weight_logits;
  double gamma = 2.0;
  double beta = 3.0;
  bool clip = true;
  double frame_rate = 50.0;
  double target_dbfs = -18.0;

  // detection evaluation
  std::vector<double> medfilt_sweep_ms{0, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500};
  std::vector<double> rho_dtc{0.5, 0.7};
  double e_max = 100.0;
  double collar = 0.2;

  int jobs = 0;  // 0 = library default

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Writes `{path}.tmp` then renames, so readers never observe partial files.
void write_text_atomic(const std::string& text, const std::filesystem::path& path);
void write_json_atomic(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace framescore

#endif  // FRAMESCORE_MANIFEST_HPP
