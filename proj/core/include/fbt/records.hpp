// Copyright 2026 The FBT Authors
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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbt/forward_model.hpp"
#include "fbt/types.hpp"

namespace fbt {

// One measurement setting: a gate sequence repeated for a number of shots.
struct ExperimentRecord {
  Sequence sequence;
  int64_t shots = 0;
  std::vector<int64_t> counts;
  // Debug only; never serialised by default.
  std::optional<Vector> true_probs;
  // Number of Cliffords for records that came from an RB sequence, else 0.
  int clifford_length = 0;

  Vector frequencies() const;
  // Throws DataError unless counts are non-negative and sum to shots >= 1.
  void validate(int num_outcomes = -1) const;
};

// Metadata line written at the top of every dataset file.
struct DatasetHeader {
  std::string type = "fbt-dataset";  // "rb" for benchmarking datasets
  std::string version;
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<int> clifford_lengths;  // rb only
};

// Canonical JSON-lines encoding: {"seq":[...],"shots":N,"counts":[...]}.
std::string record_to_json_line(const ExperimentRecord& record);
// Throws DataError on malformed input.
ExperimentRecord record_from_json_line(const std::string& line);

std::string header_to_json_line(const DatasetHeader& header);

struct Dataset {
  std::optional<DatasetHeader> header;
  std::vector<ExperimentRecord> records;
};

// Writes an optional header followed by one record per line.
void write_dataset(std::ostream& out, const Dataset& dataset);
// Reads a dataset. The first line is treated as a header when it carries a
// "type" key. Errors name the 1-based line number.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);
void write_dataset_file(const std::string& path, const Dataset& dataset);

// 64-bit FNV-1a, hex encoded. Used for config hashes in file headers.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace fbt
