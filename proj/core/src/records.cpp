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
#include "fbt/records.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "fbt/error.hpp"
#include "json.hpp"

namespace fbt {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

Vector ExperimentRecord::frequencies() const {
  Vector f(static_cast<Eigen::Index>(counts.size()));
  for (size_t i = 0; i < counts.size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]) / static_cast<double>(shots);
  }
  return f;
}

void ExperimentRecord::validate(int num_outcomes) const {
  if (shots < 1) throw DataError("shots must be >= 1");
  if (num_outcomes >= 0 && static_cast<int>(counts.size()) != num_outcomes) {
    throw DataError("expected " + std::to_string(num_outcomes) + " counts, got " +
                    std::to_string(counts.size()));
  }
  int64_t total = 0;
  for (int64_t c : counts) {
    if (c < 0) throw DataError("negative count");
    total += c;
  }
  if (total != shots) {
    throw DataError("counts sum to " + std::to_string(total) + " but shots is " +
                    std::to_string(shots));
  }
}

std::string record_to_json_line(const ExperimentRecord& record) {
  ojson j;
  j["seq"] = record.sequence.gates;
  j["shots"] = record.shots;
  j["counts"] = record.counts;
  if (record.clifford_length > 0) j["clifford_length"] = record.clifford_length;
  return j.dump();
}

namespace {

ExperimentRecord record_from_json(const json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  for (const char* key : {"seq", "shots", "counts"}) {
    if (!j.contains(key)) throw DataError(std::string("missing key '") + key + "'");
  }
  ExperimentRecord rec;
  try {
    rec.sequence.gates = j.at("seq").get<std::vector<int>>();
    rec.shots = j.at("shots").get<int64_t>();
    rec.counts = j.at("counts").get<std::vector<int64_t>>();
    if (j.contains("clifford_length")) rec.clifford_length = j.at("clifford_length").get<int>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad field type: ") + e.what());
  }
  rec.validate();
  return rec;
}

DatasetHeader header_from_json(const json& j) {
  DatasetHeader h;
  try {
    h.type = j.at("type").get<std::string>();
    if (j.contains("version")) h.version = j.at("version").get<std::string>();
    if (j.contains("seed")) h.seed = j.at("seed").get<uint64_t>();
    if (j.contains("config_hash")) h.config_hash = j.at("config_hash").get<std::string>();
    if (j.contains("clifford_lengths"))
      h.clifford_lengths = j.at("clifford_lengths").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad header: ") + e.what());
  }
  return h;
}

}  // namespace

ExperimentRecord record_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  return record_from_json(j);
}

std::string header_to_json_line(const DatasetHeader& header) {
  ojson j;
  j["type"] = header.type;
  j["version"] = header.version;
  j["seed"] = header.seed;
  j["config_hash"] = header.config_hash;
  if (!header.clifford_lengths.empty()) j["clifford_lengths"] = header.clifford_lengths;
  return j.dump();
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  if (dataset.header) out << header_to_json_line(*dataset.header) << '\n';
  for (const ExperimentRecord& r : dataset.records) out << record_to_json_line(r) << '\n';
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
      }
      if (j.is_object() && j.contains("type")) {
        if (ds.header || !ds.records.empty()) throw DataError("unexpected header line");
        ds.header = header_from_json(j);
      } else {
        ds.records.push_back(record_from_json(j));
      }
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_dataset(in);
}

void write_dataset_file(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_dataset(out, dataset);
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fbt
