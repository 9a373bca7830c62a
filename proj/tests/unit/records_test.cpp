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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fbt/config.hpp"
#include "fbt/error.hpp"
#include "fbt/records.hpp"

namespace fbt {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fbt_records_" + name)).string();
}

ExperimentRecord make_record(std::vector<int> seq, std::vector<int64_t> counts) {
  ExperimentRecord r;
  r.sequence = Sequence{std::move(seq)};
  r.counts = std::move(counts);
  for (auto c : r.counts) r.shots += c;
  return r;
}

TEST(Records, JsonRoundTrip) {
  const ExperimentRecord r = make_record({0, 3, 5}, {60, 40, 20, 5});
  const std::string line = record_to_json_line(r);
  EXPECT_EQ(line, R"({"seq":[0,3,5],"shots":125,"counts":[60,40,20,5]})");
  const ExperimentRecord back = record_from_json_line(line);
  EXPECT_EQ(back.sequence, r.sequence);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_EQ(back.shots, 125);
  EXPECT_NEAR(back.frequencies()(0), 0.48, 1e-15);
}

TEST(Records, EmptySequenceAndCliffordLength) {
  ExperimentRecord r = make_record({}, {10, 0});
  r.clifford_length = 4;
  const ExperimentRecord back = record_from_json_line(record_to_json_line(r));
  EXPECT_TRUE(back.sequence.gates.empty());
  EXPECT_EQ(back.clifford_length, 4);
}

TEST(Records, ValidateRejectsBadCounts) {
  EXPECT_THROW(make_record({0}, {5, -1, 1}).validate(), DataError);
  ExperimentRecord r = make_record({0}, {3, 2});
  r.shots = 6;
  EXPECT_THROW(r.validate(), DataError);
  EXPECT_THROW(make_record({0}, {3, 2}).validate(4), DataError);
  EXPECT_THROW(make_record({0}, {0, 0}).validate(), DataError);
  EXPECT_NO_THROW(make_record({0}, {3, 2}).validate(2));
}

TEST(Records, MalformedLinesThrow) {
  EXPECT_THROW(record_from_json_line("{\"seq\":[0],\"shots\":3"), DataError);
  EXPECT_THROW(record_from_json_line(R"({"seq":[0],"counts":[3]})"), DataError);
  EXPECT_THROW(record_from_json_line(R"({"seq":"x","shots":3,"counts":[3]})"), DataError);
  EXPECT_THROW(record_from_json_line("[1,2]"), DataError);
}

TEST(Records, DatasetWithHeaderRoundTrips) {
  Dataset ds;
  DatasetHeader h;
  h.type = "rb";
  h.version = kVersion;
  h.seed = 42;
  h.config_hash = fnv1a_hex("cfg");
  h.clifford_lengths = {1, 2, 4};
  ds.header = h;
  ds.records = {make_record({1}, {1, 2, 3, 4}), make_record({}, {10, 0, 0, 0})};
  std::stringstream ss;
  write_dataset(ss, ds);
  const Dataset back = read_dataset(ss);
  ASSERT_TRUE(back.header.has_value());
  EXPECT_EQ(back.header->type, "rb");
  EXPECT_EQ(back.header->seed, 42u);
  EXPECT_EQ(back.header->config_hash, h.config_hash);
  EXPECT_EQ(back.header->clifford_lengths, h.clifford_lengths);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[0].counts, ds.records[0].counts);

  const std::string path = temp_path("ds.jsonl");
  write_dataset_file(path, ds);
  EXPECT_EQ(read_dataset_file(path).records.size(), 2u);
  std::remove(path.c_str());
}

TEST(Records, ErrorsNameTheLine) {
  std::stringstream ss(
      "{\"seq\":[0],\"shots\":2,\"counts\":[1,1]}\n"
      "\n"
      "{\"seq\":[1],\"shots\":2,\"counts\":[1,");  // truncated last line
  try {
    read_dataset(ss);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream late(
      "{\"seq\":[0],\"shots\":2,\"counts\":[1,1]}\n"
      "{\"type\":\"fbt-dataset\"}\n");
  EXPECT_THROW(read_dataset(late), DataError);
  EXPECT_THROW(read_dataset_file(temp_path("does_not_exist")), DataError);
}

TEST(Records, Fnv1aVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Config, SyntaxErrorsNameLineAndColumn) {
  try {
    simulate_config_from_json("{\n  \"gateset\": {\"builtin\": \"single_qubit_xy\"},\n  oops\n}");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  }
}

TEST(Config, SimulateExampleParses) {
  const SimulateConfig c =
      simulate_config_from_json(read_text_file(FBT_EXAMPLES_DIR "/simulate_single_qubit.json"));
  EXPECT_EQ(c.gateset.n_qubits, 1);
  EXPECT_EQ(c.n_settings, 300);
  EXPECT_EQ(c.max_length, 2);
  EXPECT_EQ(c.shots, 1000);
  EXPECT_EQ(c.seed, 7u);
  const GateSet truth = apply_truth(c.gateset, c.truth);
  EXPECT_NEAR(truth.gates[0].noise(1, 1), 0.99, 1e-12);
  EXPECT_NEAR(truth.gates[1].noise(1, 1), std::cos(0.03), 1e-12);
}

TEST(Config, RejectsBadValues) {
  const std::string gs = R"("gateset": {"builtin": "native_two_qubit"})";
  EXPECT_THROW(rb_config_from_json("{" + gs + R"(, "lengths": [1, 2]})"), ConfigError);
  EXPECT_THROW(rb_config_from_json("{" + gs + R"(, "lengths": [0, 2, 4]})"), ConfigError);
  EXPECT_NO_THROW(rb_config_from_json("{" + gs + R"(, "lengths": [1, 2, 4]})"));
  EXPECT_THROW(simulate_config_from_json("{" + gs + R"(, "shots": 0})"), ConfigError);
  EXPECT_THROW(simulate_config_from_json(R"({"n_settings": 3})"), ConfigError);
  EXPECT_THROW(gateset_from_json(R"({"builtin": "qutrit"})"), ConfigError);
  EXPECT_THROW(noise_spec_from_json(R"({"kind": "bitflip"})"), ConfigError);
  EXPECT_THROW(read_text_file(temp_path("missing.json")), ConfigError);
}

TEST(Config, UnknownTruthGateThrows) {
  const TruthSpec t = truth_spec_from_json(R"({"gates": {"CZ": {"kind": "identity"}}})");
  EXPECT_THROW(apply_truth(native_two_qubit_gate_set(), t), ConfigError);
}

TEST(Config, DefaultNoiseAppliesToUnlistedGates) {
  const TruthSpec t = truth_spec_from_json(
      R"({"default": {"kind": "depolarizing", "p": 0.1}, "gates": {"Z1": {"kind": "identity"}}})");
  const GateSet g = apply_truth(native_two_qubit_gate_set(), t);
  EXPECT_NEAR(g.gates[0].noise(5, 5), 0.9, 1e-12);
  EXPECT_NEAR(g.gates[2].noise(5, 5), 1.0, 1e-12);
}

TEST(Config, PtmJsonRoundTrip) {
  NoiseSpec s;
  s.kind = NoiseKind::kAmplitudeDamping;
  s.gamma = 0.2;
  const Ptm p = make_noise_model(s, 1);
  const Ptm back = ptm_from_json(ptm_to_json(p));
  EXPECT_LT(frobenius_distance(p, back), 1e-15);
  EXPECT_THROW(ptm_from_json(R"({"n_qubits": 1, "entries": [1, 0, 0]})"), ConfigError);
}

TEST(Config, FitExampleParses) {
  const FitConfig c = fit_config_from_json(read_text_file(FBT_EXAMPLES_DIR "/fit_native.json"));
  EXPECT_EQ(c.gateset.num_gates(), 6);
  EXPECT_EQ(c.engine.sampling.n_samples, 100);
  EXPECT_DOUBLE_EQ(c.prior.virtual_sigma, 0.005);
  EXPECT_FALSE(c.rb_prior.has_value());
  EXPECT_EQ(c.seed, 2026u);
}

TEST(Config, BeliefFileRoundTrip) {
  const GateSet gs = single_qubit_xy_gate_set();
  const ParameterPacking pk = ParameterPacking::for_gateset(gs);
  Rng rng(3);
  Matrix f = Matrix::Random(pk.total(), 5);
  const GaussianBelief b(Vector::Random(pk.total()), f, pk);
  const std::string path = temp_path("belief.bin");
  save_belief(path, b);
  const GaussianBelief back = load_belief(path, pk);
  EXPECT_EQ(back.mean(), b.mean());
  EXPECT_LT((back.covariance() - b.covariance()).norm(), 1e-14);

  const ParameterPacking other = ParameterPacking::for_gateset(native_two_qubit_gate_set());
  EXPECT_THROW(load_belief(path, other), DataError);
  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(load_belief(path, pk), DataError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace fbt
