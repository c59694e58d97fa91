// Copyright 2026 The stellarsim Authors
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

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/gadget.hpp"
#include "stellar/gaussian.hpp"
#include "stellar/qsample.hpp"
#include "stellar/sampler.hpp"

namespace stellar::io {

using Json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double value) { return format_number(value); }

inline double parse_double(std::string_view text, const std::string& field) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw Error(ErrorCode::ParseError, "field '" + field + "': '" + std::string(text) + "' is not a number");
  }
  return value;
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + path + "': " + what);
}

/// Parses JSON text; syntax errors report line and column.
inline Json parse_text(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                                           ": malformed JSON");
  }
}

inline const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline double real_from(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline long integer_from(const Json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  return j.get<long>();
}

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// A number or a [re, im] pair.
inline Complex complex_from(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(path, "expected a number or [re, im]");
}

inline Json to_json(const CoreState& state) {
  Json terms = Json::array();
  for (const auto& [index, amplitude] : state.terms()) {
    terms.push_back({{"n", index.occupations}, {"re", amplitude.real()}, {"im", amplitude.imag()}});
  }
  return {{"modes", state.modes()}, {"terms", terms}};
}

inline CoreState core_state_from(const Json& j, const std::string& path = "") {
  const long modes = integer_from(require(j, "modes", path), child(path, "modes"));
  if (modes <= 0) fail(child(path, "modes"), "must be positive");
  const Json& terms = require(j, "terms", path);
  if (!terms.is_array()) fail(child(path, "terms"), "expected an array");
  CoreState::Terms out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = item(child(path, "terms"), i);
    const Json& n = require(terms[i], "n", p);
    if (!n.is_array()) fail(child(p, "n"), "expected an array of occupations");
    std::vector<int> occ;
    for (std::size_t k = 0; k < n.size(); ++k) occ.push_back(static_cast<int>(integer_from(n[k], item(child(p, "n"), k))));
    if (occ.size() != static_cast<std::size_t>(modes)) fail(child(p, "n"), "length differs from modes");
    const double re = real_from(require(terms[i], "re", p), child(p, "re"));
    const double im = terms[i].contains("im") ? real_from(terms[i]["im"], child(p, "im")) : 0.0;
    out[FockIndex(std::move(occ))] += Complex(re, im);
  }
  try {
    return CoreState(static_cast<std::size_t>(modes), std::move(out));
  } catch (const Error& e) {
    fail(path.empty() ? "state" : path, e.what());
  }
}

inline Json to_json(const GaussianGate& gate) {
  Json j = {{"kind", gate.kind()}, {"modes", gate.modes}};
  if (const auto* p = std::get_if<Displacement>(&gate.params)) j["beta"] = to_json(p->beta);
  if (const auto* p = std::get_if<Squeeze>(&gate.params)) j["zeta"] = to_json(p->zeta);
  if (const auto* p = std::get_if<Phase>(&gate.params)) j["theta"] = p->theta;
  if (const auto* p = std::get_if<BeamSplitter>(&gate.params)) {
    j["theta"] = p->theta;
    j["phi"] = p->phi;
  }
  if (const auto* p = std::get_if<TwoModeSqueeze>(&gate.params)) j["xi"] = to_json(p->xi);
  return j;
}

inline Json to_json(const GaussianCircuit& circuit) {
  Json gates = Json::array();
  for (const auto& g : circuit.gates()) gates.push_back(to_json(g));
  return {{"modes", circuit.modes()}, {"gates", gates}};
}

inline GaussianGate gate_from(const Json& j, const std::string& path) {
  const Json& kind = require(j, "kind", path);
  if (!kind.is_string()) fail(child(path, "kind"), "expected a string");
  const Json& modes = require(j, "modes", path);
  if (!modes.is_array()) fail(child(path, "modes"), "expected an array");
  std::vector<std::size_t> targets;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const long v = integer_from(modes[k], item(child(path, "modes"), k));
    if (v < 0) fail(item(child(path, "modes"), k), "negative mode");
    targets.push_back(static_cast<std::size_t>(v));
  }
  const std::string name = kind.get<std::string>();
  GaussianGate gate;
  if (name == "disp") {
    gate.params = Displacement{complex_from(require(j, "beta", path), child(path, "beta"))};
  } else if (name == "sq") {
    gate.params = Squeeze{complex_from(require(j, "zeta", path), child(path, "zeta"))};
  } else if (name == "phase") {
    gate.params = Phase{real_from(require(j, "theta", path), child(path, "theta"))};
  } else if (name == "bs") {
    const double phi = j.contains("phi") ? real_from(j["phi"], child(path, "phi")) : 0.0;
    gate.params = BeamSplitter{real_from(require(j, "theta", path), child(path, "theta")), phi};
  } else if (name == "tms") {
    gate.params = TwoModeSqueeze{complex_from(require(j, "xi", path), child(path, "xi"))};
  } else {
    fail(child(path, "kind"), "unknown gate kind '" + name + "'");
  }
  gate.modes = std::move(targets);
  return gate;
}

inline GaussianCircuit circuit_from(const Json& j, const std::string& path = "") {
  const long modes = integer_from(require(j, "modes", path), child(path, "modes"));
  if (modes <= 0) fail(child(path, "modes"), "must be positive");
  const Json& gates = require(j, "gates", path);
  if (!gates.is_array()) fail(child(path, "gates"), "expected an array");
  GaussianCircuit circuit(static_cast<std::size_t>(modes));
  for (std::size_t i = 0; i < gates.size(); ++i) {
    try {
      circuit.add(gate_from(gates[i], item(child(path, "gates"), i)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      fail(item(child(path, "gates"), i), e.what());
    }
  }
  return circuit;
}

inline Json to_json(const ProjectorSpec& spec) {
  Json additions = Json::array();
  for (Complex b : spec.additions) additions.push_back(to_json(b));
  return {{"squeeze", to_json(spec.squeeze)}, {"coherent", to_json(spec.coherent)}, {"additions", additions}};
}

inline ProjectorSpec projector_from(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  ProjectorSpec spec;
  if (j.contains("squeeze")) spec.squeeze = complex_from(j["squeeze"], child(path, "squeeze"));
  if (j.contains("coherent")) spec.coherent = complex_from(j["coherent"], child(path, "coherent"));
  if (j.contains("additions")) {
    const Json& a = j["additions"];
    if (!a.is_array()) fail(child(path, "additions"), "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) spec.additions.push_back(complex_from(a[i], item(child(path, "additions"), i)));
  }
  return spec;
}

inline OutcomeSpec outcome_from(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of projector specs");
  OutcomeSpec out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(projector_from(j[i], item(path, i)));
  return out;
}

inline Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

/// Nested array of rows; entries are numbers or [re, im].
inline ComplexMatrix matrix_from(const Json& j, const std::string& path = "matrix") {
  if (!j.is_array()) fail(path, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) fail(item(path, r), "expected a row array");
    if (r == 0) cols = static_cast<Eigen::Index>(j[r].size());
    if (static_cast<Eigen::Index>(j[r].size()) != cols) fail(item(path, r), "ragged row");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = complex_from(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)],
                             item(item(path, static_cast<std::size_t>(r)), static_cast<std::size_t>(c)));
    }
  }
  return m;
}

struct Instance {
  CoreState state = CoreState::vacuum(1);
  std::optional<GaussianCircuit> circuit;
  OutcomeSpec outcome;
  double epsilon = 0.1;
  XiMode xi_mode = XiMode::Auto;
  double xi = 1e-3;
  int cutoff = 12;

  SystemInput input() const {
    return circuit ? SystemInput(state, *circuit) : SystemInput(state);
  }
};

inline Json to_json(const Instance& inst) {
  Json input = inst.circuit ? Json{{"state", to_json(inst.state)}, {"circuit", to_json(*inst.circuit)}} : to_json(inst.state);
  Json outcome = Json::array();
  for (const auto& s : inst.outcome) outcome.push_back(to_json(s));
  return {{"input", input},
          {"outcome", outcome},
          {"epsilon", inst.epsilon},
          {"xi_mode", inst.xi_mode == XiMode::Auto ? "auto" : "uniform"},
          {"xi", inst.xi},
          {"cutoff", inst.cutoff}};
}

/// Input is a CoreState object or {"state": CoreState, "circuit": Circuit}.
inline Instance instance_from(const Json& j) {
  if (!j.is_object()) fail("", "instance must be an object");
  Instance inst;
  const Json& input = require(j, "input", "");
  if (input.is_object() && input.contains("state")) {
    inst.state = core_state_from(input["state"], "input.state");
    if (input.contains("circuit")) inst.circuit = circuit_from(input["circuit"], "input.circuit");
  } else {
    inst.state = core_state_from(input, "input");
  }
  inst.outcome = outcome_from(require(j, "outcome", ""), "outcome");
  if (inst.outcome.size() != inst.state.modes()) fail("outcome", "needs one projector per input mode");
  if (inst.circuit && inst.circuit->modes() != inst.state.modes()) fail("input.circuit.modes", "differs from state modes");
  if (j.contains("epsilon")) inst.epsilon = real_from(j["epsilon"], "epsilon");
  if (j.contains("xi_mode")) {
    if (!j["xi_mode"].is_string()) fail("xi_mode", "expected \"auto\" or \"uniform\"");
    const auto mode = j["xi_mode"].get<std::string>();
    if (mode == "auto") inst.xi_mode = XiMode::Auto;
    else if (mode == "uniform") inst.xi_mode = XiMode::Uniform;
    else fail("xi_mode", "expected \"auto\" or \"uniform\"");
  }
  if (j.contains("xi")) inst.xi = real_from(j["xi"], "xi");
  if (j.contains("cutoff")) {
    const long c = integer_from(j["cutoff"], "cutoff");
    if (c < 1) fail("cutoff", "must be at least 1");
    inst.cutoff = static_cast<int>(c);
  }
  return inst;
}

struct ProbabilityReport {
  std::optional<double> p_exact;
  std::optional<double> p_estimate;
  double bound_epsilon = 0.0;
  std::vector<double> xi_used;
  std::optional<std::size_t> term_count;
  std::optional<std::size_t> max_matrix_dimension;
  std::optional<double> approximation_distance;
};

inline Json to_json(const ProbabilityReport& r) {
  Json j = Json::object();
  if (r.p_exact) j["p_exact"] = *r.p_exact;
  if (r.p_estimate) j["p_estimate"] = *r.p_estimate;
  j["bound_epsilon"] = r.bound_epsilon;
  j["xi_used"] = r.xi_used;
  if (r.term_count) j["term_count"] = *r.term_count;
  if (r.max_matrix_dimension) j["max_matrix_dimension"] = *r.max_matrix_dimension;
  if (r.approximation_distance) j["approximation_distance"] = *r.approximation_distance;
  return j;
}

inline ProbabilityReport report_from(const Json& j) {
  ProbabilityReport r;
  if (j.contains("p_exact")) r.p_exact = real_from(j["p_exact"], "p_exact");
  if (j.contains("p_estimate")) r.p_estimate = real_from(j["p_estimate"], "p_estimate");
  r.bound_epsilon = real_from(require(j, "bound_epsilon", ""), "bound_epsilon");
  const Json& xi = require(j, "xi_used", "");
  if (!xi.is_array()) fail("xi_used", "expected an array");
  for (std::size_t i = 0; i < xi.size(); ++i) r.xi_used.push_back(real_from(xi[i], item("xi_used", i)));
  if (j.contains("term_count")) r.term_count = static_cast<std::size_t>(integer_from(j["term_count"], "term_count"));
  if (j.contains("max_matrix_dimension")) {
    r.max_matrix_dimension = static_cast<std::size_t>(integer_from(j["max_matrix_dimension"], "max_matrix_dimension"));
  }
  if (j.contains("approximation_distance")) {
    r.approximation_distance = real_from(j["approximation_distance"], "approximation_distance");
  }
  return r;
}

inline Json to_json(const GadgetPlan& plan) {
  return {{"epsilon", plan.epsilon},
          {"system_modes", plan.system_modes},
          {"xi", plan.xi},
          {"first_moment", plan.first_moment},
          {"second_moment", plan.second_moment},
          {"c_constant", plan.c_constant},
          {"k_constant", plan.k_constant}};
}

inline Json to_json(const SingleModeState& s) {
  return {{"core", to_json(s.core)}, {"squeeze", to_json(s.squeeze)}, {"displacement", to_json(s.displacement)}};
}

inline Json to_json(const SeparableDecomposition& dec) {
  Json labels = Json::array();
  for (const auto& l : dec.labels) {
    Json states = Json::array();
    for (const auto& s : l.modes) states.push_back(to_json(s));
    labels.push_back({{"weight", l.weight}, {"states", states}});
  }
  Json j = {{"modes", dec.modes()}, {"labels", labels}};
  if (dec.unitary) j["unitary"] = to_json(*dec.unitary);
  return j;
}

inline SeparableDecomposition decomposition_from(const Json& j) {
  SeparableDecomposition dec;
  const Json& labels = require(j, "labels", "");
  if (!labels.is_array()) fail("labels", "expected an array");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string p = item("labels", i);
    SeparableLabel label;
    label.weight = real_from(require(labels[i], "weight", p), child(p, "weight"));
    const Json& states = require(labels[i], "states", p);
    if (!states.is_array()) fail(child(p, "states"), "expected an array");
    for (std::size_t k = 0; k < states.size(); ++k) {
      const std::string sp = item(child(p, "states"), k);
      SingleModeState s;
      s.core = core_state_from(require(states[k], "core", sp), child(sp, "core"));
      if (states[k].contains("squeeze")) s.squeeze = complex_from(states[k]["squeeze"], child(sp, "squeeze"));
      if (states[k].contains("displacement")) {
        s.displacement = complex_from(states[k]["displacement"], child(sp, "displacement"));
      }
      label.modes.push_back(std::move(s));
    }
    dec.labels.push_back(std::move(label));
  }
  if (j.contains("unitary")) dec.unitary = matrix_from(j["unitary"], "unitary");
  if (j.contains("modes") && static_cast<std::size_t>(integer_from(j["modes"], "modes")) != dec.modes()) {
    fail("modes", "differs from the number of states per label");
  }
  try {
    dec.validate();
  } catch (const Error& e) {
    fail("labels", e.what());
  }
  return dec;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct SweepRow {
  std::size_t instance = 0;
  std::string protocol;
  double xi = 0.0;
  double p_exact = 0.0;
  double p_estimate = 0.0;
  double mult_error = 0.0;
};

inline constexpr const char* kSweepHeader = "instance,protocol,xi,p_exact,p_estimate,mult_error";

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.instance) + "," + r.protocol + "," + format_double(r.xi) + "," + format_double(r.p_exact) +
           "," + format_double(r.p_estimate) + "," + format_double(r.mult_error) + "\n";
  }
  return out;
}

inline std::vector<SweepRow> sweep_rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw Error(ErrorCode::ParseError, "sweep CSV header");
  std::vector<SweepRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(number);
    if (cells.size() != 6) throw Error(ErrorCode::ParseError, where + ": expected 6 columns");
    SweepRow r;
    r.instance = static_cast<std::size_t>(parse_double(cells[0], where + " instance"));
    r.protocol = cells[1];
    r.xi = parse_double(cells[2], where + " xi");
    r.p_exact = parse_double(cells[3], where + " p_exact");
    r.p_estimate = parse_double(cells[4], where + " p_estimate");
    r.mult_error = parse_double(cells[5], where + " mult_error");
    rows.push_back(r);
  }
  return rows;
}

struct QSampleRow {
  std::size_t sample_index = 0;
  std::size_t mode = 0;
  double re = 0.0;
  double im = 0.0;
  std::size_t label = 0;
};

inline constexpr const char* kQSampleHeader = "sample_index,mode,re,im,label";

inline std::vector<QSampleRow> rows_from(const QSampleResult& result) {
  std::vector<QSampleRow> rows;
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    for (std::size_t k = 0; k < result.samples[i].size(); ++k) {
      rows.push_back({i, k, result.samples[i][k].real(), result.samples[i][k].imag(), result.labels[i]});
    }
  }
  return rows;
}

inline std::string to_csv(const std::vector<QSampleRow>& rows) {
  std::string out = std::string(kQSampleHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sample_index) + "," + std::to_string(r.mode) + "," + format_double(r.re) + "," +
           format_double(r.im) + "," + std::to_string(r.label) + "\n";
  }
  return out;
}

inline std::vector<QSampleRow> qsample_rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kQSampleHeader) throw Error(ErrorCode::ParseError, "qsample CSV header");
  std::vector<QSampleRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(number);
    if (cells.size() != 5) throw Error(ErrorCode::ParseError, where + ": expected 5 columns");
    QSampleRow r;
    r.sample_index = static_cast<std::size_t>(parse_double(cells[0], where + " sample_index"));
    r.mode = static_cast<std::size_t>(parse_double(cells[1], where + " mode"));
    r.re = parse_double(cells[2], where + " re");
    r.im = parse_double(cells[3], where + " im");
    r.label = static_cast<std::size_t>(parse_double(cells[4], where + " label"));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace stellar::io
