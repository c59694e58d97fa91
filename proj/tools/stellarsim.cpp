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

// stellarsim: command-line driver for the simulation library.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stellar/io.hpp"
#include "stellar/numerics.hpp"
#include "stellar/qsample.hpp"
#include "stellar/sampler.hpp"
#include "stellar/sweep.hpp"

namespace {

using stellar::Error;
using stellar::ErrorCode;
namespace io = stellar::io;

constexpr int kExitParse = 1;
constexpr int kExitCompute = 2;
constexpr int kExitPrecision = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> cutoff;
  std::optional<double> epsilon;
  std::string out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, g.out + ": cannot write file");
  out << text;
}

io::Instance load_instance(const Globals& g, const std::string& path) {
  io::Instance inst = io::instance_from(io::parse_text(read_file(path), path));
  if (g.cutoff) inst.cutoff = *g.cutoff;
  if (g.epsilon) inst.epsilon = *g.epsilon;
  return inst;
}

stellar::GadgetPlan plan_for(const io::Instance& inst) {
  if (inst.xi_mode == stellar::XiMode::Uniform) return stellar::GadgetPlan::uniform(inst.outcome, inst.xi);
  return stellar::choose_xi(inst.outcome, inst.epsilon, inst.state.modes(), inst.cutoff);
}

void cmd_exact(const Globals& g, const std::string& path) {
  const io::Instance inst = load_instance(g, path);
  io::ProbabilityReport report;
  report.p_exact = stellar::exact_probability(inst.input(), inst.outcome, inst.cutoff);
  report.bound_epsilon = inst.epsilon;
  emit(g, io::to_json(report).dump(2) + "\n");
}

void cmd_estimate(const Globals& g, const std::string& path) {
  const io::Instance inst = load_instance(g, path);
  const stellar::GadgetPlan plan = plan_for(inst);
  const stellar::SamplerSetup setup = stellar::build_sampler(inst.input(), inst.outcome, plan);
  io::ProbabilityReport report;
  report.p_exact = stellar::exact_probability(inst.input(), inst.outcome, inst.cutoff);
  report.p_estimate = stellar::estimate_probability(setup, inst.cutoff);
  report.bound_epsilon = inst.epsilon;
  report.xi_used = plan.flattened();
  emit(g, io::to_json(report).dump(2) + "\n");
}

void cmd_strongsim(const Globals& g, const std::string& path) {
  const io::Instance inst = load_instance(g, path);
  stellar::StrongSimOptions options;
  options.xi_mode = inst.xi_mode;
  options.xi = inst.xi;
  options.plan_cutoff = inst.cutoff;
  const stellar::StrongSimResult result = stellar::strong_simulate(inst.input(), inst.outcome, inst.epsilon, options);
  io::ProbabilityReport report;
  report.p_estimate = result.probability;
  report.bound_epsilon = inst.epsilon;
  report.xi_used = result.plan.flattened();
  report.term_count = result.term_count;
  report.max_matrix_dimension = result.max_matrix_dimension;
  emit(g, io::to_json(report).dump(2) + "\n");
}

void cmd_hafnian(const Globals& g, const std::string& path, const std::string& kind) {
  const std::string text = read_file(path);
  stellar::ComplexMatrix m(0, 0);
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) m = io::matrix_from(io::parse_text(text, path));
  stellar::Complex value;
  if (kind == "hafnian") value = stellar::hafnian(m);
  else if (kind == "loop") value = stellar::loop_hafnian(m);
  else value = stellar::permanent(m);
  const io::Json j = {{"kind", kind}, {"dimension", m.rows()}, {"value", io::to_json(value)}};
  emit(g, j.dump(2) + "\n");
}

void cmd_sweep(const Globals& g, stellar::SweepConfig config) {
  config.seed = *g.seed;
  std::vector<std::string> log;
  const auto rows = stellar::run_sweep(config, &log);
  for (const auto& line : log) std::cerr << line << "\n";
  emit(g, io::to_csv(rows));
}

void cmd_qsample(const Globals& g, const std::string& path, std::size_t samples, unsigned threads) {
  const stellar::SeparableDecomposition dec = io::decomposition_from(io::parse_text(read_file(path), path));
  const stellar::QSampleResult result = stellar::sample_separable(dec, samples, *g.seed, threads);
  std::cerr << "acceptance rate " << io::format_double(result.acceptance_rate()) << "\n";
  emit(g, io::to_csv(io::rows_from(result)));
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
      return kExitParse;
    case ErrorCode::UnderflowRisk:
    case ErrorCode::CutoffTooSmall:
    case ErrorCode::RankBudgetTooSmall:
      return kExitPrecision;
    default:
      return kExitCompute;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-rank photonic state simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  int cutoff = 0;
  double epsilon = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "Master random seed");
  auto* cutoff_opt = app.add_option("--cutoff", cutoff, "Fock cutoff, overrides the instance")->check(CLI::Range(1, 200));
  auto* eps_opt = app.add_option("--epsilon", epsilon, "Error budget, overrides the instance")
                      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--out", g.out, "Output file (default stdout)");

  std::string file;
  auto* exact = app.add_subcommand("exact", "Exact outcome probability of an instance");
  exact->add_option("instance", file, "Instance JSON")->required();
  auto* estimate = app.add_subcommand("estimate", "Gadget estimate and exact probability of an instance");
  estimate->add_option("instance", file, "Instance JSON")->required();
  auto* strongsim = app.add_subcommand("strongsim", "Core-state strong simulation of an instance");
  strongsim->add_option("instance", file, "Instance JSON")->required();

  std::string kind = "hafnian";
  auto* haf = app.add_subcommand("hafnian", "Hafnian, loop hafnian or permanent of a matrix file");
  haf->add_option("matrix", file, "Matrix JSON")->required();
  haf->add_option("--kind", kind, "hafnian, loop or permanent")
      ->check(CLI::IsMember({"hafnian", "loop", "permanent"}));

  stellar::SweepConfig sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-xi", "Multiplicative error of gadget estimates over xi");
  sweep_cmd->add_option("--protocol", sweep.protocol, "bs or gbs")->check(CLI::IsMember({"bs", "gbs"}));
  sweep_cmd->add_option("--modes", sweep.modes, "Number of modes")->check(CLI::Range(1, 6));
  sweep_cmd->add_option("--photons", sweep.photons, "Detected photons")->check(CLI::Range(1, 3));
  sweep_cmd->add_option("--squeezing", sweep.squeezing, "Single-mode squeezing for gbs");
  sweep_cmd->add_option("--xi", sweep.xi, "xi values")->required()->expected(1, -1);
  sweep_cmd->add_option("--instances", sweep.instances, "Random interferometers")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");

  std::size_t samples = 1000;
  unsigned threads = 1;
  auto* qs = app.add_subcommand("qsample", "Q-function samples of a passively separable state");
  qs->add_option("decomposition", file, "Decomposition JSON")->required();
  qs->add_option("--samples", samples, "Number of samples");
  qs->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }
  if (*seed_opt) g.seed = seed;
  if (*cutoff_opt) g.cutoff = cutoff;
  if (*eps_opt) g.epsilon = epsilon;

  try {
    if ((*sweep_cmd || *qs) && !g.seed) throw Error(ErrorCode::ParseError, "--seed is required for randomized commands");
    if (*exact) cmd_exact(g, file);
    else if (*estimate) cmd_estimate(g, file);
    else if (*strongsim) cmd_strongsim(g, file);
    else if (*haf) cmd_hafnian(g, file, kind);
    else if (*sweep_cmd) cmd_sweep(g, sweep);
    else if (*qs) cmd_qsample(g, file, samples, threads);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return 0;
}
