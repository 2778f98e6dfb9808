// Copyright 2026 The gtpar Authors. All Rights Reserved.
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

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "gtpar/csr_graph.hpp"
#include "gtpar/dense.hpp"
#include "gtpar/random.hpp"

namespace gtpar::cli {

enum ExitCode : int { kPass = 0, kVerificationFailure = 1, kUsageError = 2, kIoFailure = 3 };

// A registered subcommand and the action to run once it has been parsed.
struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

struct GraphInput {
  std::string path;
  std::string format = "edgelist";
  bool symmetrize = false;
  bool relabel = false;
  bool transpose = false;
};

void add_graph_options(CLI::App* app, GraphInput& in);
CsrGraph load_input_graph(const GraphInput& in);

// Output stream for `path`; "-" or empty selects stdout.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path);
  std::ostream& stream();

 private:
  std::unique_ptr<std::ostream> file_;
};

Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale);

Command add_generate(CLI::App& root);
Command add_verify(CLI::App& root);
Command add_bench(CLI::App& root);
Command add_profile(CLI::App& root);
Command add_plan(CLI::App& root);
Command add_train(CLI::App& root);

}  // namespace gtpar::cli
