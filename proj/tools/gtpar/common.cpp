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

#include "common.hpp"

#include <fstream>
#include <iostream>

#include "gtpar/errors.hpp"
#include "gtpar/graph_io.hpp"

namespace gtpar::cli {

void add_graph_options(CLI::App* app, GraphInput& in) {
  app->add_option("--graph", in.path, "Graph file");
  app->add_option("--format", in.format, "Graph file format")
      ->check(CLI::IsMember({"edgelist", "bincsr"}))
      ->capture_default_str();
  app->add_flag("--symmetrize", in.symmetrize, "Add reverse edges and deduplicate");
  app->add_flag("--relabel", in.relabel, "Compact sparse node ids to [0, N)");
  app->add_flag("--transpose", in.transpose, "Reverse every edge");
}

CsrGraph load_input_graph(const GraphInput& in) {
  EdgeListOptions opts;
  opts.symmetrize = in.symmetrize;
  opts.relabel = in.relabel;
  opts.transpose = in.transpose;
  const GraphFormat format = parse_graph_format(in.format);
  if (in.relabel && format == GraphFormat::kBinCsr) {
    throw ArgumentError("--relabel applies to edge lists only");
  }
  return load_graph(in.path, format, opts);
}

OutputFile::OutputFile(const std::string& path) {
  if (path.empty() || path == "-") return;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*f) throw IoError("cannot open '" + path + "' for writing");
  file_ = std::move(f);
}

std::ostream& OutputFile::stream() { return file_ ? *file_ : std::cout; }

Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

}  // namespace gtpar::cli
