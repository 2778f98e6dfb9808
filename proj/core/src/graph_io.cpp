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

#include "gtpar/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>

#include "binary_io.hpp"
#include "gtpar/errors.hpp"

namespace gtpar {

namespace {

constexpr std::string_view kBinCsrMagic = "CSRGRAPH";
constexpr std::uint64_t kBinCsrVersion = 1;

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_index(std::string_view s, Index& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

struct RawEdge {
  Index src;
  Index dst;
  std::size_t line;
};

}  // namespace

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "edgelist") return GraphFormat::kEdgeList;
  if (name == "bincsr") return GraphFormat::kBinCsr;
  throw ArgumentError("unknown graph format '" + std::string(name) + "'");
}

CsrGraph read_edge_list(std::istream& is, const EdgeListOptions& options,
                        std::vector<Index>* original_ids) {
  std::vector<RawEdge> raw;
  Index declared_nodes = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto tok = tokens(line);
    if (tok.empty()) continue;
    if (tok[0].front() == '#') {
      // "# nodes N" (or "#nodes N") declares the node count.
      std::vector<std::string_view> rest(tok.begin() + 1, tok.end());
      if (tok[0].size() > 1) rest.insert(rest.begin(), tok[0].substr(1));
      if (rest.size() == 2 && rest[0] == "nodes") {
        if (!parse_index(rest[1], declared_nodes) || declared_nodes < 0) {
          throw DataError(at_line(line_no) + "invalid node count");
        }
      }
      continue;
    }
    if (tok.size() != 2) throw DataError(at_line(line_no) + "expected `src dst`");
    Index s = 0;
    Index d = 0;
    if (!parse_index(tok[0], s) || !parse_index(tok[1], d) || s < 0 || d < 0) {
      throw DataError(at_line(line_no) + "node ids must be non-negative integers");
    }
    if (options.transpose) std::swap(s, d);
    raw.push_back({s, d, line_no});
  }
  if (!is.eof() && is.fail()) throw IoError("error while reading edge list");

  std::vector<RawEdge> sorted = raw;
  std::stable_sort(sorted.begin(), sorted.end(), [](const RawEdge& a, const RawEdge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].src == sorted[i - 1].src && sorted[i].dst == sorted[i - 1].dst) {
      throw DataError(at_line(sorted[i].line) + "duplicate edge " + std::to_string(sorted[i].src) +
                      " " + std::to_string(sorted[i].dst) + " (first on line " +
                      std::to_string(sorted[i - 1].line) + ")");
    }
  }

  Index n = 0;
  std::vector<Edge> edges;
  edges.reserve(raw.size() * (options.symmetrize ? 2 : 1));
  if (options.relabel) {
    std::vector<Index> ids;
    ids.reserve(raw.size() * 2);
    for (const auto& e : raw) {
      ids.push_back(e.src);
      ids.push_back(e.dst);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto map = [&](Index id) {
      return static_cast<Index>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (const auto& e : raw) edges.emplace_back(map(e.src), map(e.dst));
    n = static_cast<Index>(ids.size());
    if (original_ids != nullptr) *original_ids = std::move(ids);
  } else {
    Index max_id = -1;
    for (const auto& e : raw) max_id = std::max({max_id, e.src, e.dst});
    n = declared_nodes >= 0 ? declared_nodes : max_id + 1;
    for (const auto& e : raw) {
      if (e.src >= n || e.dst >= n) {
        throw DataError(at_line(e.line) + "node id outside declared range [0, " +
                        std::to_string(n) + "); use --relabel for sparse ids");
      }
      edges.emplace_back(e.src, e.dst);
    }
    if (original_ids != nullptr) original_ids->clear();
  }

  if (options.symmetrize) {
    const std::size_t m = edges.size();
    for (std::size_t i = 0; i < m; ++i) edges.emplace_back(edges[i].second, edges[i].first);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  return CsrGraph::from_edges(n, edges);
}

void write_edge_list(std::ostream& os, const CsrGraph& g) {
  if (!g.is_square()) throw ArgumentError("edge lists hold square graphs only");
  os << "# nodes " << g.num_nodes() << '\n' << "# edges " << g.num_edges() << '\n';
  for (Index r = 0; r < g.num_rows(); ++r) {
    for (Index c : g.neighbors(r)) os << r << ' ' << c << '\n';
  }
  if (!os) throw IoError("failed to write edge list");
}

CsrGraph read_bincsr(std::istream& is) {
  detail::expect_magic(is, kBinCsrMagic);
  const auto version = detail::read_pod<std::uint64_t>(is, "version");
  if (version != kBinCsrVersion) throw IoError("unsupported bincsr version " + std::to_string(version));
  const auto n = detail::read_pod<std::int64_t>(is, "node count");
  const auto e = detail::read_pod<std::int64_t>(is, "edge count");
  if (n < 0 || e < 0) throw IoError("bincsr header has negative counts");
  auto read_array = [&](std::int64_t len, const char* what) {
    std::vector<Index> v;
    constexpr std::int64_t kChunk = 1 << 20;
    for (std::int64_t done = 0; done < len;) {
      const std::int64_t take = std::min(kChunk, len - done);
      const std::size_t old = v.size();
      v.resize(old + static_cast<std::size_t>(take));
      if (!is.read(reinterpret_cast<char*>(v.data() + old),
                   static_cast<std::streamsize>(take * static_cast<std::int64_t>(sizeof(Index))))) {
        throw IoError(std::string("truncated bincsr ") + what);
      }
      done += take;
    }
    return v;
  };
  std::vector<Index> row_ptr = read_array(n + 1, "row_ptr");
  std::vector<Index> col_idx = read_array(e, "col_idx");
  try {
    return CsrGraph(n, n, std::move(row_ptr), std::move(col_idx));
  } catch (const DataError& err) {
    throw DataError(std::string("bincsr content invalid: ") + err.what());
  }
}

void write_bincsr(std::ostream& os, const CsrGraph& g) {
  if (!g.is_square()) throw ArgumentError("bincsr holds square graphs only");
  detail::write_magic(os, kBinCsrMagic);
  detail::write_pod<std::uint64_t>(os, kBinCsrVersion);
  detail::write_pod<std::int64_t>(os, g.num_nodes());
  detail::write_pod<std::int64_t>(os, g.num_edges());
  os.write(reinterpret_cast<const char*>(g.row_ptr().data()),
           static_cast<std::streamsize>(g.row_ptr().size_bytes()));
  os.write(reinterpret_cast<const char*>(g.col_idx().data()),
           static_cast<std::streamsize>(g.col_idx().size_bytes()));
  if (!os) throw IoError("failed to write bincsr");
}

CsrGraph load_graph(const std::string& path, GraphFormat format, const EdgeListOptions& options) {
  std::ifstream is(path, format == GraphFormat::kBinCsr ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open '" + path + "'");
  if (format == GraphFormat::kEdgeList) return read_edge_list(is, options);
  CsrGraph g = read_bincsr(is);
  if (!options.symmetrize && !options.transpose) return g;
  std::vector<Edge> edges = g.edges();
  if (options.transpose) {
    for (auto& e : edges) std::swap(e.first, e.second);
  }
  if (options.symmetrize) {
    const std::size_t m = edges.size();
    for (std::size_t i = 0; i < m; ++i) edges.emplace_back(edges[i].second, edges[i].first);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  return CsrGraph::from_edges(g.num_nodes(), edges);
}

void save_graph(const std::string& path, const CsrGraph& g, GraphFormat format) {
  std::ofstream os(path, format == GraphFormat::kBinCsr ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  if (format == GraphFormat::kEdgeList) {
    write_edge_list(os, g);
  } else {
    write_bincsr(os, g);
  }
}

std::vector<LabelEntry> read_labels(std::istream& is) {
  std::vector<LabelEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto tok = tokens(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    LabelEntry e;
    if (tok.size() != 2 || !parse_index(tok[0], e.node) || !parse_index(tok[1], e.label) ||
        e.node < 0 || e.label < 0) {
      throw DataError(at_line(line_no) + "expected `node_id class_id`");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace gtpar
