#pragma once

// Shared scaffolding for the test binaries: small graph builders, temp-file
// plumbing, and stream capture for driving the CLI in-process.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twinforge/model.hpp"

#ifndef TWINFORGE_SOURCE_DIR
#define TWINFORGE_SOURCE_DIR "."
#endif

namespace tf_test {

inline std::string source_root() { return TWINFORGE_SOURCE_DIR; }

inline std::string fixture_path(const std::string& rel) {
  return source_root() + "/fixtures/" + rel;
}

// Serial line: SRC -> M1 -> ... -> Mn -> SINK with capacity-1 buffers B0..Bn.
// Matches the benchmark generator's shape so stats oracles carry over.
inline twinforge::ModelGraph make_line(std::size_t machines,
                                       twinforge::ParamValue inter_arrival,
                                       std::vector<double> delays = {},
                                       double buffer_capacity = 1.0) {
  using namespace twinforge;
  ModelGraph g;
  g.name = "line";
  Node src;
  src.id = "SRC";
  src.kind = NodeKind::Source;
  src.params["inter_arrival"] = std::move(inter_arrival);
  g = add_node(std::move(g), std::move(src));
  for (std::size_t i = 1; i <= machines; ++i) {
    Node m;
    m.id = "M" + std::to_string(i);
    m.kind = NodeKind::Machine;
    const double d = i - 1 < delays.size() ? delays[i - 1] : 1.0;
    m.params["delay"] = ParamValue::of(d);
    g = add_node(std::move(g), std::move(m));
  }
  Node sink;
  sink.id = "SINK";
  sink.kind = NodeKind::Sink;
  g = add_node(std::move(g), std::move(sink));

  auto buffer = [&](const std::string& id, const std::string& from,
                    const std::string& to) {
    Edge e;
    e.id = id;
    e.kind = EdgeKind::Buffer;
    e.params["capacity"] = ParamValue::of(buffer_capacity);
    g = connect(std::move(g), from, std::move(e), to);
  };
  std::string prev = "SRC";
  for (std::size_t i = 1; i <= machines; ++i) {
    buffer("B" + std::to_string(i - 1), prev, "M" + std::to_string(i));
    prev = "M" + std::to_string(i);
  }
  buffer("B" + std::to_string(machines), prev, "SINK");
  return g;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto candidate = base / ("twinforge-test-" + std::to_string(rng()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read failed: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Redirects std::cout / std::cerr into buffers for the lifetime of the object.
class StreamCapture {
 public:
  StreamCapture()
      : old_out_(std::cout.rdbuf(out_.rdbuf())),
        old_err_(std::cerr.rdbuf(err_.rdbuf())) {}
  ~StreamCapture() {
    std::cout.rdbuf(old_out_);
    std::cerr.rdbuf(old_err_);
  }
  std::string out() const { return out_.str(); }
  std::string err() const { return err_.str(); }

 private:
  std::ostringstream out_, err_;
  std::streambuf* old_out_;
  std::streambuf* old_err_;
};

// argv helper: run_cli({"validate", path}) prepends the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace tf_test
