#pragma once

// Shared test utilities: oracles, fixtures, subprocess capture.

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "iclkit/rng.hpp"

namespace testutil {

inline std::string fixture_dir() {
#ifdef ICLKIT_TEST_FIXTURES
  return ICLKIT_TEST_FIXTURES;
#else
  return "fixtures";
#endif
}

inline std::string cli_path() {
#ifdef ICLKIT_CLI_PATH
  return ICLKIT_CLI_PATH;
#else
  return "iclkit";
#endif
}

// Fresh scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("iclkit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command, capturing stdout/stderr separately.
inline CmdResult run_cmd(const std::string& cmd) {
  TempDir tmp("cmd");
  const std::string out_path = tmp.file("out");
  const std::string err_path = tmp.file("err");
  const int status = std::system((cmd + " >" + out_path + " 2>" + err_path).c_str());
  CmdResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  iclkit::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  iclkit::Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Central finite difference of a scalar function of a matrix, one entry.
inline double fd_entry(const std::function<double(const Eigen::MatrixXd&)>& f,
                       Eigen::MatrixXd at, Eigen::Index r, Eigen::Index c, double h) {
  at(r, c) += h;
  const double up = f(at);
  at(r, c) -= 2 * h;
  const double down = f(at);
  return (up - down) / (2 * h);
}

// Bytes that sniff as PNG but carry a distinguishing tag.
inline std::string tagged_png(const std::string& tag) {
  static const char magic[] = {'\x89', 'P', 'N', 'G', '\r', '\n', '\x1a', '\n'};
  return std::string(magic, sizeof(magic)) + tag;
}

}  // namespace testutil
