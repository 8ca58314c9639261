#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "rppg/error.hpp"

// Asserts that `expr` throws rppg::Error of the given kind.
#define CHECK_ERROR_KIND(expr, expected_kind)                       \
  do {                                                              \
    bool thrown_ = false;                                           \
    try {                                                           \
      (void)(expr);                                                 \
    } catch (const rppg::Error& e_) {                               \
      thrown_ = true;                                               \
      CHECK_MESSAGE(e_.kind() == (expected_kind), std::string(e_.what()));       \
    }                                                               \
    CHECK_MESSAGE(thrown_, "expected an rppg::Error from " #expr);  \
  } while (0)

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rppg-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};
