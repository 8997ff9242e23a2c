#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "sctree/phonology.hpp"
#include "sctree/random.hpp"
#include "sctree/text.hpp"

namespace testing {

inline const std::filesystem::path kData = SCTREE_DATA_DIR;

inline const sctree::PhoneFeatureTable& features() {
  static const auto table = sctree::load_feature_table(kData / "features.csv");
  return table;
}

inline const sctree::PhoneFeatureTable& full_features() {
  static const auto table = sctree::load_feature_table(kData / "features.csv", sctree::DiacriticPolicy::Full);
  return table;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sctree_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    sctree::write_file(path_ / name, content);
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Captures std::cout and std::cerr for the lifetime of the object.
class Capture {
 public:
  Capture() : out_(std::cout.rdbuf(outbuf_.rdbuf())), err_(std::cerr.rdbuf(errbuf_.rdbuf())) {}
  ~Capture() {
    std::cout.rdbuf(out_);
    std::cerr.rdbuf(err_);
  }
  std::string out() const { return outbuf_.str(); }
  std::string err() const { return errbuf_.str(); }

 private:
  std::ostringstream outbuf_, errbuf_;
  std::streambuf* out_;
  std::streambuf* err_;
};

}  // namespace testing
