#pragma once

// Fixture builders shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arm/corpus.hpp"

namespace arm::testing {

inline DataObject passage(std::string id, std::string title, std::vector<std::string> sentences) {
  DataObject o;
  o.id = std::move(id);
  o.kind = ObjectKind::Passage;
  o.title = std::move(title);
  o.sentences = std::move(sentences);
  return o;
}

inline DataObject table(std::string id, std::string title, std::vector<std::string> columns,
                        std::vector<std::vector<std::string>> rows,
                        std::optional<std::string> description = std::nullopt) {
  DataObject o;
  o.id = std::move(id);
  o.kind = ObjectKind::Table;
  o.title = std::move(title);
  o.description = std::move(description);
  o.columns = std::move(columns);
  o.rows = std::move(rows);
  return o;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("arm-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
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

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Small-vocabulary random text so that overlaps actually happen.
class TextGen {
 public:
  explicit TextGen(std::uint64_t seed, std::size_t vocab = 24) : rng_(seed), vocab_(vocab) {}

  std::mt19937_64& rng() { return rng_; }

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double real(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  std::string word() { return "w" + std::to_string(uniform(0, vocab_ - 1)); }

  std::string words(std::size_t lo, std::size_t hi) {
    std::string out;
    const std::size_t n = uniform(lo, hi);
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word();
    return out;
  }

  DataObject random_table(const std::string& id, std::size_t max_cols = 4, std::size_t max_rows = 6) {
    const std::size_t cols = uniform(1, max_cols);
    const std::size_t rows = uniform(1, max_rows);
    std::vector<std::string> headers;
    for (std::size_t c = 0; c < cols; ++c) headers.push_back(words(1, 2));
    std::vector<std::vector<std::string>> body(rows);
    for (auto& row : body) {
      for (std::size_t c = 0; c < cols; ++c) row.push_back(uniform(0, 9) == 0 ? "" : words(1, 2));
    }
    return table(id, words(1, 3), headers, body);
  }

  DataObject random_passage(const std::string& id, std::size_t max_sentences = 5) {
    std::vector<std::string> sentences;
    const std::size_t n = uniform(1, max_sentences);
    for (std::size_t i = 0; i < n; ++i) sentences.push_back(words(2, 7) + ".");
    return passage(id, words(1, 3), sentences);
  }

 private:
  std::mt19937_64 rng_;
  std::size_t vocab_;
};

}  // namespace arm::testing
