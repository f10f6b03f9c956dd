#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "nsqm/errors.hpp"

namespace nsqm {

// CSV emission: one header row, floats at 17 significant digits so reruns
// with identical seeds are byte-identical.
class CsvWriter {
 public:
  CsvWriter() = default;
  explicit CsvWriter(const std::filesystem::path& path) { open(path); }
  ~CsvWriter() { close(); }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  CsvWriter(CsvWriter&& o) noexcept : f_(o.f_), first_(o.first_) { o.f_ = nullptr; }

  void open(const std::filesystem::path& path) {
    f_ = std::fopen(path.string().c_str(), "wb");
    if (!f_) throw Error("cannot open output file " + path.string());
  }
  void close() {
    if (f_) std::fclose(f_);
    f_ = nullptr;
  }

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i)
      std::fprintf(f_, "%s%s", i ? "," : "", names[i].c_str());
    std::fprintf(f_, "\n");
    first_ = true;
  }
  void cell(double v) {
    std::fprintf(f_, "%s%.17g", first_ ? "" : ",", v);
    first_ = false;
  }
  void cell(long v) {
    std::fprintf(f_, "%s%ld", first_ ? "" : ",", v);
    first_ = false;
  }
  void cell(const std::string& v) {
    std::fprintf(f_, "%s%s", first_ ? "" : ",", v.c_str());
    first_ = false;
  }
  void end_row() {
    std::fprintf(f_, "\n");
    first_ = true;
  }

 private:
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

// Tracks emitted files so a failing pipeline can remove partial outputs.
class OutputSession {
 public:
  explicit OutputSession(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  std::filesystem::path path(const std::string& name) {
    created_.push_back(dir_ / name);
    return created_.back();
  }
  void discard_all() {
    for (const auto& p : created_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    created_.clear();
  }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> created_;
};

}  // namespace nsqm
