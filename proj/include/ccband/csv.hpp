#pragma once

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccband {

// Deterministic CSV writer: fixed %.12g formatting and caller-defined row
// order, so identical inputs give byte-identical files.
class CsvWriter {
public:
  explicit CsvWriter(std::filesystem::path const& path) {
    file_ = std::fopen(path.string().c_str(), "wb");
    if (!file_)
      throw std::runtime_error("csv: cannot open " + path.string());
  }
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }
  CsvWriter(CsvWriter const&) = delete;
  CsvWriter& operator=(CsvWriter const&) = delete;

  void comment(std::string const& text) {
    std::fprintf(file_, "# %s\n", text.c_str());
  }
  void header(std::vector<std::string> const& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      std::fprintf(file_, "%s%s", i ? "," : "", cols[i].c_str());
    std::fprintf(file_, "\n");
  }
  void row(std::vector<double> const& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      std::fprintf(file_, "%s%.12g", i ? "," : "", vals[i]);
    std::fprintf(file_, "\n");
  }
  void row_with_label(std::vector<double> const& vals, std::string const& label) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      std::fprintf(file_, "%s%.12g", i ? "," : "", vals[i]);
    std::fprintf(file_, ",%s\n", label.c_str());
  }

private:
  std::FILE* file_ = nullptr;
};

} // namespace ccband
