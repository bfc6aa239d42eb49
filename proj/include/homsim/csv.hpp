#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "homsim/errors.hpp"

namespace homsim {

// Deterministic CSV output: '#'-prefixed metadata lines, one header row,
// numbers printed with a fixed %.12g format so identical runs produce
// identical bytes.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
        if (!out_) throw IoError("cannot open for writing: " + path);
        path_ = path;
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void header(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", values[i]);
            out_ << (i ? "," : "") << buf;
        }
        out_ << "\n";
    }

    void close() {
        out_.close();
        if (out_.fail()) throw IoError("write failed: " + path_);
    }

  private:
    std::ofstream out_;
    std::string path_;
};

}  // namespace homsim
