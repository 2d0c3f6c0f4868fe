#include "output.hpp"

#include "crystal_heat/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cli {

namespace fs = std::filesystem;

OutputDir::OutputDir(std::string path, bool force) : path_(std::move(path)), force_(force) {
  if (path_.empty()) throw crystal_heat::validation_error("output directory must not be empty");
}

void OutputDir::reserve(const std::vector<std::string>& names) {
  if (force_) return;
  for (const auto& n : names) {
    if (fs::exists(fs::path(path_) / n)) {
      throw crystal_heat::validation_error("refusing to overwrite " + (fs::path(path_) / n).string() +
                                           " (use --force)");
    }
  }
}

void OutputDir::write(const std::string& name, const std::string& content) {
  fs::create_directories(path_);
  const fs::path target = fs::path(path_) / name;
  const fs::path tmp = fs::path(path_) / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
  written_.push_back(name);
}

void OutputDir::write_json(const std::string& name, const nlohmann::ordered_json& j) {
  write(name, j.dump(2) + "\n");
}

std::string fmt_real(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!row_start_) out_ += ',';
  out_ += s;
  row_start_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(fmt_real(x)); }
CsvWriter& CsvWriter::cell(long x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::empty() { return cell(std::string()); }

void CsvWriter::end_row() {
  out_ += '\n';
  row_start_ = true;
}

}  // namespace cli
