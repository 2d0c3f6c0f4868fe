#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace cli {

/// Output directory with overwrite protection and write-then-rename.
class OutputDir {
 public:
  OutputDir(std::string path, bool force);

  /// Fails with a validation error if any of the names exists and force is off.
  void reserve(const std::vector<std::string>& names);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::ordered_json& j);

  const std::vector<std::string>& written() const { return written_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  bool force_;
  std::vector<std::string> written_;
};

/// 17 significant digits; empty string for NaN.
std::string fmt_real(double x);

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& cell(double x);
  CsvWriter& cell(long x);
  CsvWriter& cell(int x) { return cell(static_cast<long>(x)); }
  CsvWriter& cell(const std::string& s);
  CsvWriter& empty();
  void end_row();
  std::string str() const { return out_; }

 private:
  std::string out_;
  bool row_start_ = true;
};

}  // namespace cli
