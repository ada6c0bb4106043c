#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "satflow/app.hpp"

namespace satflow::app::detail {

using json = nlohmann::ordered_json;

void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& text);
void write_trajectory_csv(const std::string& path, const Trajectory& trajectory);
/// Two-column CSV with the given header; values at 17 significant digits.
void write_series_csv(const std::string& path, const std::string& header, const std::vector<double>& a,
                      const std::vector<double>& b);

/// Writes snapshots/step_XXXXXX.csv every `stride` steps, step 0 included.
class SnapshotWriter {
 public:
  SnapshotWriter(std::string directory, std::size_t stride);
  void write(std::size_t step, const DensityField& field) const;
  bool enabled() const { return stride_ > 0; }

 private:
  std::string directory_;
  std::size_t stride_;
};

/// Collects checks and report sections, then emits report.json and summary.txt.
class Report {
 public:
  Report(std::string command, std::string target);

  void check(const std::string& name, bool passed, double value, double threshold);
  void section(const std::string& key, json value) { body_[key] = std::move(value); }
  void note(const std::string& line) { notes_.push_back(line); }
  void artifact(const std::string& path) { artifacts_.push_back(path); }

  RunResult finish(const OutputConfig& outputs) const;
  static RunResult failure(const std::string& command, const std::string& target, const Error& error);

 private:
  std::string command_, target_;
  std::vector<Check> checks_;
  std::vector<std::string> notes_, artifacts_;
  json body_ = json::object();
};

std::string join(const std::string& dir, const std::string& name);

}  // namespace satflow::app::detail
