#include "emit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "satflow/numerics.hpp"

namespace satflow::app::detail {

using numerics::format_double;

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::io_error, "cannot create directory '" + dir + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

void write_trajectory_csv(const std::string& path, const Trajectory& trajectory) {
  std::ostringstream out;
  out << "step,t,mass,energy,dissipation,newton_iters,residual,linf_change\n";
  for (const auto& r : trajectory.rows) {
    out << r.step << ',' << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.energy)
        << ',' << format_double(r.dissipation) << ',' << r.newton_iters << ',' << format_double(r.residual) << ','
        << format_double(r.linf_change) << '\n';
  }
  write_text(path, out.str());
}

void write_series_csv(const std::string& path, const std::string& header, const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::ostringstream out;
  out << header << '\n';
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    out << format_double(a[i]) << ',' << format_double(b[i]) << '\n';
  write_text(path, out.str());
}

SnapshotWriter::SnapshotWriter(std::string directory, std::size_t stride)
    : directory_(std::move(directory)), stride_(stride) {
  if (stride_ > 0) ensure_directory(directory_);
}

void SnapshotWriter::write(std::size_t step, const DensityField& field) const {
  if (stride_ == 0 || step % stride_ != 0) return;
  char name[32];
  std::snprintf(name, sizeof name, "step_%06zu.csv", step);
  write_csv(join(directory_, name), field);
}

Report::Report(std::string command, std::string target) : command_(std::move(command)), target_(std::move(target)) {}

void Report::check(const std::string& name, bool passed, double value, double threshold) {
  checks_.push_back(Check{name, passed, value, threshold});
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

RunResult Report::finish(const OutputConfig& outputs) const {
  RunResult result;
  result.checks = checks_;
  bool all = true;
  for (const auto& c : checks_) all = all && c.passed;
  result.exit_code = all ? exit_pass : exit_assertion;

  json j;
  j["command"] = command_;
  j["target"] = target_;
  j["status"] = all ? "pass" : "assertion_failed";
  j["exit_code"] = result.exit_code;
  json checks = json::array();
  for (const auto& c : checks_)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number(c.value)}, {"threshold", number(c.threshold)}});
  j["checks"] = checks;
  for (const auto& [k, v] : body_.items()) j[k] = v;
  j["artifacts"] = artifacts_;
  result.json = j.dump(2) + "\n";

  std::ostringstream s;
  s << command_ << ' ' << target_ << ": " << (all ? "PASS" : "FAIL") << '\n';
  for (const auto& n : notes_) s << "  " << n << '\n';
  for (const auto& c : checks_) {
    char line[256];
    std::snprintf(line, sizeof line, "  [%s] %-36s value %-13.6g threshold %.6g\n", c.passed ? "pass" : "FAIL",
                  c.name.c_str(), c.value, c.threshold);
    s << line;
  }
  result.summary = s.str();

  if (outputs.has("report")) {
    ensure_directory(outputs.directory);
    write_text(join(outputs.directory, "report.json"), result.json);
    write_text(join(outputs.directory, "summary.txt"), result.summary);
  }
  return result;
}

RunResult Report::failure(const std::string& command, const std::string& target, const Error& error) {
  RunResult result;
  result.exit_code = exit_code_for(error.code());
  json j;
  j["command"] = command;
  j["target"] = target;
  j["status"] = result.exit_code == exit_config ? "config_error" : "solver_failure";
  j["exit_code"] = result.exit_code;
  j["error"] = {{"code", to_string(error.code())}, {"message", error.what()}};
  result.json = j.dump(2) + "\n";
  result.summary = command + ' ' + target + ": " + to_string(error.code()) + ": " + error.what() + '\n';
  return result;
}

}  // namespace satflow::app::detail
