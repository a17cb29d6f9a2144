#include "qtraj/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qtraj {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidArgument(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, r.ptr);
}

void write_series_csv(const std::filesystem::path& path, const RunRecord& run) {
  auto out = open_out(path);
  out << "time,traj_id";
  for (const auto& c : run.columns) out << ',' << c;
  out << '\n';
  for (std::size_t t = 0; t < run.times.size(); ++t) {
    out << format_double(run.times[t]) << ',' << run.traj_id;
    for (double v : run.values[t]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                         const std::vector<EnsembleSeries>& series) {
  if (series.size() != columns.size()) throw InvalidArgument("one series per column expected");
  auto out = open_out(path);
  out << "time,traj_id";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  if (series.empty()) return;
  const auto& times = series.front().times;
  for (const char* kind : {"mean", "stderr"}) {
    const bool mean = std::string_view(kind) == "mean";
    for (std::size_t t = 0; t < times.size(); ++t) {
      out << format_double(times[t]) << ',' << kind;
      for (const auto& s : series) out << ',' << format_double(mean ? s.mean[t] : s.std_error[t]);
      out << '\n';
    }
  }
}

void write_jump_log(const std::filesystem::path& path, const std::vector<RunRecord>& runs,
                    const std::vector<std::string>& channel_labels) {
  auto out = open_out(path);
  out << "traj_id,time,channel,norm_residual\n";
  for (const auto& r : runs) {
    for (const auto& j : r.jumps) {
      out << r.traj_id << ',' << format_double(j.time) << ',' << channel_labels.at(j.channel) << ','
          << format_double(j.norm_residual) << '\n';
    }
  }
}

void write_density_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<DenseMatrix>& rhos, const std::string& traj_id) {
  if (times.size() != rhos.size()) throw InvalidArgument("one density matrix per time expected");
  auto out = open_out(path);
  out << "time,traj_id";
  const Eigen::Index d = rhos.empty() ? 0 : rhos.front().rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out << ",re_" << i << '_' << j << ",im_" << i << '_' << j;
  out << '\n';
  for (std::size_t t = 0; t < times.size(); ++t) {
    out << format_double(times[t]) << ',' << traj_id;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        out << ',' << format_double(rhos[t](i, j).real()) << ',' << format_double(rhos[t](i, j).imag());
    out << '\n';
  }
}

RunRecord CsvTable::select(const std::string& traj_id) const {
  RunRecord r;
  r.traj_id = traj_id;
  r.columns = columns;
  for (std::size_t k = 0; k < traj_ids.size(); ++k) {
    if (traj_ids[k] != traj_id) continue;
    r.times.push_back(times[k]);
    r.values.push_back(values[k]);
  }
  if (r.times.empty()) throw InvalidArgument("no rows with traj_id '" + traj_id + "'");
  return r;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
  auto header = split(line);
  if (header.size() < 2 || header[0] != "time" || header[1] != "traj_id") {
    throw InvalidArgument(path.string() + ": header must start with time,traj_id");
  }
  CsvTable table;
  table.columns.assign(header.begin() + 2, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    table.times.push_back(parse_double(f[0], path, lineno));
    table.traj_ids.push_back(f[1]);
    std::vector<double> row;
    row.reserve(f.size() - 2);
    for (std::size_t i = 2; i < f.size(); ++i) row.push_back(parse_double(f[i], path, lineno));
    table.values.push_back(std::move(row));
  }
  return table;
}

std::vector<RunRecord> read_trajectories(const std::filesystem::path& dir) {
  std::vector<std::pair<long long, std::filesystem::path>> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!name.starts_with("traj_") || !name.ends_with(".csv")) continue;
    const auto id = name.substr(5, name.size() - 9);
    long long v = 0;
    const auto r = std::from_chars(id.data(), id.data() + id.size(), v);
    if (r.ec != std::errc() || r.ptr != id.data() + id.size()) continue;
    files.emplace_back(v, e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> runs;
  for (const auto& [id, p] : files) runs.push_back(read_csv(p).select(std::to_string(id)));
  return runs;
}

std::vector<DenseMatrix> read_density_csv(const std::filesystem::path& path, std::vector<double>& times) {
  const auto table = read_csv(path);
  const auto entries = table.columns.size() / 2;
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(entries))));
  if (std::size_t(d * d) * 2 != table.columns.size()) throw InvalidArgument(path.string() + ": not a square matrix");
  times = table.times;
  std::vector<DenseMatrix> out;
  for (const auto& row : table.values) {
    DenseMatrix rho(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto k = std::size_t(2 * (i * d + j));
        rho(i, j) = cplx(row[k], row[k + 1]);
      }
    out.push_back(std::move(rho));
  }
  return out;
}

}  // namespace qtraj
