#include "ptree/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ptree {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const fs::path& p, std::size_t row, std::size_t col, const std::string& what) {
  std::string where = p.string();
  if (row) where += ":" + std::to_string(row);
  if (col) where += ":" + std::to_string(col);
  throw DataError(where + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool numeric(const std::string& s) {
  double v;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of;  // file line of each row
};

Table read_table(const fs::path& p, bool allow_blank_lines = false) {
  std::ifstream in(p);
  if (!in) fail(p, 0, 0, "cannot open file");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (allow_blank_lines) continue;
      // trailing newline at end of file produces no line; anything else is a blank row
      fail(p, lineno, 0, "blank line");
    }
    auto f = split_fields(line);
    if (t.rows.empty() && t.header.empty() && !numeric(f[0])) {
      t.header = f;
      continue;
    }
    t.rows.push_back(std::move(f));
    t.line_of.push_back(lineno);
  }
  if (t.rows.empty()) fail(p, 0, 0, "no data rows");
  return t;
}

std::int64_t to_int(const fs::path& p, std::size_t row, std::size_t col, const std::string& s) {
  std::int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(p, row, col, "expected an integer, got '" + s + "'");
  return v;
}

double to_double(const fs::path& p, std::size_t row, std::size_t col, const std::string& s) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(p, row, col, "expected a number, got '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CaptureHistoryMatrix read_capture_histories(const fs::path& path) {
  Table t = read_table(path);
  CaptureHistoryMatrix h;
  h.K = static_cast<int>(t.rows[0].size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    std::size_t line = t.line_of[i];
    if (static_cast<int>(r.size()) != h.K)
      fail(path, line, 0, "expected " + std::to_string(h.K) + " columns, got " + std::to_string(r.size()));
    std::vector<std::uint8_t> row;
    bool any = false;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (r[c] != "0" && r[c] != "1") fail(path, line, c + 1, "cell must be 0 or 1, got '" + r[c] + "'");
      row.push_back(r[c] == "1");
      any = any || row.back();
    }
    if (!any) fail(path, line, 0, "history has no capture");
    h.rows.push_back(std::move(row));
  }
  return h;
}

std::vector<std::int64_t> read_counts(const fs::path& path) {
  Table t = read_table(path);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != 1) fail(path, t.line_of[i], 2, "expected a single column");
    auto v = to_int(path, t.line_of[i], 1, t.rows[i][0]);
    if (v < 0) fail(path, t.line_of[i], 1, "negative count");
    out.push_back(v);
  }
  return out;
}

std::vector<std::vector<std::int64_t>> read_counts_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, 0, 0, "cannot open file");
  std::vector<std::vector<std::int64_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto a = line.find_first_not_of(" \t");
    if (a == std::string::npos || line[a] == '#') continue;
    fs::path p = line.substr(a, line.find_last_not_of(" \t") - a + 1);
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back(read_counts(p));
  }
  if (out.empty()) fail(path, 0, 0, "manifest lists no files");
  return out;
}

Matrix64 read_matrix(const fs::path& path) {
  Table t = read_table(path);
  Matrix64 m;
  const std::size_t cols = t.rows[0].size();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != cols) fail(path, t.line_of[i], 0, "ragged row");
    std::vector<std::int64_t> row;
    for (std::size_t c = 0; c < cols; ++c) {
      auto v = to_int(path, t.line_of[i], c + 1, t.rows[i][c]);
      if (v < 0) fail(path, t.line_of[i], c + 1, "negative entry");
      row.push_back(v);
    }
    m.push_back(std::move(row));
  }
  return m;
}

std::pair<Matrix64, std::vector<std::int64_t>> read_rr(const fs::path& recoveries, const fs::path& markings) {
  Matrix64 R = read_matrix(recoveries);
  auto m = read_counts(markings);
  const std::size_t K = R.size();
  if (R[0].size() != K) fail(recoveries, 0, 0, "recovery matrix must be square");
  if (m.size() != K) fail(markings, 0, 0, "expected " + std::to_string(K) + " markings, got " + std::to_string(m.size()));
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t total = 0;
    for (std::size_t j = 0; j < K; ++j) {
      if (j < k && R[k][j] != 0) fail(recoveries, k + 1, j + 1, "nonzero entry below the diagonal");
      total += R[k][j];
    }
    if (total > m[k]) fail(recoveries, k + 1, 0, "recoveries exceed the " + std::to_string(m[k]) + " marked");
  }
  return {R, m};
}

void write_capture_histories(const CaptureHistoryMatrix& h, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& r : h.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << int(r[c]);
    out << "\n";
  }
}

void write_counts(const std::vector<std::int64_t>& c, const fs::path& path) {
  auto out = open_out(path);
  for (auto v : c) out << v << "\n";
}

void write_matrix(const Matrix64& m, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& r : m) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << "\n";
  }
}

namespace {
std::vector<std::vector<std::uint8_t>> read_binary_rows(const fs::path& path) {
  Matrix64 m = read_matrix(path);
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::uint8_t> row;
    for (std::size_t c = 0; c < m[i].size(); ++c) {
      if (m[i][c] > 1) fail(path, i + 1, c + 1, "cell must be 0 or 1");
      row.push_back(static_cast<std::uint8_t>(m[i][c]));
    }
    out.push_back(std::move(row));
  }
  return out;
}
}  // namespace

ModelData load_data(const Config& cfg) {
  ModelData d;
  const DataPaths& p = cfg.data;
  auto need = [](const fs::path& x, const char* key) {
    if (x.empty()) throw ConfigError(std::string("missing data path '") + key + "'");
  };
  switch (cfg.spec.kind) {
    case ModelKind::CJS:
      need(p.histories, "histories");
      d.histories = read_capture_histories(p.histories);
      break;
    case ModelKind::JointCRCD:
      need(p.counts, "counts");
      d.counts = {read_counts(p.counts)};
      if (cfg.spec.resight) {
        need(p.resight_1, "resight_1");
        need(p.resight_2, "resight_2");
        // either channel may miss an individual entirely, so rows are plain 0/1 vectors
        d.resight_1 = read_binary_rows(p.resight_1);
        d.resight_2 = read_binary_rows(p.resight_2);
      } else {
        need(p.histories, "histories");
        d.histories = read_capture_histories(p.histories);
      }
      break;
    case ModelKind::RR:
      if (cfg.spec.juvenile_split) {
        need(p.recoveries_juvenile, "recoveries_juvenile");
        need(p.recoveries_adult, "recoveries_adult");
        need(p.markings_juvenile, "markings_juvenile");
        need(p.markings_adult, "markings_adult");
        std::tie(d.recoveries_juvenile, d.marked_juvenile) = read_rr(p.recoveries_juvenile, p.markings_juvenile);
        std::tie(d.recoveries_adult, d.marked_adult) = read_rr(p.recoveries_adult, p.markings_adult);
      } else {
        need(p.recoveries, "recoveries");
        need(p.markings, "markings");
        std::tie(d.recoveries, d.marked) = read_rr(p.recoveries, p.markings);
      }
      break;
    case ModelKind::HierCounts:
    case ModelKind::LongSeriesOPT:
      if (!p.counts_manifest.empty()) d.counts = read_counts_manifest(p.counts_manifest);
      else if (!p.counts.empty()) d.counts = {read_counts(p.counts)};
      else throw ConfigError("missing data path 'counts_manifest'");
      break;
  }
  validate_data(cfg.spec, d);
  return d;
}

std::map<std::string, std::string> save_data(const ModelSpec& spec, const ModelData& d, const fs::path& dir) {
  fs::create_directories(dir);
  std::map<std::string, std::string> e;
  auto put = [&](const char* key, const std::string& file) { e[key] = (dir / file).string(); };
  switch (spec.kind) {
    case ModelKind::CJS:
      write_capture_histories(d.histories, dir / "histories.csv");
      put("histories", "histories.csv");
      break;
    case ModelKind::JointCRCD:
      write_counts(d.counts.at(0), dir / "counts.csv");
      put("counts", "counts.csv");
      if (spec.resight) {
        for (int ch = 1; ch <= 2; ++ch) {
          Matrix64 b;
          for (const auto& r : ch == 1 ? d.resight_1 : d.resight_2) b.emplace_back(r.begin(), r.end());
          write_matrix(b, dir / ("resight_" + std::to_string(ch) + ".csv"));
        }
        put("resight_1", "resight_1.csv");
        put("resight_2", "resight_2.csv");
      } else {
        write_capture_histories(d.histories, dir / "histories.csv");
        put("histories", "histories.csv");
      }
      break;
    case ModelKind::RR:
      if (spec.juvenile_split) {
        write_matrix(d.recoveries_juvenile, dir / "recoveries_juvenile.csv");
        write_matrix(d.recoveries_adult, dir / "recoveries_adult.csv");
        write_counts(d.marked_juvenile, dir / "markings_juvenile.csv");
        write_counts(d.marked_adult, dir / "markings_adult.csv");
        put("recoveries_juvenile", "recoveries_juvenile.csv");
        put("recoveries_adult", "recoveries_adult.csv");
        put("markings_juvenile", "markings_juvenile.csv");
        put("markings_adult", "markings_adult.csv");
      } else {
        write_matrix(d.recoveries, dir / "recoveries.csv");
        write_counts(d.marked, dir / "markings.csv");
        put("recoveries", "recoveries.csv");
        put("markings", "markings.csv");
      }
      break;
    case ModelKind::HierCounts:
    case ModelKind::LongSeriesOPT: {
      auto out = open_out(dir / "counts_manifest.txt");
      for (std::size_t s = 0; s < d.counts.size(); ++s) {
        std::string name = "counts_" + std::to_string(s + 1) + ".csv";
        write_counts(d.counts[s], dir / name);
        out << name << "\n";
      }
      put("counts_manifest", "counts_manifest.txt");
      break;
    }
  }
  return e;
}

void write_traces(const Draws& draws, const fs::path& path) {
  auto out = open_out(path);
  out << "chain,draw";
  for (const auto& n : draws.names) out << "," << n;
  out << "\n";
  for (std::size_t c = 0; c < draws.chains.size(); ++c)
    for (std::size_t i = 0; i < draws.chains[c].rows.size(); ++i) {
      out << c + 1 << "," << i + 1;
      for (double v : draws.chains[c].rows[i]) out << "," << format_double(v);
      out << "\n";
    }
}

Draws read_traces(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, 0, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, 0, "empty trace file");
  auto head = split_fields(line);
  if (head.size() < 2 || head[0] != "chain" || head[1] != "draw") fail(path, 1, 1, "header must start with chain,draw");
  Draws d;
  d.names.assign(head.begin() + 2, head.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != head.size()) fail(path, lineno, 0, "expected " + std::to_string(head.size()) + " fields");
    auto chain = to_int(path, lineno, 1, f[0]);
    if (chain < 1) fail(path, lineno, 1, "chain index must be >= 1");
    if (static_cast<std::size_t>(chain) > d.chains.size()) d.chains.resize(chain);
    std::vector<double> row;
    for (std::size_t c = 2; c < f.size(); ++c) row.push_back(to_double(path, lineno, c + 1, f[c]));
    d.chains[chain - 1].rows.push_back(std::move(row));
  }
  d.provenance.chains = static_cast<int>(d.chains.size());
  return d;
}

void write_summary(const Draws& draws, const Diagnostics& diag, const fs::path& path) {
  const Provenance& p = draws.provenance;
  json j;
  j["provenance"] = {{"seed", p.seed},           {"chains", p.chains}, {"threads", p.threads},
                     {"iterations", p.iterations}, {"burn_in", p.burn_in}, {"thin", p.thin},
                     {"model", p.model},         {"version", p.version}, {"config_hash", p.config_hash}};
  j["parameters"] = json::array();
  for (const auto& s : diag.params)
    j["parameters"].push_back({{"name", s.name},
                               {"mean", s.mean},
                               {"sd", s.sd},
                               {"q2.5", s.q025},
                               {"q50", s.q50},
                               {"q97.5", s.q975},
                               {"ess", s.ess},
                               {"rhat", s.rhat},
                               {"degenerate", s.degenerate}});
  j["kernels"] = json::array();
  for (const auto& k : diag.kernels)
    j["kernels"].push_back({{"name", k.name},
                            {"metropolis", k.metropolis},
                            {"proposals", k.proposals},
                            {"accepted", k.accepted},
                            {"acceptance", k.rate}});
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<fs::path> write_plot_data(const Diagnostics& diag, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& c : diag.curves) {
    fs::path p = dir / ("plot_" + c.prefix + ".csv");
    auto out = open_out(p);
    out << "x,mean,lower,upper\n";
    for (std::size_t i = 0; i < c.x.size(); ++i)
      out << format_double(c.x[i]) << "," << format_double(c.mean[i]) << "," << format_double(c.lower[i]) << ","
          << format_double(c.upper[i]) << "\n";
    files.push_back(p);
  }
  return files;
}

void write_truth(const SimTruth& truth, const fs::path& path) {
  json j = json::object();
  for (const auto& [k, v] : truth.values) j[k] = v;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

SimTruth read_truth(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, 0, 0, "cannot open file");
  SimTruth t;
  try {
    json j = json::parse(in);
    for (auto it = j.begin(); it != j.end(); ++it) t.values[it.key()] = it.value().get<double>();
  } catch (const json::exception& e) {
    fail(path, 0, 0, e.what());
  }
  return t;
}

}  // namespace ptree
