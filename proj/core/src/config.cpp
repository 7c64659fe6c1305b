#include "ptree/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ptree {

namespace {

const std::vector<SchemaEntry> kSchema = {
    {"model", "string", "CJS | JointCRCD | RR | HierCounts | LongSeriesOPT"},
    {"partition", "string", "optional; must match the model's partition (FLP, EEBP, RRBiv, NestedPeriod)"},
    {"times", "reals", "occasion times t_1..t_K"},
    {"occasions", "int", "K, used with start/spacing when times is absent"},
    {"start", "real", "time of the first occasion (default 1)"},
    {"spacing", "real", "gap between occasions (default 1)"},
    {"constraint", "string", "CJS tie mode: constant | age | time | unconstrained"},
    {"detection_a", "real", "Beta prior on detection-type probabilities"},
    {"detection_b", "real", ""},
    {"split_a", "real", "Beta prior on CJS split variables"},
    {"split_b", "real", ""},
    {"dirichlet_alpha", "real", "symmetric Beta on open-population splits"},
    {"tie_exit", "bool", "share exit splits across entry cells"},
    {"intensity_shape", "real", "Gamma prior on the Poisson intensity"},
    {"intensity_rate", "real", ""},
    {"intensity_mean", "real", "alternative to shape/rate, with intensity_variance"},
    {"intensity_variance", "real", ""},
    {"resight", "bool", "JointCRCD resighting variant"},
    {"unmarked_intensity_shape", "real", ""},
    {"unmarked_intensity_rate", "real", ""},
    {"U", "int", "ring-recovery age bound"},
    {"juvenile_split", "bool", "separate juvenile and adult recoveries"},
    {"hyper_lo", "real", "bounds of the uniform prior on the LOS Beta parameters"},
    {"hyper_hi", "real", ""},
    {"rr_exit_concentration", "real", "Dirichlet mass of within-LOS splits"},
    {"hlpt_sigma", "real", "spread of per-dataset logistic coefficients"},
    {"hlpt_tau", "real", "spread of shared node means"},
    {"entry_location_mean", "real", "HierCounts Laplace entry centring prior"},
    {"entry_location_sd", "real", ""},
    {"entry_scale_shape", "real", ""},
    {"entry_scale_rate", "real", ""},
    {"exit_location_mean", "real", "HierCounts Laplace exit centring prior"},
    {"exit_location_sd", "real", ""},
    {"exit_scale_shape", "real", ""},
    {"exit_scale_rate", "real", ""},
    {"periods", "ints", "nested period lengths K_1, K_2, ..."},
    {"seasons", "int", "number of 0-periods"},
    {"rho", "real", "prior stop probability"},
    {"gp_sigma0", "real", "GP amplitude over period means"},
    {"gp_length", "real", "GP length scale"},
    {"centre_entry_mean", "real", "long-series centring, finest units"},
    {"centre_entry_sd", "real", ""},
    {"centre_exit_mean", "real", ""},
    {"centre_exit_sd", "real", ""},
    {"iterations", "int", "sweeps after burn-in"},
    {"burn_in", "int", "adaptation sweeps, discarded"},
    {"thin", "int", "keep every thin-th sweep"},
    {"chains", "int", ""},
    {"seed", "uint", "master seed"},
    {"threads", "int", "chains run concurrently"},
    {"histories", "string", "capture histories CSV"},
    {"counts", "string", "single count series CSV"},
    {"counts_manifest", "string", "one count CSV path per line"},
    {"recoveries", "string", "K x K recovery matrix CSV"},
    {"markings", "string", "markings per year CSV"},
    {"recoveries_juvenile", "string", ""},
    {"recoveries_adult", "string", ""},
    {"markings_juvenile", "string", ""},
    {"markings_adult", "string", ""},
    {"resight_1", "string", "channel 1 sighting histories CSV"},
    {"resight_2", "string", "channel 2 sighting histories CSV"},
    {"output", "string", "output directory"},
    {"sim_seed", "uint", "seed for the simulate subcommand"},
    {"truth_phi", "reals", "CJS survival per tie class, RR survival by age"},
    {"truth_p", "real", ""},
    {"truth_releases", "ints", "CJS first captures per occasion"},
    {"truth_law", "string", "laplace | normal | uniform; one value, or a comma list per dataset / season"},
    {"truth_entry_loc", "reals", "one value, or one per dataset / season"},
    {"truth_entry_scale", "reals", ""},
    {"truth_exit_loc", "reals", ""},
    {"truth_exit_scale", "reals", ""},
    {"truth_N", "int", ""},
    {"truth_p_capture", "real", ""},
    {"truth_p_count", "real", ""},
    {"truth_N_marked", "int", ""},
    {"truth_N_unmarked", "int", ""},
    {"truth_p_r", "real", ""},
    {"truth_p_c", "real", ""},
    {"truth_lambda", "real", ""},
    {"truth_marked", "ints", ""},
    {"truth_omegas", "reals", "HierCounts intensity per dataset"},
    {"truth_ps", "reals", "HierCounts detection per dataset"},
    {"truth_omega", "real", "LongSeriesOPT intensity"},
};

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class Reader {
 public:
  Reader(std::map<std::string, std::string> e, std::string source) : e_(std::move(e)), src_(std::move(source)) {}

  bool has(const std::string& k) const { return e_.count(k) > 0; }

  [[noreturn]] void bad(const std::string& k, const std::string& why) const {
    throw ConfigError(src_ + ": key '" + k + "': " + why);
  }

  std::string str(const std::string& k, const std::string& d = "") const { return has(k) ? e_.at(k) : d; }

  double real(const std::string& k, double d) const { return has(k) ? parse_real(k, e_.at(k)) : d; }

  std::int64_t integer(const std::string& k, std::int64_t d) const { return has(k) ? parse_int(k, e_.at(k)) : d; }

  std::uint64_t uinteger(const std::string& k, std::uint64_t d) const {
    if (!has(k)) return d;
    std::uint64_t v = 0;
    const std::string& s = e_.at(k);
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad(k, "expected a non-negative integer, got '" + s + "'");
    return v;
  }

  bool boolean(const std::string& k, bool d) const {
    if (!has(k)) return d;
    const std::string& s = e_.at(k);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(k, "expected true or false, got '" + s + "'");
  }

  std::vector<double> reals(const std::string& k) const {
    std::vector<double> out;
    for (const auto& p : split(k)) out.push_back(parse_real(k, p));
    return out;
  }

  std::vector<std::int64_t> ints(const std::string& k) const {
    std::vector<std::int64_t> out;
    for (const auto& p : split(k)) out.push_back(parse_int(k, p));
    return out;
  }

  void check_type(const std::string& k, const std::string& type) const {
    if (type == "real") (void)real(k, 0);
    else if (type == "int") (void)integer(k, 0);
    else if (type == "uint") (void)uinteger(k, 0);
    else if (type == "bool") (void)boolean(k, false);
    else if (type == "reals") (void)reals(k);
    else if (type == "ints") (void)ints(k);
  }

 private:
  std::vector<std::string> split(const std::string& k) const {
    std::vector<std::string> out;
    std::stringstream ss(e_.at(k));
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(trim(part));
    if (out.empty()) bad(k, "empty list");
    return out;
  }

  double parse_real(const std::string& k, const std::string& s) const {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      bad(k, "expected a number, got '" + s + "'");
    return v;
  }

  std::int64_t parse_int(const std::string& k, const std::string& s) const {
    std::int64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad(k, "expected an integer, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> e_;
  std::string src_;
};

std::vector<BivariateLaw> laws_from(const Reader& r, std::size_t n) {
  std::vector<BivariateLaw::Kind> kinds;
  std::stringstream ss(r.str("truth_law", "laplace"));
  for (std::string k; std::getline(ss, k, ',');) {
    k.erase(0, k.find_first_not_of(" \t"));
    k.erase(k.find_last_not_of(" \t") + 1);
    if (k == "laplace") kinds.push_back(BivariateLaw::Kind::Laplace);
    else if (k == "normal") kinds.push_back(BivariateLaw::Kind::Normal);
    else if (k == "uniform") kinds.push_back(BivariateLaw::Kind::Uniform);
    else r.bad("truth_law", "expected laplace, normal or uniform, got '" + k + "'");
  }
  if (kinds.size() == 1) kinds.assign(n, kinds[0]);
  if (kinds.size() != n) r.bad("truth_law", "expected 1 or " + std::to_string(n) + " values");
  auto pick = [&](const char* key, double d) {
    std::vector<double> v = r.has(key) ? r.reals(key) : std::vector<double>{d};
    if (v.size() == 1) v.assign(n, v[0]);
    if (v.size() != n) r.bad(key, "expected 1 or " + std::to_string(n) + " values");
    return v;
  };
  auto el = pick("truth_entry_loc", 0.0), es = pick("truth_entry_scale", 1.0);
  auto xl = pick("truth_exit_loc", 1.0), xs = pick("truth_exit_scale", 1.0);
  std::vector<BivariateLaw> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {kinds[i], el[i], es[i], xl[i], xs[i]};
  return out;
}

}  // namespace

const std::vector<SchemaEntry>& config_schema() { return kSchema; }

const char* default_partition(ModelKind kind) {
  switch (kind) {
    case ModelKind::CJS: return "FLP";
    case ModelKind::JointCRCD: return "EEBP";
    case ModelKind::RR: return "RRBiv";
    case ModelKind::HierCounts: return "EEBP";
    case ModelKind::LongSeriesOPT: return "NestedPeriod";
  }
  return "?";
}

std::string Config::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : format_config(entries)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_config(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

Config parse_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
  std::map<std::string, const SchemaEntry*> schema;
  for (const auto& s : kSchema) schema[s.key] = &s;

  std::map<std::string, std::string> entries;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!schema.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    if (!entries.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }

  Reader r(entries, source);
  for (const auto& [k, v] : entries) r.check_type(k, schema[k]->type);
  if (!r.has("model")) throw ConfigError(source + ": missing required key 'model'");

  Config c;
  c.entries = entries;
  ModelKind kind;
  try {
    kind = parse_model_kind(r.str("model"));
  } catch (const std::invalid_argument& e) {
    r.bad("model", e.what());
  }

  std::vector<double> times;
  if (r.has("times")) {
    times = r.reals("times");
  } else if (r.has("occasions")) {
    auto K = r.integer("occasions", 0);
    if (K < 2) r.bad("occasions", "need at least 2");
    double t0 = r.real("start", 1.0), dt = r.real("spacing", 1.0);
    for (std::int64_t j = 0; j < K; ++j) times.push_back(t0 + dt * static_cast<double>(j));
  } else if (kind != ModelKind::LongSeriesOPT) {
    throw ConfigError(source + ": give either 'times' or 'occasions'");
  }

  ModelSpec& s = c.spec;
  s = ModelSpec::defaults(kind, times);
  c.partition = r.str("partition", default_partition(kind));
  if (c.partition != default_partition(kind))
    r.bad("partition", std::string("model ") + model_kind_name(kind) + " uses " + default_partition(kind));
  if (r.has("constraint")) {
    try {
      s.constraint = parse_cjs_constraint(r.str("constraint"));
    } catch (const std::invalid_argument& e) {
      r.bad("constraint", e.what());
    }
  }
  s.detection = {r.real("detection_a", s.detection.a), r.real("detection_b", s.detection.b)};
  s.split = {r.real("split_a", s.split.a), r.real("split_b", s.split.b)};
  s.dirichlet_alpha = r.real("dirichlet_alpha", s.dirichlet_alpha);
  s.tie_exit = r.boolean("tie_exit", s.tie_exit);
  if (r.has("intensity_mean") || r.has("intensity_variance")) {
    if (!r.has("intensity_mean") || !r.has("intensity_variance"))
      r.bad("intensity_mean", "intensity_mean and intensity_variance go together");
    if (r.has("intensity_shape") || r.has("intensity_rate"))
      r.bad("intensity_mean", "give either mean/variance or shape/rate");
    double m = r.real("intensity_mean", 1), v = r.real("intensity_variance", 1);
    if (!(m > 0 && v > 0)) r.bad("intensity_mean", "mean and variance must be positive");
    s.intensity = GammaPrior::from_mean_variance(m, v);
  } else {
    s.intensity = {r.real("intensity_shape", s.intensity.shape), r.real("intensity_rate", s.intensity.rate)};
  }
  s.resight = r.boolean("resight", s.resight);
  s.intensity_unmarked = {r.real("unmarked_intensity_shape", s.intensity_unmarked.shape),
                          r.real("unmarked_intensity_rate", s.intensity_unmarked.rate)};
  s.U = static_cast<int>(r.integer("U", s.U));
  s.juvenile_split = r.boolean("juvenile_split", s.juvenile_split);
  s.hyper_lo = r.real("hyper_lo", s.hyper_lo);
  s.hyper_hi = r.real("hyper_hi", s.hyper_hi);
  s.rr_exit_concentration = r.real("rr_exit_concentration", s.rr_exit_concentration);
  s.hlpt_sigma = r.real("hlpt_sigma", s.hlpt_sigma);
  s.hlpt_tau = r.real("hlpt_tau", s.hlpt_tau);
  auto laplace = [&](const std::string& p, LaplacePrior& lp) {
    lp.location_mean = r.real(p + "_location_mean", lp.location_mean);
    lp.location_sd = r.real(p + "_location_sd", lp.location_sd);
    lp.scale_shape = r.real(p + "_scale_shape", lp.scale_shape);
    lp.scale_rate = r.real(p + "_scale_rate", lp.scale_rate);
  };
  laplace("entry", s.entry_prior);
  laplace("exit", s.exit_prior);
  if (r.has("periods")) {
    s.nested.period_lengths.clear();
    for (auto v : r.ints("periods")) s.nested.period_lengths.push_back(static_cast<int>(v));
  }
  s.nested.zero_periods = static_cast<int>(r.integer("seasons", s.nested.zero_periods));
  s.rho = r.real("rho", s.rho);
  s.gp_sigma0 = r.real("gp_sigma0", s.gp_sigma0);
  s.gp_length = r.real("gp_length", s.gp_length);
  s.centre_entry_mean = r.real("centre_entry_mean", s.centre_entry_mean);
  s.centre_entry_sd = r.real("centre_entry_sd", s.centre_entry_sd);
  s.centre_exit_mean = r.real("centre_exit_mean", s.centre_exit_mean);
  s.centre_exit_sd = r.real("centre_exit_sd", s.centre_exit_sd);
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }

  RunConfig& run = c.run;
  run.iterations = r.integer("iterations", run.iterations);
  run.burn_in = r.integer("burn_in", run.burn_in);
  run.thin = r.integer("thin", run.thin);
  run.chains = static_cast<int>(r.integer("chains", run.chains));
  run.seed = r.uinteger("seed", run.seed);
  run.threads = static_cast<int>(r.integer("threads", run.threads));
  try {
    run.validate();
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }

  auto path = [&](const char* k) -> std::filesystem::path {
    if (!r.has(k)) return {};
    std::filesystem::path p = r.str(k);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  DataPaths& d = c.data;
  d.histories = path("histories");
  d.counts = path("counts");
  d.counts_manifest = path("counts_manifest");
  d.recoveries = path("recoveries");
  d.markings = path("markings");
  d.recoveries_juvenile = path("recoveries_juvenile");
  d.recoveries_adult = path("recoveries_adult");
  d.markings_juvenile = path("markings_juvenile");
  d.markings_adult = path("markings_adult");
  d.resight_1 = path("resight_1");
  d.resight_2 = path("resight_2");
  if (r.has("output")) c.output = path("output");

  c.sim_seed = r.uinteger("sim_seed", 1);
  TruthParams& t = c.truth;
  if (r.has("truth_phi")) t.phi = r.reals("truth_phi");
  t.p = r.real("truth_p", t.p);
  if (r.has("truth_releases")) t.releases = r.ints("truth_releases");
  t.N = r.integer("truth_N", t.N);
  t.p_capture = r.real("truth_p_capture", t.p_capture);
  t.p_count = r.real("truth_p_count", t.p_count);
  t.N_marked = r.integer("truth_N_marked", t.N_marked);
  t.N_unmarked = r.integer("truth_N_unmarked", t.N_unmarked);
  t.p_r = r.real("truth_p_r", t.p_r);
  t.p_c = r.real("truth_p_c", t.p_c);
  t.lambda = r.real("truth_lambda", t.lambda);
  if (r.has("truth_marked")) t.marked = r.ints("truth_marked");
  if (r.has("truth_omegas")) t.omegas = r.reals("truth_omegas");
  if (r.has("truth_ps")) t.ps = r.reals("truth_ps");
  t.omega = r.real("truth_omega", t.omega);
  std::size_t n_laws = 1;
  if (kind == ModelKind::HierCounts) n_laws = std::max<std::size_t>(t.omegas.size(), 1);
  if (kind == ModelKind::LongSeriesOPT) n_laws = static_cast<std::size_t>(s.nested.zero_periods);
  auto laws = laws_from(r, n_laws);
  t.law = laws[0];
  if (kind == ModelKind::HierCounts || kind == ModelKind::LongSeriesOPT) t.laws = laws;
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

}  // namespace ptree
