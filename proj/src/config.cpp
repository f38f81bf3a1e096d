#include "sigwave/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace sigwave {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& name, const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(name + ": empty list entry");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError(name + ": list must not be empty");
  return out;
}

double parse_double(const std::string& name, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(name + ": expected a real number, got '" + v + "'");
  }
}

template <class T>
T parse_integer(const std::string& name, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(name + ": expected an integer, got '" + v + "'");
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"grid.n_grid", "32", "points per axis (even, >= 4)"},
      {"grid.m", "1.0", "mass m > 0"},
      {"truncation.M", "8", "analysis truncation: Wick constants and projections use |n| <= M"},
      {"dynamics.N", "4", "number of components of HLSM_N"},
      {"dynamics.R", "8", "number of replicas for mean-field expectations"},
      {"dynamics.dt", "0.01", "time step"},
      {"dynamics.T", "1.0", "time horizon"},
      {"dynamics.burn_in", "10.0", "convergence-rate: time the coupled pair runs before measurement"},
      {"dynamics.stride", "10", "record diagnostics every this many steps"},
      {"dynamics.dealias", "true", "two-thirds truncation of the nonlinearity"},
      {"dynamics.data", "zero", "initial residual: zero | gaussian | file"},
      {"dynamics.data_file", "", "snapshot file with N position records then N velocity records (data = file)"},
      {"dynamics.stationary", "false", "mean field: start the noise part from mu_1 x mu_0 (Phi) instead of zero"},
      {"gibbs.N", "4", "components sampled from the Gibbs measure"},
      {"gibbs.h", "0.06", "sampler step size"},
      {"gibbs.chain", "3000", "chain length, burn-in included"},
      {"gibbs.burnin", "1000", "discarded initial steps"},
      {"gibbs.thin", "10", "keep every this many post-burn-in states"},
      {"gibbs.samples", "500", "independent chains for the invariance check"},
      {"gibbs.interaction", "true", "false disables V (Gaussian target)"},
      {"gibbs.method", "pcnl", "pcnl | parabolic"},
      {"gibbs.T", "1.0", "evolution time for the invariance check"},
      {"gibbs.dt", "0.01", "time step for the invariance check"},
      {"experiment.N_list", "4,16,64,256", "ensemble sizes for rate experiments"},
      {"experiment.M_list", "4,8,16,32", "truncations for the commutator sweep"},
      {"experiment.reps", "10", "independent repetitions per ensemble size"},
      {"experiment.kind", "wick_square_avg", "lln-decay estimator: wick_square_avg | wick_triple_avg | wick_triple_avg_an"},
      {"experiment.s", "0.9", "regularity of the H^s norms (I-operator parameter for commutator)"},
      {"experiment.eps", "0.1", "W^{-eps,inf} exponent"},
      {"experiment.trials", "20", "random field pairs per M for the commutator sweep"},
      {"experiment.commutator_grid", "512", "grid for commutator products"},
      {"experiment.commutator_band", "64", "trial fields live on |k1|, |k2| <= band"},
      {"experiment.t_max", "30", "renorm-table horizon"},
      {"experiment.t_step", "0.5", "renorm-table spacing"},
      {"experiment.seed", "0", "root seed for every random stream"},
      {"output.dir", "out", "output directory"},
      {"output.formats", "csv", "csv or csv,snapshots"},
  };
  return keys;
}

std::string config_help() {
  std::ostringstream os;
  for (const auto& k : config_keys()) {
    os << "  " << std::left << std::setw(28) << (k.name + " = " + k.default_value) << k.help << '\n';
  }
  return os.str();
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, leaf] : body) cfg.set(section + "." + key, trim(leaf.data()));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return from_string(ss.str());
}

void ExperimentConfig::set(const std::string& name, const std::string& value) {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown config key '" + name + "'");
  it->second = value;
}

const std::string& ExperimentConfig::raw(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown config key '" + name + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& name) const { return parse_double(name, raw(name)); }

std::int64_t ExperimentConfig::get_int(const std::string& name) const {
  return parse_integer<std::int64_t>(name, raw(name));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& name) const {
  return parse_integer<std::uint64_t>(name, raw(name));
}

std::size_t ExperimentConfig::get_size(const std::string& name) const {
  return parse_integer<std::size_t>(name, raw(name));
}

bool ExperimentConfig::get_bool(const std::string& name) const {
  const std::string& v = raw(name);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(name + ": expected true or false, got '" + v + "'");
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& name) const {
  std::vector<double> out;
  for (const auto& item : split_list(name, raw(name))) out.push_back(parse_double(name, item));
  return out;
}

std::vector<std::size_t> ExperimentConfig::get_size_list(const std::string& name) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(name, raw(name))) out.push_back(parse_integer<std::size_t>(name, item));
  return out;
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_text()); }

void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs, const std::map<std::string, std::string>& extra) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.raw("experiment.seed");
  nlohmann::ordered_json conf;
  for (const auto& [k, v] : cfg.values()) conf[k] = v;
  j["config"] = conf;
  j["outputs"] = outputs;
  nlohmann::ordered_json ex;
  for (const auto& [k, v] : extra) ex[k] = v;
  j["results"] = ex;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
  os << j.dump(2) << '\n';
}

}  // namespace sigwave
