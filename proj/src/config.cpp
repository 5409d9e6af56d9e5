#include "rmsa/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rmsa/error.hpp"

namespace rmsa {

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::Episode: return "ep";
    case RunMode::Window: return "flx";
    case RunMode::ShortestPathFirstFit: return "spff";
    case RunMode::KShortestPathFirstFit: return "kspff";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "ep") return RunMode::Episode;
  if (s == "flx") return RunMode::Window;
  if (s == "spff") return RunMode::ShortestPathFirstFit;
  if (s == "kspff") return RunMode::KShortestPathFirstFit;
  throw ConfigError("mode", "expected ep|flx|spff|kspff, got '" + s + "'");
}

bool is_learning(RunMode m) { return m == RunMode::Episode || m == RunMode::Window; }

TrafficConfig RunConfig::traffic() const {
  return {arrival_rate, mean_duration, bandwidth_min, bandwidth_max, seed};
}

EnvConfig RunConfig::env() const {
  EnvConfig e;
  e.traffic = traffic();
  e.j_blocks = j_blocks;
  e.c_grid_bpsk = c_grid_bpsk;
  e.history = static_cast<std::size_t>(std::max<std::int64_t>(blocking_window, 1));
  return e;
}

TrainingConfig RunConfig::training() const {
  TrainingConfig t;
  t.gamma = gamma;
  t.alpha = alpha;
  t.batch = batch;
  t.adam = {learning_rate, adam_beta1, adam_beta2, adam_epsilon, grad_norm_cap};
  t.entropy_sign = entropy_sign == "literal" ? EntropySign::Literal : EntropySign::Bonus;
  t.workers = workers;
  t.mode = mode == RunMode::Episode ? TrainingMode::Episode : TrainingMode::Window;
  t.epochs = epochs;
  t.seed = seed;
  t.hidden_layers = hidden_layers;
  t.hidden_width = hidden_width;
  t.metrics_interval = metrics_interval;
  t.checkpoint_interval = checkpoint_interval;
  t.blocking_window = static_cast<std::size_t>(blocking_window);
  return t;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_num(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + text + "'");
  return v;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field num_field(T RunConfig::*member, const std::string& key) {
  return {[member, key](RunConfig& c, const std::string& v) { c.*member = parse_num<T>(key, v); },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt_double(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

Field str_field(std::string RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

// Declaration order is the serialization order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"topology", str_field(&RunConfig::topology)},
      {"slots", num_field(&RunConfig::slots, "slots")},
      {"arrival_rate", num_field(&RunConfig::arrival_rate, "arrival_rate")},
      {"mean_duration", num_field(&RunConfig::mean_duration, "mean_duration")},
      {"bandwidth_min", num_field(&RunConfig::bandwidth_min, "bandwidth_min")},
      {"bandwidth_max", num_field(&RunConfig::bandwidth_max, "bandwidth_max")},
      {"seed", num_field(&RunConfig::seed, "seed")},
      {"k_paths", num_field(&RunConfig::k_paths, "k_paths")},
      {"j_blocks", num_field(&RunConfig::j_blocks, "j_blocks")},
      {"reach_16qam", num_field(&RunConfig::reach_16qam, "reach_16qam")},
      {"reach_8qam", num_field(&RunConfig::reach_8qam, "reach_8qam")},
      {"reach_qpsk", num_field(&RunConfig::reach_qpsk, "reach_qpsk")},
      {"c_grid_bpsk", num_field(&RunConfig::c_grid_bpsk, "c_grid_bpsk")},
      {"hidden_layers", num_field(&RunConfig::hidden_layers, "hidden_layers")},
      {"hidden_width", num_field(&RunConfig::hidden_width, "hidden_width")},
      {"gamma", num_field(&RunConfig::gamma, "gamma")},
      {"alpha", num_field(&RunConfig::alpha, "alpha")},
      {"batch", num_field(&RunConfig::batch, "batch")},
      {"learning_rate", num_field(&RunConfig::learning_rate, "learning_rate")},
      {"adam_beta1", num_field(&RunConfig::adam_beta1, "adam_beta1")},
      {"adam_beta2", num_field(&RunConfig::adam_beta2, "adam_beta2")},
      {"adam_epsilon", num_field(&RunConfig::adam_epsilon, "adam_epsilon")},
      {"grad_norm_cap", num_field(&RunConfig::grad_norm_cap, "grad_norm_cap")},
      {"entropy_sign", str_field(&RunConfig::entropy_sign)},
      {"workers", num_field(&RunConfig::workers, "workers")},
      {"mode",
       {[](RunConfig& c, const std::string& v) { c.mode = parse_run_mode(v); },
        [](const RunConfig& c) { return to_string(c.mode); }}},
      {"epochs", num_field(&RunConfig::epochs, "epochs")},
      {"requests", num_field(&RunConfig::requests, "requests")},
      {"checkpoint_interval", num_field(&RunConfig::checkpoint_interval, "checkpoint_interval")},
      {"metrics_interval", num_field(&RunConfig::metrics_interval, "metrics_interval")},
      {"blocking_window", num_field(&RunConfig::blocking_window, "blocking_window")},
      {"out", str_field(&RunConfig::out)},
      {"checkpoint", str_field(&RunConfig::checkpoint)},
  };
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void validate_config(const RunConfig& c) {
  require(!c.topology.empty(), "topology", "must name a topology file");
  require(c.slots >= 1, "slots", "must be >= 1");
  require(c.arrival_rate > 0, "arrival_rate", "must be > 0");
  require(c.mean_duration > 0, "mean_duration", "must be > 0");
  require(c.bandwidth_min > 0, "bandwidth_min", "must be > 0");
  require(c.bandwidth_max >= c.bandwidth_min, "bandwidth_max", "must be >= bandwidth_min");
  require(c.k_paths >= 1, "k_paths", "must be >= 1");
  require(c.j_blocks >= 1, "j_blocks", "must be >= 1");
  require(c.reach_16qam > 0 && c.reach_16qam <= c.reach_8qam, "reach_16qam", "must be > 0 and <= reach_8qam");
  require(c.reach_8qam <= c.reach_qpsk, "reach_8qam", "must be <= reach_qpsk");
  require(c.c_grid_bpsk > 0, "c_grid_bpsk", "must be > 0");
  require(c.requests >= 0, "requests", "must be >= 0");
  require(c.metrics_interval >= 1, "metrics_interval", "must be >= 1");
  require(c.blocking_window >= 1, "blocking_window", "must be >= 1");
  require(!c.out.empty(), "out", "must name an output directory");
  if (!is_learning(c.mode)) return;
  require(c.hidden_layers >= 0, "hidden_layers", "must be >= 0");
  require(c.hidden_width >= 1, "hidden_width", "must be >= 1");
  require(c.gamma >= 0 && c.gamma <= 1, "gamma", "must be in [0,1]");
  require(c.alpha >= 0, "alpha", "must be >= 0");
  require(c.batch >= 1, "batch", "must be >= 1");
  require(c.learning_rate > 0, "learning_rate", "must be > 0");
  require(c.adam_beta1 >= 0 && c.adam_beta1 < 1, "adam_beta1", "must be in [0,1)");
  require(c.adam_beta2 >= 0 && c.adam_beta2 < 1, "adam_beta2", "must be in [0,1)");
  require(c.adam_epsilon > 0, "adam_epsilon", "must be > 0");
  require(c.grad_norm_cap >= 0, "grad_norm_cap", "must be >= 0");
  require(c.entropy_sign == "bonus" || c.entropy_sign == "literal", "entropy_sign", "expected bonus|literal");
  require(c.workers >= 1, "workers", "must be >= 1");
  require(c.epochs >= 0, "epochs", "must be >= 0");
  require(c.checkpoint_interval >= 0, "checkpoint_interval", "must be >= 0");
}

RunConfig parse_config(std::istream& in) {
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index.emplace(k, &f);

  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError(key, "unknown key (line " + std::to_string(line_no) + ")");
    it->second->set(cfg, value);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  RunConfig cfg = parse_config(in);
  const std::filesystem::path topo(cfg.topology);
  if (topo.is_relative() && !std::filesystem::exists(topo)) {
    const auto alt = path.parent_path() / topo;
    if (std::filesystem::exists(alt)) cfg.topology = alt.string();
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, f] : fields()) out += key + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace rmsa
