#include "rmsa/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rmsa/error.hpp"

namespace fs = std::filesystem;

namespace rmsa {

namespace {

struct Network {
  Topology topo;
  PathTable paths;
};

Network load_network(const RunConfig& cfg) {
  Topology topo = load_topology_file(cfg.topology, cfg.slots);
  PathTable paths(topo, cfg.k_paths, cfg.reach());
  return {std::move(topo), std::move(paths)};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_summary_file(const fs::path& path, const RunConfig& cfg, const RunSummary& s) {
  auto out = open_out(path);
  out << "mode: " << s.mode << "\n"
      << "topology: " << cfg.topology << "\n"
      << "seed: " << cfg.seed << "\n"
      << "epochs: " << s.epochs << "\n"
      << "requests: " << s.requests << "\n"
      << "blocked: " << s.blocked << "\n"
      << "blocking_probability: " << fixed(s.blocking_probability) << "\n"
      << "trailing_blocking: " << fixed(s.trailing_blocking) << "\n";
}

RunSummary run_train(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (!is_learning(cfg.mode)) throw ConfigError("mode", "train needs mode ep or flx");
  const Network net = load_network(cfg);
  fs::create_directories(cfg.out);
  const fs::path out_dir(cfg.out);

  auto csv = open_out(out_dir / "metrics.csv");
  MetricsLog metrics(&csv);
  WorkerContext ctx;
  ctx.topology = &net.topo;
  ctx.paths = &net.paths;
  ctx.env = cfg.env();
  ctx.cfg = cfg.training();
  ctx.features = make_feature_config(net.topo, net.paths, ctx.env, ctx.cfg.mode);
  ctx.metrics = &metrics;

  auto save = [&](std::int64_t epoch, const ParamSet& p) {
    save_checkpoint(p, out_dir / ("checkpoint-" + std::to_string(epoch)));
  };
  log << "training " << to_string(cfg.mode) << " on " << cfg.topology << ": " << cfg.workers
      << " workers, " << cfg.epochs << " epochs, state size " << state_size(ctx.features) << "\n";
  const TrainingResult res = run_training(ctx, save);
  save(res.epochs, res.params);

  RunSummary s;
  s.mode = to_string(cfg.mode);
  s.epochs = res.epochs;
  for (const auto& w : res.workers) {
    s.requests += w.requests;
    s.blocked += w.blocked;
  }
  s.blocking_probability = s.requests ? static_cast<double>(s.blocked) / static_cast<double>(s.requests) : 0.0;
  s.trailing_blocking = res.trailing_blocking();
  write_summary_file(out_dir / "summary.txt", cfg, s);
  log << "epochs " << s.epochs << ", requests " << s.requests << ", blocking " << fixed(s.blocking_probability)
      << ", trailing blocking " << fixed(s.trailing_blocking) << "\n";
  return s;
}

PolicyRunResult run_heuristic(RmsaEnv& env, RunMode mode, std::int64_t requests, MetricsLog* metrics,
                              int metrics_interval) {
  if (is_learning(mode)) throw ConfigError("mode", "baseline needs mode spff or kspff");
  PolicyRunResult res;
  std::int64_t interval_blocked = 0;
  double interval_reward = 0.0;
  for (std::int64_t i = 0; i < requests; ++i) {
    const Request& req = env.next_request();
    const ProvisionOutcome out = mode == RunMode::ShortestPathFirstFit ? env.sp_ff(req) : env.ksp_ff(req);
    ++res.requests;
    interval_reward += out.reward;
    if (!out.accepted) {
      ++res.blocked;
      ++interval_blocked;
    }
    if (metrics && res.requests % metrics_interval == 0) {
      MetricsRow row;
      row.requests_total = res.requests;
      row.requests_blocked = res.blocked;
      row.cum_reward = interval_reward;
      row.blocking_prob = static_cast<double>(interval_blocked) / metrics_interval;
      metrics->append(row);
      interval_blocked = 0;
      interval_reward = 0.0;
    }
  }
  return res;
}

RunSummary run_baseline(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (is_learning(cfg.mode)) throw ConfigError("mode", "baseline needs mode spff or kspff");
  const Network net = load_network(cfg);
  fs::create_directories(cfg.out);
  const fs::path out_dir(cfg.out);
  auto csv = open_out(out_dir / "metrics.csv");
  MetricsLog metrics(&csv);

  RmsaEnv env(net.topo, net.paths, cfg.env());
  const PolicyRunResult r = run_heuristic(env, cfg.mode, cfg.requests, &metrics, cfg.metrics_interval);

  RunSummary s;
  s.mode = to_string(cfg.mode);
  s.requests = r.requests;
  s.blocked = r.blocked;
  s.blocking_probability = r.blocking_probability();
  if (r.requests > 0) s.trailing_blocking = env.stats().blocking_probability(static_cast<std::size_t>(cfg.blocking_window));
  write_summary_file(out_dir / "summary.txt", cfg, s);
  log << s.mode << ": " << s.requests << " requests, " << s.blocked << " blocked, blocking probability "
      << fixed(s.blocking_probability) << "\n";
  return s;
}

namespace {

fs::path newest_checkpoint(const fs::path& dir) {
  std::optional<std::pair<long long, fs::path>> best;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("checkpoint-", 0) != 0) continue;
      try {
        std::size_t used = 0;
        const std::string tail = name.substr(11);
        const long long epoch = std::stoll(tail, &used);
        if (used != tail.size()) continue;
        if (!best || epoch > best->first) best = {epoch, entry.path()};
      } catch (const std::exception&) {
      }
    }
  }
  if (!best) throw Error("no checkpoint found in " + dir.string());
  return best->second;
}

}  // namespace

RunSummary run_eval(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  const fs::path out_dir(cfg.out);
  const fs::path ckpt = cfg.checkpoint.empty() ? newest_checkpoint(out_dir) : fs::path(cfg.checkpoint);
  if (!fs::exists(ckpt)) throw Error("checkpoint not found: " + ckpt.string());
  const ParamSet params = load_checkpoint(ckpt);
  const Network net = load_network(cfg);
  const EnvConfig env_cfg = cfg.env();

  // The checkpoint's input width tells which state layout it was trained on.
  FeatureConfig fc = make_feature_config(net.topo, net.paths, env_cfg, TrainingMode::Window);
  if (params.policy.input_size() == state_size(fc) + 1) fc.mode = TrainingMode::Episode;
  if (params.policy.input_size() != state_size(fc) ||
      params.policy.output_size() != static_cast<std::size_t>(cfg.k_paths * cfg.j_blocks))
    throw Error("checkpoint " + ckpt.string() + " does not match the configured topology, K and J");

  fs::create_directories(out_dir);
  auto csv = open_out(out_dir / "eval-metrics.csv");
  MetricsLog metrics(&csv);
  RmsaEnv env(net.topo, net.paths, env_cfg);
  const FeatureEncoder encoder(fc);
  const PolicyRunResult r =
      run_policy(params, env, encoder, cfg.requests, true, cfg.batch, cfg.seed, &metrics, cfg.metrics_interval);

  RunSummary s;
  s.mode = "eval-" + std::string(fc.mode == TrainingMode::Episode ? "ep" : "flx");
  s.epochs = params.adam.step;
  s.requests = r.requests;
  s.blocked = r.blocked;
  s.blocking_probability = r.blocking_probability();
  if (r.requests > 0) s.trailing_blocking = env.stats().blocking_probability(static_cast<std::size_t>(cfg.blocking_window));
  write_summary_file(out_dir / "eval-summary.txt", cfg, s);
  log << "eval " << ckpt.string() << ": " << s.requests << " requests, blocking probability "
      << fixed(s.blocking_probability) << "\n";
  return s;
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty metrics file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw ParseError(1, "unexpected metrics header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 9) throw ParseError(line_no, "expected 9 columns, got " + std::to_string(cells.size()));
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string& s) {
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      auto real = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      MetricsRow r;
      r.epoch = whole(cells[0]);
      r.worker = static_cast<int>(whole(cells[1]));
      r.requests_total = whole(cells[2]);
      r.requests_blocked = whole(cells[3]);
      r.cum_reward = real(cells[4]);
      r.blocking_prob = real(cells[5]);
      r.policy_loss = real(cells[6]);
      r.value_loss = real(cells[7]);
      r.entropy = real(cells[8]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed metrics row");
    }
  }
  if (rows.empty()) throw ParseError(line_no, "metrics file has no rows");
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_metrics_csv(in);
}

double final_window_blocking(const std::vector<MetricsRow>& rows, std::int64_t window) {
  if (rows.empty()) throw Error("no metrics rows");
  std::map<int, std::vector<const MetricsRow*>> by_worker;
  for (const auto& r : rows) by_worker[r.worker].push_back(&r);
  std::int64_t requests = 0, blocked = 0;
  for (auto& [w, list] : by_worker) {
    std::sort(list.begin(), list.end(),
              [](const MetricsRow* a, const MetricsRow* b) { return a->requests_total < b->requests_total; });
    const MetricsRow* last = list.back();
    // Newest row at least `window` requests before the end; the run start otherwise.
    std::int64_t r0 = 0, b0 = 0;
    for (auto it = list.rbegin() + 1; it != list.rend(); ++it) {
      if (last->requests_total - (*it)->requests_total >= window) {
        r0 = (*it)->requests_total;
        b0 = (*it)->requests_blocked;
        break;
      }
    }
    requests += last->requests_total - r0;
    blocked += last->requests_blocked - b0;
  }
  if (requests == 0) throw Error("metrics rows cover no requests");
  return static_cast<double>(blocked) / static_cast<double>(requests);
}

std::string summarize(const std::vector<SummaryInput>& inputs, std::int64_t window) {
  if (inputs.empty()) throw Error("summarize needs at least one metrics file");
  std::vector<double> blocking;
  for (const auto& in : inputs) {
    try {
      blocking.push_back(final_window_blocking(read_metrics_csv(in.metrics), window));
    } catch (const ParseError& e) {
      throw Error(in.metrics.string() + ": " + e.what());
    }
  }
  std::ostringstream out;
  char buf[160];
  const bool deltas = inputs.size() > 1;
  std::snprintf(buf, sizeof buf, "%-24s %16s", "run", "final_blocking");
  out << buf;
  if (deltas) out << "  reduction_vs_" << inputs.front().label;
  out << "\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-24s %16.6f", inputs[i].label.c_str(), blocking[i]);
    out << buf;
    if (deltas) {
      if (blocking.front() > 0.0) {
        std::snprintf(buf, sizeof buf, "  %+.1f%%", 100.0 * (blocking.front() - blocking[i]) / blocking.front());
        out << buf;
      } else {
        out << "  n/a";
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace rmsa
