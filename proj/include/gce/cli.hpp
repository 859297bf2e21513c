// Copyright 2026 The Gestural Chart Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command line: serve, replay, gen, stats, validate.
// Exit codes: 0 success, 1 usage, 2 data error.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gce/server.hpp"
#include "gce/service.hpp"
#include "gce/session_io.hpp"

namespace gce {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Applies "key=value" overrides to a sensor model.
inline void apply_sensor_option(SensorModel& m, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw UsageError("--sensor expects key=value, got " + kv);
  const std::string key = kv.substr(0, eq);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(kv.substr(eq + 1), &used);
    if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
  } catch (const std::exception&) {
    throw UsageError("--sensor value is not a number: " + kv);
  }
  if (key == "jitter") m.jitter_std_m = value;
  else if (key == "latch") m.dropout_latch_frames = static_cast<int>(value);
  else if (key == "cone") m.occlusion_cone_deg = value;
  else if (key == "min_depth") m.min_depth_m = value;
  else if (key == "max_depth") m.max_depth_m = value;
  else if (key == "fov_h") m.fov_h_deg = value;
  else if (key == "fov_v") m.fov_v_deg = value;
  else throw UsageError("unknown --sensor key " + key);
}

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw DataError("cannot write " + path);
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::atomic<Server*> g_active_server{nullptr};

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Gestural chart engine: replay, generate, inspect and serve sessions", "gce"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the WebSocket session service");
  int port = 8765;
  std::string serve_dataset;
  bool serve_gen = false;
  std::uint64_t serve_seed = 0;
  std::string serve_log;
  serve->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  auto* ds_opt = serve->add_option("--dataset", serve_dataset, "Dataset JSON file");
  serve->add_flag("--gen", serve_gen, "Serve a generated dataset")->excludes(ds_opt);
  serve->add_option("--seed", serve_seed, "Generator and jitter seed");
  serve->add_option("--log", serve_log, "Directory for per-session event logs");

  // replay
  auto* rep = app.add_subcommand("replay", "Replay a trace into an event log");
  std::string rep_dataset, rep_trace, rep_out, rep_session = "replay";
  std::vector<std::string> rep_sensor;
  bool no_guard = false;
  std::uint64_t rep_seed = 0;
  rep->add_option("--dataset", rep_dataset, "Dataset JSON file")->required();
  rep->add_option("--trace", rep_trace, "Trace file (JSON lines)")->required();
  rep->add_option("--out", rep_out, "Log output file (default stdout)");
  rep->add_option("--sensor", rep_sensor, "Sensor override key=value (jitter, latch, cone, min_depth, max_depth, fov_h, fov_v)");
  rep->add_flag("--no-snap-guard", no_guard, "Disable the release snap guard");
  rep->add_option("--seed", rep_seed, "Jitter seed");
  rep->add_option("--session-id", rep_session, "Session id written to the log");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  GenParams gp;
  std::string gen_out;
  gen->add_option("--entities", gp.entities, "Number of charts")->capture_default_str();
  gen->add_option("--vars", gp.variables, "Variables per chart")->capture_default_str();
  gen->add_option("--events", gp.events, "Time events")->capture_default_str();
  gen->add_option("--seed", gp.seed, "Seed")->capture_default_str();
  gen->add_option("--period", gp.seasonal_period, "Seasonal period in events")->capture_default_str();
  gen->add_option("--noise", gp.noise_amp, "Uniform noise amplitude")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "Summarize an event log");
  std::string stats_log;
  stats->add_option("--log", stats_log, "Log file (JSON lines)")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Check a trace or dataset file");
  std::string val_trace, val_dataset;
  auto* vt = val->add_option("--trace", val_trace, "Trace file");
  auto* vd = val->add_option("--dataset", val_dataset, "Dataset file");
  vt->excludes(vd);
  val->require_option(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gce: " << e.what() << "\n" << "run 'gce --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      const Dataset d = generate_dataset(gp);
      detail::OutputFile f(gen_out, out);
      f.get() << save_dataset(d);
      return kExitOk;
    }
    if (*val) {
      if (!val_trace.empty()) {
        std::istringstream in(detail::read_file(val_trace));
        const auto records = read_trace(in);
        out << "ok: " << records.size() << " trace records\n";
      } else {
        const Dataset d = load_dataset(detail::read_file(val_dataset));
        out << "ok: " << d.entities.size() << " entities, " << d.variable_count() << " variables, " << d.event_count()
            << " events\n";
      }
      return kExitOk;
    }
    if (*stats) {
      std::istringstream in(detail::read_file(stats_log));
      out << stats_json(analyze_log(read_log(in))).dump(2) << "\n";
      return kExitOk;
    }
    if (*rep) {
      ReplayOptions options;
      for (const auto& kv : rep_sensor) detail::apply_sensor_option(options.sensor, kv);
      options.engine.snap_guard = !no_guard;
      options.seed = rep_seed;
      options.session_id = rep_session;
      try {
        options.sensor.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid sensor model: ") + e.what());
      }
      auto dataset = std::make_shared<const Dataset>(load_dataset(detail::read_file(rep_dataset)));
      std::istringstream in(detail::read_file(rep_trace));
      const auto log = replay(dataset, in, options);
      detail::OutputFile f(rep_out, out);
      write_log(f.get(), log);
      return kExitOk;
    }
    if (*serve) {
      ServiceConfig cfg;
      cfg.port = static_cast<unsigned short>(port);
      cfg.options.seed = serve_seed;
      if (!serve_log.empty()) cfg.log_dir = serve_log;
      if (!serve_dataset.empty()) {
        cfg.dataset = std::make_shared<const Dataset>(load_dataset(detail::read_file(serve_dataset)));
      } else {
        GenParams p;
        p.seed = serve_seed;
        cfg.dataset = std::make_shared<const Dataset>(generate_dataset(p));
      }
      Server server(std::move(cfg));
      detail::g_active_server = &server;
      std::signal(SIGINT, [](int) {
        if (auto* s = detail::g_active_server.load()) s->stop();
      });
      err << "gce: listening on ws://127.0.0.1:" << server.port() << "\n";
      server.run();
      detail::g_active_server = nullptr;
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "gce: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "gce: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    err << "gce: " << e.what() << "\n";
    return kExitData;
  } catch (const EngineError& e) {
    err << "gce: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "gce: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gce
