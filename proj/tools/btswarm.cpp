// Command-line front end: allocation model, burst-bound prediction, swarm
// simulation with metric exports, and the model-vs-simulation validation grid.
//
// Exit codes: 0 success, 1 internal error, 2 usage or config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "btswarm/burst.hpp"
#include "btswarm/config_io.hpp"
#include "btswarm/fluid_model.hpp"
#include "btswarm/metrics.hpp"
#include "btswarm/sim.hpp"
#include "btswarm/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int run_model(const std::vector<int>& counts, double cs, double cl, int n) {
  const btswarm::RateMatrix m = btswarm::allocate({counts, cs, cl, n});
  const auto rates = btswarm::download_rates(m);

  std::cout << "leechers " << m.n_leechers << "\n";
  std::cout << "seed_share " << fmt_g(m.seed_share) << "\n";
  std::cout << "upload_matrix\n";
  for (int i = 0; i < m.n_leechers; ++i) {
    for (int j = 0; j < m.n_leechers; ++j)
      std::cout << (j ? " " : "") << fmt_g(m(i, j));
    std::cout << "\n";
  }
  std::cout << "download_rates";
  for (double r : rates) std::cout << " " << fmt_g(r);
  std::cout << "\n";
  return 0;
}

int run_predict(double lambda, double content_kb, double cs, double cl) {
  const btswarm::BurstBounds b = btswarm::burst_bounds(lambda, content_kb, cs, cl);
  std::cout << btswarm::predict_header() << "\n"
            << btswarm::format_predict_row(b, cs, cl) << "\n";
  std::cout << "# T_s=" << fmt_g(b.download_time) << " n99=" << b.n99
            << " d_min_kbps=" << fmt_g(b.d_min) << " d_max_kbps=" << fmt_g(b.d_max)
            << "\n";
  if (cs > cl) {
    std::cout << "# fast-seed: peer rates are capped by the leecher uplink, so the\n"
                 "# upper bound clamps to the capacity-limited rate; treat b_max as\n"
                 "# a model artifact in this regime\n";
  }
  return 0;
}

// Writes a file via a temp path so readers never see partial content; tracks
// what was written so a failed run can clean up after itself.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary);
      os << content;
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
    written_.push_back(target);
  }

  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

json config_to_json(const btswarm::SwarmConfig& cfg) {
  json j;
  j["seed_capacity"] = cfg.seed_capacity;
  j["leecher_capacity"] = cfg.leecher_capacity;
  j["piece_count"] = cfg.piece_count;
  j["piece_size"] = cfg.piece_size;
  j["sim_duration"] = cfg.sim_duration;
  j["rng_seed"] = cfg.rng_seed;
  if (const auto* poisson = std::get_if<btswarm::PoissonArrivals>(&cfg.arrivals))
    j["arrivals"] = {{"poisson_rate", poisson->rate}};
  else
    j["arrivals"] = {{"schedule", std::get<btswarm::ScheduleArrivals>(cfg.arrivals).times}};
  return j;
}

int run_simulate(const btswarm::SwarmConfig& cfg, const btswarm::SimOptions& opts,
                 const fs::path& out_dir) {
  fs::create_directories(out_dir);
  OutputSet out(out_dir);

  const btswarm::EventTrace trace = btswarm::run(cfg, opts);

  out.write("config.txt", btswarm::write_config(cfg));
  {
    std::ostringstream os;
    btswarm::write_trace_csv(os, trace);
    out.write("trace.csv", os.str());
  }

  const auto periods = btswarm::busy_periods(trace);
  const auto orders = btswarm::download_time_by_order(trace);
  const auto ccdf = btswarm::interdeparture_ccdf(trace);
  const auto bursts = btswarm::burst_sizes(trace);

  {
    std::ostringstream os;
    btswarm::write_busy_periods_csv(os, periods);
    out.write("busy_periods.csv", os.str());
  }
  {
    std::ostringstream os;
    btswarm::write_order_csv(os, orders);
    out.write("download_time_by_order.csv", os.str());
  }
  {
    std::ostringstream os;
    btswarm::write_ccdf_csv(os, ccdf);
    out.write("interdeparture_ccdf.csv", os.str());
  }
  {
    std::ostringstream os;
    btswarm::write_bursts_csv(os, bursts);
    out.write("burst_sizes.csv", os.str());
  }
  if (!trace.snapshots.empty()) {
    std::ostringstream os;
    btswarm::write_sync_csv(os, btswarm::synchronized_series(trace));
    out.write("synchronized.csv", os.str());
  }

  int arrivals = 0, departures = 0;
  for (const auto& e : trace.events) {
    arrivals += e.kind == btswarm::EventKind::arrival;
    departures += e.kind == btswarm::EventKind::departure;
  }

  json j;
  j["schema_version"] = 1;
  j["config"] = config_to_json(cfg);
  json& r = j["results"];
  r["end_time_s"] = trace.end_time;
  r["arrivals"] = arrivals;
  r["completed_downloads"] = departures;
  r["busy_periods"] = periods.size();
  r["mean_swarm_size"] = btswarm::mean_swarm_size(trace);
  if (departures > 0) {
    const auto s = btswarm::download_time_summary(trace);
    r["download_time_s"] = {{"min", s.min}, {"p25", s.p25}, {"mean", s.mean},
                            {"p75", s.p75}, {"max", s.max}};
    {
      std::ostringstream os;
      btswarm::write_summary_csv(os, s);
      out.write("download_time_summary.csv", os.str());
    }
  }
  json by_order = json::array();
  for (const auto& o : orders)
    by_order.push_back({{"order", o.order}, {"mean_s", o.mean_download_time},
                        {"samples", o.samples}});
  r["download_time_by_order"] = by_order;
  if (!bursts.empty()) {
    double total = 0;
    for (const auto& b : bursts) total += b.companions;
    r["initiator_burst"] = {{"periods", bursts.size()},
                            {"mean_companions", total / bursts.size()}};
  }
  r["transfer_kb"] = {{"uploaded", trace.uploaded_kb}, {"completed", trace.completed_kb},
                      {"wasted", trace.wasted_kb}, {"inflight", trace.inflight_kb}};
  out.write("summary.json", j.dump(2) + "\n");

  out.commit();
  std::cout << "wrote " << out_dir.string() << " (" << arrivals << " arrivals, "
            << departures << " departures, " << trace.events.size() << " events)\n";
  return 0;
}

int run_validate(double cs, double cl, int max_n, int pieces, double piece_size,
                 std::uint64_t seed, const std::string& out_file) {
  const auto report = btswarm::run_validation(cs, cl, max_n, pieces, piece_size, seed);
  if (out_file.empty()) {
    btswarm::write_validation_csv(std::cout, report);
  } else {
    std::ofstream os(out_file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out_file);
    btswarm::write_validation_csv(os, report);
    std::cout << "wrote " << out_file << " (" << report.cells.size() << " cells)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unpopular BitTorrent swarm: capacity-fluid simulator, "
               "interest-constrained allocation model and burst predictor"};
  app.require_subcommand(1);

  // model
  auto* model_cmd = app.add_subcommand("model", "upload-rate allocation for given piece counts");
  std::vector<int> model_b;
  double model_cs = 0, model_cl = 0;
  int model_n = 0;
  model_cmd->add_option("--b", model_b, "piece counts by arrival order, e.g. 3,2,1")
      ->required()
      ->delimiter(',');
  model_cmd->add_option("--cs", model_cs, "seed upload capacity, kB/s")->required();
  model_cmd->add_option("--cl", model_cl, "leecher upload capacity, kB/s")->required();
  model_cmd->add_option("--n", model_n, "recipients per leecher (default: N-1)");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "burst-departure bounds for a poisson swarm");
  double pr_lambda = 0, pr_content = 0, pr_cs = 0, pr_cl = 0;
  predict_cmd->add_option("--lambda", pr_lambda, "arrival rate, 1/s")->required();
  predict_cmd->add_option("--content-kb", pr_content, "content size, kB")->required();
  predict_cmd->add_option("--cs", pr_cs, "seed upload capacity, kB/s")->required();
  predict_cmd->add_option("--cl", pr_cl, "leecher upload capacity, kB/s")->required();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario and export trace + metrics");
  std::string sim_config, sim_preset, sim_out;
  std::uint64_t sim_seed = 0;
  double sim_duration = -1, sim_snapshot = -1;
  bool sim_counts = false, sim_list = false;
  sim_cmd->add_option("--config", sim_config, "config file path");
  sim_cmd->add_option("--preset", sim_preset, "built-in scenario name");
  sim_cmd->add_option("--out", sim_out, "output directory");
  sim_cmd->add_option("--seed", sim_seed, "override rng seed");
  sim_cmd->add_option("--duration", sim_duration, "override sim duration, s");
  sim_cmd->add_option("--snapshot-interval", sim_snapshot, "bitfield snapshot cadence, s (0 = off)");
  sim_cmd->add_flag("--record-counts", sim_counts, "attach per-peer piece counts to trace events");
  sim_cmd->add_flag("--list-presets", sim_list, "list built-in scenarios and exit");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "compare model rates against simulation");
  double val_cs = 0.25, val_cl = 0.25, val_piece = 1.0;
  int val_max_n = 5, val_pieces = 2000;
  std::uint64_t val_seed = 1;
  std::string val_out;
  val_cmd->add_option("--cs", val_cs, "seed upload capacity, kB/s");
  val_cmd->add_option("--cl", val_cl, "leecher upload capacity, kB/s");
  val_cmd->add_option("--max-n", val_max_n, "largest swarm size in the grid")
      ->check(CLI::Range(1, 12));
  val_cmd->add_option("--pieces", val_pieces, "content size in pieces");
  val_cmd->add_option("--piece-size", val_piece, "piece size, kB");
  val_cmd->add_option("--seed", val_seed, "rng seed");
  val_cmd->add_option("--out", val_out, "report CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (model_cmd->parsed()) return run_model(model_b, model_cs, model_cl, model_n);
    if (predict_cmd->parsed()) return run_predict(pr_lambda, pr_content, pr_cs, pr_cl);

    if (sim_cmd->parsed()) {
      if (sim_list) {
        for (const auto& p : btswarm::presets())
          std::cout << p.name << "  -  " << p.description << "\n";
        return 0;
      }
      btswarm::SwarmConfig cfg;
      if (!sim_config.empty() && !sim_preset.empty()) {
        std::cerr << "error: give either --config or --preset, not both\n";
        return 2;
      } else if (!sim_config.empty()) {
        std::ifstream is(sim_config);
        if (!is) {
          std::cerr << "error: cannot read " << sim_config << "\n";
          return 2;
        }
        auto parsed = btswarm::parse_config(is);
        if (!parsed.ok()) {
          for (const auto& msg : parsed.errors) std::cerr << "config error: " << msg << "\n";
          return 2;
        }
        cfg = parsed.config;
      } else if (!sim_preset.empty()) {
        const auto* preset = btswarm::find_preset(sim_preset);
        if (!preset) {
          std::cerr << "error: unknown preset " << sim_preset
                    << " (use --list-presets)\n";
          return 2;
        }
        cfg = preset->config;
      } else {
        std::cerr << "error: --config or --preset required\n";
        return 2;
      }
      if (sim_out.empty()) {
        std::cerr << "error: --out required\n";
        return 2;
      }
      if (sim_cmd->count("--seed")) cfg.rng_seed = sim_seed;
      if (sim_duration >= 0) cfg.sim_duration = sim_duration;
      const auto errors = btswarm::validate_config(cfg);
      if (!errors.empty()) {
        for (const auto& msg : errors) std::cerr << "config error: " << msg << "\n";
        return 2;
      }
      btswarm::SimOptions opts;
      if (sim_snapshot >= 0) opts.snapshot_interval = sim_snapshot;
      opts.record_piece_counts = sim_counts;
      return run_simulate(cfg, opts, sim_out);
    }

    if (val_cmd->parsed())
      return run_validate(val_cs, val_cl, val_max_n, val_pieces, val_piece, val_seed, val_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
