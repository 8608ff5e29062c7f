// ghl: simgen | ingest | train | eval | curve | gradcheck
//
// Exit codes: 0 success, 1 invalid flags or configuration, 2 runtime or I/O
// failure, 3 a requested check failed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ghl/ghl.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheck = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "csv";
};

/// "min:max:step" or "min:max".
struct Range {
  double min = 0.0, max = 0.0, step = 0.0;
};

Range parse_range(const std::string& text, bool need_step) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    double v;
    if (!ghl::parse_double(std::string_view(text).substr(start, colon == std::string::npos ? std::string::npos : colon - start), v)) {
      throw ghl::Error(ghl::ErrorCode::InvalidConfig, "bad range '" + text + "'");
    }
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != (need_step ? 3u : 2u)) {
    throw ghl::Error(ghl::ErrorCode::InvalidConfig,
                     "range '" + text + "' must be " + (need_step ? "min:max:step" : "min:max"));
  }
  return {parts[0], parts[1], need_step ? parts[2] : 0.0};
}

std::string resolve(const Globals& g, const std::string& path) {
  if (g.out_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(g.out_dir) / path).string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw ghl::Error(ghl::ErrorCode::Io, "cannot create " + parent.string() + ": " + ec.message());
  }
}

void write_echo(const std::string& output, const std::string& command, const Globals& g, json flags) {
  json j;
  j["command"] = command;
  j["version"] = "0.1.0";
  j["seed"] = g.seed;
  j["out_dir"] = g.out_dir;
  j["format"] = g.format;
  j["flags"] = std::move(flags);
  ghl::write_text(output + ".config.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct SimgenArgs {
  ghl::SimGridConfig grid;
  std::string speeds, headings;
  std::string label = "S1";
  std::string out;
};

int run_simgen(const Globals& g, SimgenArgs a) {
  if (!a.speeds.empty()) {
    const Range r = parse_range(a.speeds, true);
    a.grid.speed_min = r.min, a.grid.speed_max = r.max, a.grid.speed_step = r.step;
  }
  if (!a.headings.empty()) {
    const Range r = parse_range(a.headings, true);
    a.grid.heading_min = r.min, a.grid.heading_max = r.max, a.grid.heading_step = r.step;
  }
  a.grid.rng_seed = g.seed;
  const ghl::Dataset data = ghl::generate_grid_dataset(a.grid);
  ghl::DatasetManifest m = ghl::describe(data, a.label, "simulative");
  m.speed_range = {a.grid.speed_min, a.grid.speeds().back()};
  m.heading_range = {a.grid.heading_min, a.grid.headings().back()};
  m.rng_seed = g.seed;
  const json grid = {{"speed", {a.grid.speed_min, a.grid.speed_max, a.grid.speed_step}},
                     {"heading", {a.grid.heading_min, a.grid.heading_max, a.grid.heading_step}},
                     {"repeats", a.grid.repeats_per_cell},
                     {"sigma_v", a.grid.sigma_v},
                     {"roll_pitch_deg", {0.0, 0.0}}};
  m.details = grid;
  const std::string out = resolve(g, a.out);
  ensure_parent(out);
  ghl::write_csv(data, m, out);
  write_echo(out, "simgen", g, {{"grid", grid}, {"label", a.label}, {"out", a.out}});
  std::cout << "wrote " << data.size() << " samples to " << out << "\n";
  return kExitOk;
}

struct IngestArgs {
  std::string gt, gnss;
  std::string filter = "0:90";
  double rate = 10.0;
  double tolerance = 0.05;
  std::string velocity_source = "auto";
  std::string label = "recorded";
  std::string out;
};

int run_ingest(const Globals& g, const IngestArgs& a) {
  ghl::IngestConfig cfg;
  const Range f = parse_range(a.filter, false);
  cfg.heading_min_deg = f.min;
  cfg.heading_max_deg = f.max;
  cfg.rate_hz = a.rate;
  cfg.tolerance_s = a.tolerance;
  cfg.velocity_source = ghl::parse_velocity_source(a.velocity_source);
  cfg.validate();
  const ghl::NcltLayout layout;
  const ghl::RecordedTrack track = ghl::load_nclt(a.gt, a.gnss, layout);
  const ghl::IngestResult r = ghl::ingest_recorded(track, cfg);

  ghl::DatasetManifest m = ghl::describe(r.samples, a.label, "recorded");
  m.details = {{"ingest", cfg.to_json()}, {"layout", layout.to_json()}, {"stats", r.stats.to_json()},
               {"ground_truth", a.gt}, {"gnss", a.gnss}};
  const std::string out = resolve(g, a.out);
  ensure_parent(out);
  ghl::write_csv(r.samples, m, out);
  write_echo(out, "ingest", g,
             {{"gt", a.gt}, {"gnss", a.gnss}, {"ingest", cfg.to_json()}, {"label", a.label}, {"out", a.out}});
  std::cout << "grid instants " << r.stats.grid_instants << ", paired " << r.stats.paired << ", kept "
            << r.stats.kept << " -> " << out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string train, val, data;
  double split = 0.8;
  ghl::TrainConfig cfg;
  std::string out;
};

int run_train(const Globals& g, TrainArgs a) {
  a.cfg.seed = g.seed;
  a.cfg.validate();
  ghl::Dataset train_set, val_set;
  if (!a.data.empty()) {
    if (!a.train.empty() || !a.val.empty()) {
      throw ghl::Error(ghl::ErrorCode::InvalidConfig, "use either --data or --train/--val");
    }
    auto parts = ghl::split(ghl::read_csv(a.data).samples, a.split, g.seed);
    train_set = std::move(parts.train);
    val_set = std::move(parts.val);
  } else {
    if (a.train.empty() || a.val.empty()) {
      throw ghl::Error(ghl::ErrorCode::InvalidConfig, "--train and --val are both required without --data");
    }
    train_set = ghl::read_csv(a.train).samples;
    val_set = ghl::read_csv(a.val).samples;
  }
  std::cout << "train " << train_set.size() << " / val " << val_set.size() << " samples\n";
  const ghl::TrainResult r = ghl::train(a.cfg, train_set, val_set, [](const ghl::EpochRecord& e) {
    std::printf("epoch %3zu  train_loss %.4f  val_mae %.4f\n", e.epoch, e.train_loss, e.val_mae);
    std::fflush(stdout);
  });

  const std::string out = resolve(g, a.out);
  ensure_parent(out);
  ghl::save(r.checkpoint, out);
  std::string history = "epoch,train_loss,val_mae\n";
  for (const auto& e : r.history) {
    history += std::to_string(e.epoch) + ',' + ghl::format_shortest(e.train_loss) + ',' +
               ghl::format_shortest(e.val_mae) + '\n';
  }
  ghl::write_text(out + ".history.csv", history);
  write_echo(out, "train", g,
             {{"train", a.train}, {"val", a.val}, {"data", a.data}, {"split", a.split},
              {"config", a.cfg.to_json()}, {"out", a.out}});
  std::cout << "best epoch " << r.best_epoch << " val_mae " << r.best_val_mae << " -> " << out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string test, ckpt;
  ghl::BinSpec bins;
  std::optional<double> require_low_speed_improvement;
  std::string out;
};

int run_eval(const Globals& g, const EvalArgs& a) {
  const ghl::ReportFormat format = ghl::parse_report_format(g.format);
  const ghl::Checkpoint ckpt = ghl::load(a.ckpt);
  const ghl::Dataset test = ghl::read_csv(a.test).samples;
  const std::vector<double> baseline = ghl::baseline_predictions(test);
  const std::vector<double> model = ghl::predict(ckpt, test);
  const ghl::BinnedReport report = ghl::binned_report(test, baseline, model, a.bins);

  const std::string out = resolve(g, a.out);
  ensure_parent(out);
  ghl::emit_report(report, format, out);
  write_echo(out, "eval", g,
             {{"test", a.test}, {"ckpt", a.ckpt}, {"bins", a.bins.width}, {"max_speed", a.bins.max_speed},
              {"out", a.out}});
  std::cout << ghl::report_csv(report);
  if (report.excluded) std::cout << report.excluded << " samples excluded (zero measured velocity)\n";

  if (a.require_low_speed_improvement) {
    const auto& first = report.bins.front();
    if (!first.mae_improvement_pct || *first.mae_improvement_pct < *a.require_low_speed_improvement) {
      std::cerr << "check failed: " << first.label << " bin MAE improvement below "
                << *a.require_low_speed_improvement << "%\n";
      return kExitCheck;
    }
  }
  return kExitOk;
}

struct CurveArgs {
  double sigma_v = 0.01;
  std::string speeds = "0.1:3.5:0.1";
  std::size_t draws = 100000;
  double heading = 60.0;
  std::string out;
};

int run_curve(const Globals& g, const CurveArgs& a) {
  const Range r = parse_range(a.speeds, true);
  if (!(r.step > 0.0) || r.min > r.max) throw ghl::Error(ghl::ErrorCode::InvalidConfig, "bad speed range");
  const std::vector<double> speeds = ghl::grid_values(r.min, r.max, r.step);
  const auto curve = ghl::std_vs_speed_curve(ghl::NoiseModel(a.sigma_v), speeds, a.draws, g.seed, a.heading);
  const std::string out = resolve(g, a.out);
  ensure_parent(out);
  ghl::write_text(out, ghl::curve_csv(curve));
  write_echo(out, "curve", g,
             {{"sigma_v", a.sigma_v}, {"speeds", a.speeds}, {"draws", a.draws}, {"heading", a.heading},
              {"out", a.out}});
  std::cout << "wrote " << curve.size() << " points to " << out << "\n";
  return kExitOk;
}

struct GradcheckArgs {
  double tolerance = 1e-5;
  std::size_t batch = 3;
  std::string inject_fault;
  double fault_factor = 1.01;
  std::string out;
};

int run_gradcheck(const Globals& g, const GradcheckArgs& a) {
  ghl::GradcheckSetup setup;
  setup.seed = g.seed;
  setup.batch = a.batch;
  setup.tolerance = a.tolerance;
  setup.fault_layer = a.inject_fault;
  setup.fault_factor = a.fault_factor;
  const auto report = ghl::gradcheck_ghnet(setup);

  std::string table = "tensor,elements,max_abs_error,max_rel_error,status\n";
  for (const auto& e : report.entries) {
    table += e.name + ',' + std::to_string(e.elements) + ',' + ghl::format_shortest(e.max_abs_error) + ',' +
             ghl::format_shortest(e.max_rel_error) + ',' + (e.passed ? "pass" : "FAIL") + '\n';
  }
  std::cout << table;
  std::cout << (report.passed() ? "gradcheck passed" : "gradcheck FAILED") << ", max relative error "
            << report.max_rel_error() << " (tolerance " << a.tolerance << ")\n";
  if (!a.out.empty()) {
    const std::string out = resolve(g, a.out);
    ensure_parent(out);
    ghl::write_text(out, table);
    write_echo(out, "gradcheck", g,
               {{"tolerance", a.tolerance}, {"batch", a.batch}, {"inject_fault", a.inject_fault},
                {"fault_factor", a.fault_factor}, {"out", a.out}});
  }
  return report.passed() ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS heading estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for relative output paths");
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  int code = kExitOk;
  auto guarded = [&](auto fn) {
    return [&code, fn] {
      try {
        code = fn();
      } catch (const ghl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = e.code() == ghl::ErrorCode::InvalidConfig ? kExitValidation : kExitRuntime;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = kExitRuntime;
      }
    };
  };

  SimgenArgs sim;
  auto* simgen = app.add_subcommand("simgen", "generate the simulated grid dataset");
  simgen->add_option("--speed-min", sim.grid.speed_min)->capture_default_str();
  simgen->add_option("--speed-max", sim.grid.speed_max)->capture_default_str();
  simgen->add_option("--speed-step", sim.grid.speed_step)->capture_default_str();
  simgen->add_option("--heading-min", sim.grid.heading_min)->capture_default_str();
  simgen->add_option("--heading-max", sim.grid.heading_max)->capture_default_str();
  simgen->add_option("--heading-step", sim.grid.heading_step)->capture_default_str();
  simgen->add_option("--speeds", sim.speeds, "speed grid as min:max:step");
  simgen->add_option("--headings", sim.headings, "heading grid as min:max:step");
  simgen->add_option("--repeats", sim.grid.repeats_per_cell)->capture_default_str();
  simgen->add_option("--sigma-v", sim.grid.sigma_v, "velocity noise STD, m/s")->capture_default_str();
  simgen->add_option("--label", sim.label)->capture_default_str();
  simgen->add_option("--out", sim.out, "output CSV")->required();
  simgen->callback(guarded([&] { return run_simgen(g, sim); }));

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "resample an NCLT-format recording");
  ingest->add_option("--gt", ing.gt, "ground-truth CSV")->required();
  ingest->add_option("--gnss", ing.gnss, "GPS CSV")->required();
  ingest->add_option("--filter-heading", ing.filter, "kept heading range min:max, degrees")->capture_default_str();
  ingest->add_option("--rate", ing.rate, "grid rate, Hz")->capture_default_str();
  ingest->add_option("--tolerance", ing.tolerance, "pairing window, s")->capture_default_str();
  ingest->add_option("--velocity-source", ing.velocity_source, "auto | track | fixes")
      ->check(CLI::IsMember({"auto", "track", "fixes"}))
      ->capture_default_str();
  ingest->add_option("--label", ing.label)->capture_default_str();
  ingest->add_option("--out", ing.out, "output CSV")->required();
  ingest->callback(guarded([&] { return run_ingest(g, ing); }));

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train the network");
  train->add_option("--train", tr.train, "training CSV");
  train->add_option("--val", tr.val, "validation CSV");
  train->add_option("--data", tr.data, "single CSV to split");
  train->add_option("--split", tr.split, "training fraction with --data")->capture_default_str();
  train->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  train->add_option("--batch", tr.cfg.batch_size)->capture_default_str();
  train->add_option("--lr", tr.cfg.optimizer.learning_rate)->capture_default_str();
  train->add_option("--weight-decay", tr.cfg.optimizer.weight_decay)->capture_default_str();
  train->add_option("--dropout", tr.cfg.dropout)->capture_default_str();
  train->add_option("--patience", tr.cfg.patience)->capture_default_str();
  train->add_flag("--raw", tr.cfg.raw_inputs, "skip input normalization");
  train->add_option("--out", tr.out, "checkpoint path")->required();
  train->callback(guarded([&] { return run_train(g, tr); }));

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "binned comparison against the model-based baseline");
  eval->add_option("--test", ev.test, "test CSV")->required();
  eval->add_option("--ckpt", ev.ckpt, "checkpoint")->required();
  eval->add_option("--bins", ev.bins.width, "bin width, m/s")->capture_default_str();
  eval->add_option("--max-speed", ev.bins.max_speed, "lower edge of the last bin, m/s")->capture_default_str();
  eval->add_option("--require-low-speed-improvement", ev.require_low_speed_improvement,
                   "exit 3 unless the first bin's MAE improvement reaches this percentage");
  eval->add_option("--out", ev.out, "report path")->required();
  eval->callback(guarded([&] { return run_eval(g, ev); }));

  CurveArgs cv;
  auto* curve = app.add_subcommand("curve", "Monte-Carlo heading STD against speed");
  curve->add_option("--sigma-v", cv.sigma_v)->capture_default_str();
  curve->add_option("--speeds", cv.speeds, "min:max:step")->capture_default_str();
  curve->add_option("--draws", cv.draws)->capture_default_str();
  curve->add_option("--heading", cv.heading, "true heading, degrees")->capture_default_str();
  curve->add_option("--out", cv.out, "output CSV")->required();
  curve->callback(guarded([&] { return run_curve(g, cv); }));

  GradcheckArgs gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every parameter gradient");
  gradcheck->add_option("--tolerance", gc.tolerance)->capture_default_str();
  gradcheck->add_option("--batch", gc.batch)->capture_default_str();
  gradcheck->add_option("--inject-fault", gc.inject_fault, "layer whose parameter gradients get scaled");
  gradcheck->add_option("--fault-factor", gc.fault_factor)->capture_default_str();
  gradcheck->add_option("--out", gc.out, "optional report CSV");
  gradcheck->callback(guarded([&] { return run_gradcheck(g, gc); }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  return code;
}
