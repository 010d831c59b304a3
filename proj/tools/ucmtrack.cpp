// Copyright 2026 The ucmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: ucmtrack <subcommand> [--config FILE] [--set key=value ...]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "ucmtrack/ucmtrack.hpp"

namespace fs = std::filesystem;
using namespace ucmtrack;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kInfeasible = 3 };

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string out_path(const PipelineConfig& c, const std::string& name) {
  return (fs::path(c.output) / name).string();
}

void require_file(const PipelineConfig&, const std::string& key, const std::string& path,
                  std::vector<std::string>& problems) {
  if (path.empty()) problems.push_back(key + " is required");
  else if (!fs::is_regular_file(path)) problems.push_back(key + ": no such file '" + path + "'");
}

// Keys each subcommand reads from disk.
std::vector<std::string> input_problems(const std::string& cmd, const PipelineConfig& c) {
  std::vector<std::string> p;
  if (cmd == "preprocess") require_file(c, "input", c.input, p);
  if (cmd == "ensemble") {
    if (c.labels.empty()) p.push_back("labels is required");
    for (const auto& l : c.labels) require_file(c, "labels", l, p);
  }
  if (cmd == "track" || cmd == "export-lp") {
    require_file(c, "foreground", c.foreground, p);
    require_file(c, "contour", c.contour, p);
  }
  if (cmd == "metrics") {
    require_file(c, "pred_labels", c.pred_labels, p);
    require_file(c, "pred_tracks", c.pred_tracks, p);
    require_file(c, "gt_labels", c.gt_labels, p);
    require_file(c, "gt_tracks", c.gt_tracks, p);
  }
  return p;
}

SequenceMaps read_maps(const PipelineConfig& c) {
  return {read_tensor_as<std::uint8_t>(c.foreground), read_tensor_as<float>(c.contour)};
}

int run_synth(const PipelineConfig& c) {
  const SynthResult r = generate_timelapse(synth_config(c));
  fs::create_directories(c.output);
  write_tensor(out_path(c, "intensity.ucmt"), r.intensity);
  write_tensor(out_path(c, "gt_labels.ucmt"), r.labels);
  write_track_table(out_path(c, "gt_tracks.txt"), r.tracks);
  std::cout << "synth: " << r.tracks.records.size() << " tracks over " << c.synth_frames << " frames written to "
            << c.output << "\n";
  return kOk;
}

int run_preprocess(const PipelineConfig& c) {
  const AnyTensor input = read_tensor(c.input);
  const SequenceMaps maps = std::visit([&](const auto& t) { return preprocess_sequence(t, c); }, input);
  fs::create_directories(c.output);
  write_tensor(out_path(c, "foreground.ucmt"), maps.foreground);
  write_tensor(out_path(c, "contour.ucmt"), maps.contour);
  std::cout << "preprocess: " << maps.foreground.frame_count() << " frames written to " << c.output << "\n";
  return kOk;
}

int run_ensemble(const PipelineConfig& c) {
  std::vector<LabelImage> sources;
  for (const auto& p : c.labels) sources.push_back(read_tensor_as<std::uint16_t>(p));
  const SequenceMaps maps = ensemble_sequences(sources, c.parallelism);
  fs::create_directories(c.output);
  write_tensor(out_path(c, "foreground.ucmt"), maps.foreground);
  write_tensor(out_path(c, "contour.ucmt"), maps.contour);
  std::cout << "ensemble: " << sources.size() << " sources combined into " << c.output << "\n";
  return kOk;
}

int run_track(const PipelineConfig& c) {
  const SequenceMaps maps = read_maps(c);
  TrackResult r;
  try {
    r = track_sequence(maps, c, [](const std::string& line) { std::cerr << line << "\n"; });
  } catch (const StitchError& e) {
    throw InfeasibleError(e.what());
  }
  fs::create_directories(c.output);
  if (!r.lineage.labels.empty()) {
    write_tensor(out_path(c, "labels.ucmt"), r.lineage.labels);
  } else {
    std::vector<std::size_t> dims = maps.foreground.dims();
    write_tensor(out_path(c, "labels.ucmt"), LabelImage(dims, 0));
  }
  write_track_table(out_path(c, "tracks.txt"), r.lineage.tracks);
  std::cout << "track: " << r.candidates << " candidates, " << r.links << " links, "
            << r.lineage.tracks.records.size() << " tracks, objective " << format_number(r.objective) << "\n";
  return kOk;
}

int run_export_lp(const PipelineConfig& c, bool with_solution) {
  const SequenceMaps maps = read_maps(c);
  const CandidateSet set = build_candidates(maps, c);
  const auto links = build_links(set, c);
  const TrackingModel model = build_tracking_model(set, links, penalties(c));
  fs::create_directories(c.output);
  {
    std::ofstream out(out_path(c, "model.lp"));
    export_lp(model.program, out);
    if (!out) throw IoError("cannot write " + out_path(c, "model.lp"));
  }
  std::cout << "export-lp: " << model.program.size() << " variables, " << model.program.rows.size()
            << " constraints\n";
  if (with_solution) {
    SolveOptions so;
    so.time_limit_seconds = c.time_limit;
    so.gap_tolerance = c.gap_tolerance;
    Solution s = solve(model.program, so);
    if (s.status == SolveStatus::infeasible) throw InfeasibleError("model is infeasible");
    model.canonicalize(s.values);
    std::ofstream out(out_path(c, "solution.txt"));
    write_solution(out, model.program, s.values);
    std::cout << "solution: status " << to_string(s.status) << ", objective "
              << format_number(model.program.evaluate(s.values)) << "\n";
  }
  return kOk;
}

int run_metrics(const PipelineConfig& c) {
  const auto pred = read_tensor_as<std::uint16_t>(c.pred_labels);
  const auto gt = read_tensor_as<std::uint16_t>(c.gt_labels);
  const ScoreReport r = evaluate_arrays(pred, read_track_table(c.pred_tracks), gt, read_track_table(c.gt_tracks));
  write_report(std::cout, r);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint cell segmentation and tracking over hierarchies"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  app.add_flag("--defaults", print_defaults, "Print every setting with its default and exit");

  std::string config_path;
  std::vector<std::string> overrides;
  bool with_solution = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value settings file");
    sub->add_option("-s,--set", overrides, "Override a setting, key=value (repeatable)");
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "Generate a synthetic timelapse with ground truth"},
      {"preprocess", "Intensity sequence to foreground and contour maps"},
      {"ensemble", "Label sequences to combined foreground and contour maps"},
      {"track", "Foreground and contour maps to labels and tracks"},
      {"export-lp", "Write the tracking model as LP text"},
      {"metrics", "Score predicted labels and tracks against ground truth"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "export-lp") sub->add_flag("--solution", with_solution, "Also solve and write solution.txt");
  }
  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    write_config(std::cout, PipelineConfig{});
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kValidation;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  PipelineConfig cfg;
  std::vector<std::string> problems;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) problems.push_back("cannot open config '" + config_path + "'");
    else read_config(in, cfg, problems, config_path);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      problems.push_back("--set expects key=value, got '" + o + "'");
      continue;
    }
    set_config_value(cfg, detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)), problems);
  }
  for (auto& p : validate_config(cfg)) problems.push_back(std::move(p));
  for (auto& p : input_problems(cmd, cfg)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << "\n";
    return kValidation;
  }

  try {
    if (cmd == "synth") return run_synth(cfg);
    if (cmd == "preprocess") return run_preprocess(cfg);
    if (cmd == "ensemble") return run_ensemble(cfg);
    if (cmd == "track") return run_track(cfg);
    if (cmd == "export-lp") return run_export_lp(cfg, with_solution);
    if (cmd == "metrics") return run_metrics(cfg);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
