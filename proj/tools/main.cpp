#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "geopix/config.hpp"
#include "geopix/report.hpp"

namespace {

using namespace geopix;

enum ExitCode { kOk = 0, kInstanceErrors = 1, kUsage = 2, kFatal = 3 };

struct Flags {
  std::optional<std::string> config, task, points, out, mode, thresholds, split, samples, buckets, instance;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
  std::optional<int> res, workers, best_of;
  std::vector<std::string> shards;
};

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) apply_json(c, load_json_arg(*f.config));
  if (f.task) c.task = parse_task(*f.task);
  if (f.points) c.points = parse_range(*f.points);
  if (f.seed) c.seed = *f.seed;
  if (f.res) c.resolution = *f.res;
  if (f.out) c.out = *f.out;
  if (f.workers) c.workers = *f.workers;
  if (f.mode) c.mode = *f.mode;
  if (f.best_of) c.best_of = *f.best_of;
  if (f.thresholds) apply_thresholds_json(c.thresholds, c.snap, load_json_arg(*f.thresholds));
  if (f.count) c.splits = {{f.split.value_or("train"), *f.count}};
  c.validate();
  return c;
}

struct Loaded {
  fs::path dir;
  InstanceManifest manifest;
};

std::vector<Loaded> load_instances(const std::vector<std::string>& paths, RunConfig& cfg, bool task_flag) {
  if (paths.empty()) throw InvalidInput("--shard is required");
  std::vector<Loaded> out;
  for (const fs::path p : paths) {
    std::vector<fs::path> dirs;
    if (fs::exists(p / kManifestName)) {
      dirs.push_back(p);
    } else {
      dirs = list_shards(p);
      if (dirs.empty()) throw InvalidInput("no shard found at " + p.string());
    }
    for (const auto& d : dirs) {
      for (auto& m : read_shard(d)) out.push_back({d, std::move(m)});
    }
  }
  if (out.empty()) return out;
  const Task task = out.front().manifest.task;
  for (const auto& l : out) {
    if (l.manifest.task != task) throw InvalidInput("shards mix tasks");
  }
  if (task_flag && cfg.task != task) throw InvalidInput("--task does not match the shard task " + to_string(task));
  cfg.task = task;
  return out;
}

struct Job {
  const Loaded* instance = nullptr;
  std::uint64_t seed = 0;
  fs::path image;
};

struct JobError {
  std::string instance_id;
  std::string message;
};

// Oracle solution images unless a samples manifest is given.
std::vector<Job> make_jobs(const std::vector<Loaded>& instances, const std::optional<std::string>& samples,
                           std::vector<JobError>& errors) {
  std::vector<Job> jobs;
  if (!samples) {
    for (const auto& l : instances) jobs.push_back({&l, l.manifest.seed, l.dir / l.manifest.solution_png});
    return jobs;
  }
  std::map<std::string, const Loaded*> by_id;
  for (const auto& l : instances) by_id[l.manifest.instance_id] = &l;
  for (const auto& s : read_samples(*samples)) {
    const auto it = by_id.find(s.instance_id);
    if (it == by_id.end()) {
      errors.push_back({s.instance_id, "sample " + s.path.string() + " refers to an unknown instance"});
      continue;
    }
    jobs.push_back({it->second, s.seed, s.path});
  }
  return jobs;
}

int report_errors(const std::vector<JobError>& errors) {
  for (const auto& e : errors) {
    spdlog::error("{}: {}", e.instance_id, e.message);
    std::cerr << "error: " << e.instance_id << ": " << e.message << "\n";
  }
  if (!errors.empty()) std::cerr << errors.size() << " instance(s) failed\n";
  return errors.empty() ? kOk : kInstanceErrors;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << text;
}

int run_gen(const Flags& f) {
  const RunConfig cfg = resolve(f);
  if (cfg.splits.empty()) throw InvalidInput("gen needs --count or a splits entry in the config");
  spdlog::info("gen config: {}", to_json(cfg).dump());
  std::vector<JobError> errors;
  for (const auto& [split, count] : cfg.splits) {
    auto out = generate(cfg.request(split, count));
    for (const auto& fail : out.failures) {
      errors.push_back({fail.item, fail.message + " (seed " + std::to_string(fail.seed) + ")"});
    }
    for (const auto& s : write_dataset(std::move(out.entries), cfg.out, cfg.task, split)) {
      std::cout << s.dir.string() << "\t" << s.count << "\t" << s.checksum << "\n";
    }
  }
  return report_errors(errors);
}

int run_solve(const Flags& f) {
  RunConfig cfg = resolve(f);
  const auto instances = load_instances(f.shards, cfg, f.task.has_value());
  const SteinerMode mode = parse_steiner_mode(cfg.mode);
  check_solve_mode(cfg.task, mode);
  const fs::path dir = cfg.out;
  fs::create_directories(dir);

  const auto results = parallel_map(instances.size(), cfg.workers, [&](std::size_t i) -> std::variant<SolveResult, std::string> {
    try {
      return solve_instance(instances[i].manifest, mode, derive_seed(instances[i].manifest.seed, cfg.seed));
    } catch (const Error& e) {
      return std::string(e.what());
    }
  });
  std::vector<JobError> errors;
  std::string manifest;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& m = instances[i].manifest;
    if (const auto* msg = std::get_if<std::string>(&results[i])) {
      errors.push_back({m.instance_id, *msg});
      continue;
    }
    const auto& r = std::get<SolveResult>(results[i]);
    const std::string name = m.instance_id + "_" + std::to_string(cfg.seed) + ".png";
    write_png(dir / name, r.image);
    nlohmann::json line{{"instance_id", m.instance_id}, {"seed", cfg.seed}, {"path", name},
                        {"mode", cfg.mode},           {"value", r.value},  {"geometry", r.geometry}};
    if (r.ratio_vs_reference) line["ratio_vs_reference"] = *r.ratio_vs_reference;
    manifest += line.dump() + "\n";
  }
  write_text(dir / "samples.jsonl", manifest);
  std::cout << dir / "samples.jsonl" << "\t" << instances.size() - errors.size() << " solved\n";
  return report_errors(errors);
}

struct Evaluated {
  std::vector<std::optional<ImageEvaluation>> results;
  std::vector<Job> jobs;
  std::vector<JobError> errors;
};

Evaluated evaluate_jobs(const std::vector<Loaded>& instances, const Flags& f, const RunConfig& cfg) {
  Evaluated ev;
  ev.jobs = make_jobs(instances, f.samples, ev.errors);
  const EvalOptions opt{cfg.thresholds, cfg.snap};
  auto results = parallel_map(ev.jobs.size(), cfg.workers, [&](std::size_t i) -> std::variant<ImageEvaluation, std::string> {
    try {
      return evaluate_image(ev.jobs[i].instance->manifest, read_png(ev.jobs[i].image), opt);
    } catch (const Error& e) {
      return std::string(e.what());
    }
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (auto* r = std::get_if<ImageEvaluation>(&results[i])) {
      r->record.seed = ev.jobs[i].seed;
      ev.results.emplace_back(std::move(*r));
    } else {
      ev.errors.push_back({ev.jobs[i].instance->manifest.instance_id, std::get<std::string>(results[i])});
      ev.results.emplace_back(std::nullopt);
    }
  }
  return ev;
}

int run_extract(const Flags& f) {
  RunConfig cfg = resolve(f);
  const auto instances = load_instances(f.shards, cfg, f.task.has_value());
  const auto ev = evaluate_jobs(instances, f, cfg);
  std::string text;
  for (std::size_t i = 0; i < ev.jobs.size(); ++i) {
    if (!ev.results[i]) continue;
    const auto& r = *ev.results[i];
    nlohmann::json line{{"instance_id", r.record.instance_id}, {"seed", r.record.seed}, {"valid", r.record.valid},
                        {"structure", r.structure}};
    if (r.failure) line["failure"] = *r.failure;
    text += line.dump() + "\n";
  }
  if (f.out) {
    write_text(*f.out, text);
  } else {
    std::cout << text;
  }
  return report_errors(ev.errors);
}

int run_eval(const Flags& f) {
  RunConfig cfg = resolve(f);
  const auto instances = load_instances(f.shards, cfg, f.task.has_value());
  const auto buckets = parse_buckets(f.buckets.value_or(""));
  const auto ev = evaluate_jobs(instances, f, cfg);
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < ev.jobs.size(); ++i) {
    if (ev.results[i]) {
      records.push_back(ev.results[i]->record);
    } else {
      EvalRecord r;
      r.instance_id = ev.jobs[i].instance->manifest.instance_id;
      r.seed = ev.jobs[i].seed;
      records.push_back(r);
    }
  }
  const auto best = best_of_k_per_instance(records, cfg.best_of, cfg.task);
  const auto rows = aggregate_report(best, buckets);
  const std::string csv = report_csv(rows);
  std::cout << csv;
  if (f.out) {
    const fs::path dir = *f.out;
    std::string lines;
    for (const auto& r : records) lines += to_json(r).dump() + "\n";
    write_text(dir / "records.jsonl", lines);
    lines.clear();
    for (const auto& r : best) lines += to_json(r).dump() + "\n";
    write_text(dir / "best.jsonl", lines);
    auto json_rows = nlohmann::json::array();
    for (const auto& r : rows) json_rows.push_back(to_json(r));
    write_text(dir / "report.json",
               nlohmann::json{{"task", to_string(cfg.task)},
                              {"best_of", cfg.best_of},
                              {"alignment_unit", "pixels"},
                              {"rows", json_rows}}
                       .dump(2) +
                   "\n");
    write_text(dir / "report.csv", csv);
  }
  return report_errors(ev.errors);
}

int run_render(const Flags& f) {
  RunConfig cfg = resolve(f);
  const auto instances = load_instances(f.shards, cfg, f.task.has_value());
  std::vector<JobError> errors;
  auto jobs = make_jobs(instances, f.samples, errors);
  if (f.instance) {
    std::erase_if(jobs, [&](const Job& j) { return j.instance->manifest.instance_id != *f.instance; });
    if (jobs.empty()) throw InvalidInput("no image for instance " + *f.instance);
  }
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  for (const auto& j : jobs) {
    const auto& m = j.instance->manifest;
    try {
      const auto panel = comparison_panel(m.task, read_png(j.instance->dir / m.solution_png), read_png(j.image));
      const fs::path out = dir / (m.instance_id + "_" + std::to_string(j.seed) + "_compare.png");
      write_png(out, panel);
      std::cout << out.string() << "\n";
    } catch (const Error& e) {
      errors.push_back({m.instance_id, e.what()});
    }
  }
  return report_errors(errors);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("geopix");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("GEOPIX_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("unknown GEOPIX_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Flags& f) {
  auto* cmd = app.add_subcommand(name, help);
  cmd->add_option("--config", f.config, "RunConfig JSON file");
  cmd->add_option("--task", f.task, "square | steiner | maxap");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--out", f.out, "output location");
  cmd->add_option("--thresholds", f.thresholds, "extraction thresholds as inline JSON or a file");
  return cmd;
}

void add_inputs(CLI::App* cmd, Flags& f) {
  cmd->add_option("--shard", f.shards, "shard directory or split directory (repeatable)")->required();
  cmd->add_option("--samples", f.samples, "samples manifest (JSON lines: instance_id, seed, path)");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Geometric problem solving as image generation: datasets, oracles, extraction and evaluation"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = add_command(app, "gen", "generate a dataset", f);
  gen->add_option("--count", f.count, "number of instances");
  gen->add_option("--split", f.split, "split name (default train)");
  gen->add_option("--points", f.points, "point count range A..B (squares per curve for the square task)");
  gen->add_option("--res", f.res, "image resolution");

  auto* solve = add_command(app, "solve", "solve stored instances with an oracle or baseline", f);
  add_inputs(solve, f);
  solve->add_option("--mode", f.mode, "exact | heuristic | mst | random");

  auto* extract = add_command(app, "extract", "extract structures from solution images", f);
  add_inputs(extract, f);

  auto* eval = add_command(app, "eval", "evaluate solution images against the stored optima", f);
  add_inputs(eval, f);
  eval->add_option("--best-of", f.best_of, "samples per instance (lowest seeds first)");
  eval->add_option("--buckets", f.buckets, "point-count buckets, e.g. 4-6,7-8");

  auto* render = add_command(app, "render", "render optimal | produced | difference panels", f);
  add_inputs(render, f);
  render->add_option("--instance", f.instance, "render one instance only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return run_gen(f);
    if (solve->parsed()) return run_solve(f);
    if (extract->parsed()) return run_extract(f);
    if (eval->parsed()) return run_eval(f);
    if (render->parsed()) return run_render(f);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kUsage;
}
