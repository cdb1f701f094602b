#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "itercert/bsp.hpp"
#include "itercert/errors.hpp"
#include "itercert/families.hpp"
#include "itercert/pipeline.hpp"
#include "itercert/planner.hpp"
#include "itercert/poly.hpp"
#include "itercert/report.hpp"
#include "itercert/stream.hpp"

namespace itercert::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kFailures = 2;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StreamError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Engine parse_engine(const std::string& s) {
  if (s == "krawczyk") return Engine::krawczyk;
  if (s == "alpha") return Engine::alpha;
  throw UsageError("unknown engine '" + s + "'");
}

inline bool parse_on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw UsageError("expected on or off, got '" + s + "'");
}

/// "root:0;0:1;1:5;01:2" -> {"" -> 0, "0" -> 1, ...}
inline std::map<std::string, std::size_t> parse_script(const std::string& text) {
  std::map<std::string, std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("script entry '" + item + "' lacks ':'");
    std::string path = item.substr(0, colon);
    if (path == "root") path.clear();
    out[path] = detail::parse_uint(item.substr(colon + 1), "script");
  }
  return out;
}

/// Temporary spool file removed on destruction.
class Spool {
 public:
  Spool() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("itercert-spool-" + std::to_string(rd()) + ".csol");
  }
  ~Spool() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  Spool(const Spool&) = delete;
  Spool& operator=(const Spool&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct InputOptions {
  std::string system_path;
  std::string candidates_path;
  std::string generator;
};

struct LoadedInput {
  std::unique_ptr<SolutionStream> stream;
  std::shared_ptr<const PolynomialSystem> system;
  std::unique_ptr<Spool> spool;
};

/// Opens candidates (file, '-' for stdin, or generator) and the system.
/// in_memory loads every candidate (median and scripted strategies).
inline LoadedInput load_input(const InputOptions& o, bool need_system, bool in_memory, std::istream& stdin_stream) {
  LoadedInput in;
  if (o.candidates_path.empty() == o.generator.empty())
    throw UsageError("give exactly one of --candidates and --generator");
  if (!o.generator.empty()) {
    auto g = make_generator(o.generator);
    in.stream = std::move(g.stream);
    in.system = g.system;
  } else if (o.candidates_path == "-") {
    in.spool = std::make_unique<Spool>();
    in.stream = spool(stdin_stream, in.spool->path());
  } else {
    in.stream = std::make_unique<FileStream>(o.candidates_path);
  }
  if (!o.system_path.empty())
    in.system = std::make_shared<const PolynomialSystem>(parse_system(read_file(o.system_path)));
  if (need_system && !in.system) throw UsageError("--system is required for this input");
  if (in.system && in.system->n_vars() != in.stream->dim())
    throw DimensionError("system has " + std::to_string(in.system->n_vars()) + " variables but candidates have " +
                         std::to_string(in.stream->dim()) + " coordinates");
  if (in_memory) {
    auto points = collect(*in.stream);
    const std::size_t n = in.stream->dim();
    in.stream = std::make_unique<InMemoryStream>(std::move(points), n);
  }
  return in;
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StreamError("cannot open " + path + " for writing");
  f << text;
}

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
               std::istream& input = std::cin) {
  CLI::App app{"Low-memory certification of polynomial-system candidates"};
  app.require_subcommand(1);

  InputOptions io;
  std::size_t k = 64;
  double epsilon = 1e-6;
  std::string strategy = "mean";
  std::string engine = "krawczyk";
  std::string bitmask = "on";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t oversize = 16;
  std::string report_path;
  bool count_calls = false;
  std::string script;
  bool members = false;
  std::uint64_t d = 0;
  std::uint64_t n = 0;
  std::string out_path;
  std::string system_out;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--system", io.system_path, "System file");
    sub->add_option("--candidates", io.candidates_path, "Candidate file (CSOL), '-' for stdin");
    sub->add_option("--generator", io.generator, "Generator spec, e.g. product:kinds=rrc,seed=7");
  };
  auto add_build = [&](CLI::App* sub) {
    sub->add_option("--part-size,-k", k, "Maximum part size k")->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", epsilon, "Split collar in Re(x1) units")->check(CLI::PositiveNumber);
    sub->add_option("--strategy", strategy, "median | mean | random | scripted");
    sub->add_option("--bitmask", bitmask, "on | off");
    sub->add_option("--seed", seed, "Seed for the random strategy");
    sub->add_option("--script", script, "Scripted splits, e.g. root:0;0:1;1:5;01:2");
  };

  CLI::App* certify = app.add_subcommand("certify", "Build the tree and certify leaf by leaf");
  add_input(certify);
  add_build(certify);
  certify->add_option("--engine", engine, "krawczyk | alpha");
  certify->add_option("--threads", threads, "Leaf workers")->check(CLI::PositiveNumber);
  certify->add_option("--oversize-factor", oversize, "Skip leaves above factor * k")->check(CLI::PositiveNumber);
  certify->add_option("--report", report_path, "Report file (default stdout)");
  certify->add_flag("--count-calls", count_calls, "Append measured counters");

  CLI::App* plan_cmd = app.add_subcommand("plan", "Memory planner");
  plan_cmd->add_option("--d", d, "Number of candidates")->required();
  plan_cmd->add_option("--n", n, "Number of variables")->required();
  plan_cmd->add_option("--engine", engine, "krawczyk | alpha");
  plan_cmd->add_option("--bitmask", bitmask, "on | off");

  CLI::App* tree_cmd = app.add_subcommand("tree", "Build the tree and dump it");
  add_input(tree_cmd);
  add_build(tree_cmd);
  tree_cmd->add_flag("--members", members, "List stream indices under each leaf");
  tree_cmd->add_option("--out", out_path, "Dump file (default stdout)");

  CLI::App* gen_cmd = app.add_subcommand("generate", "Write generated candidates to a CSOL file");
  gen_cmd->add_option("--generator", io.generator, "Generator spec")->required();
  gen_cmd->add_option("--out", out_path, "Candidate file")->required();
  gen_cmd->add_option("--system-out", system_out, "Also write the system");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (plan_cmd->parsed()) {
      const PlanReport p = plan(d, n, parse_engine(engine), parse_on_off(bitmask));
      out << format_plan(p);
      return kOk;
    }

    BuildConfig cfg;
    cfg.k = k;
    cfg.epsilon = epsilon;
    cfg.strategy = parse_strategy(strategy);
    cfg.seed = seed;
    cfg.bitmask = parse_on_off(bitmask);
    if (!script.empty()) cfg.script = parse_script(script);
    if (cfg.strategy == SplitStrategy::scripted && cfg.script.empty())
      throw UsageError("scripted strategy needs --script");
    const bool in_memory = cfg.strategy == SplitStrategy::median || cfg.strategy == SplitStrategy::scripted;

    if (gen_cmd->parsed()) {
      auto g = make_generator(io.generator);
      std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
      if (!f) throw StreamError("cannot open " + out_path + " for writing");
      csol::write(f, *g.stream);
      if (!system_out.empty()) {
        if (!g.system) throw UsageError("this generator has no system");
        write_output(system_out, format_system(*g.system), out);
      }
      return kOk;
    }

    if (tree_cmd->parsed()) {
      LoadedInput in = load_input(io, false, in_memory, input);
      const BspTree tree = build_tree(*in.stream, cfg);
      write_output(out_path, dump_tree(tree, members ? in.stream.get() : nullptr), out);
      return kOk;
    }

    LoadedInput in = load_input(io, true, in_memory, input);
    PipelineOptions opt;
    opt.engine = parse_engine(engine);
    opt.threads = threads;
    opt.oversize_factor = oversize;
    const RunReport r = certify_main(*in.stream, *in.system, cfg, opt);
    write_output(report_path, format_report(r, count_calls), out);
    return r.tally.failures.empty() ? kOk : kFailures;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace itercert::cli
