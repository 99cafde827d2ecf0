#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "sandpile/error.hpp"

namespace {

struct Program {
  CLI::App app{"Sandpile identity dynamics under harmonic fields"};
  cli::Common common;
  std::string experiment;
  std::function<int()> action;

  cli::IdentityArgs identity;
  cli::DynamicsArgs dynamics;
  cli::StochasticArgs stochastic;
  cli::ExtendedArgs extended;
  cli::EncodeArgs encode;
  cli::ScrambleArgs scramble;
  cli::DecodeArgs decode;
  cli::FitArgs fit;
  cli::ScalingArgs scaling;
  cli::RenderArgs render;
  cli::VerifyArgs verify;

  Program();
};

template <class Args>
CLI::App* command(Program& p, const char* name, const char* help, Args& args,
                  int (*run)(const cli::Common&, const Args&)) {
  CLI::App* sub = p.app.add_subcommand(name, help);
  sub->callback([&p, &args, run] { p.action = [&p, &args, run] { return run(p.common, args); }; });
  return sub;
}

Program::Program() {
  app.set_version_flag("--version", "sandpile 1.0");
  app.add_option("--jobs", common.jobs, "worker threads (default: all cores)");
  app.add_option("--cache-dir", common.cache_dir, "identity cache (default: $SANDPILE_CACHE_DIR)");
  app.add_option("--experiment", experiment, "run every entry of a JSON experiment file")->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);

  auto* s = command(*this, "identity", "compute the sandpile identity", identity, cli::run_identity);
  s->add_option("--domain", identity.domain, "domain descriptor")->capture_default_str();
  s->add_option("--out", identity.out, "SPILE output; a PNG is written next to it")->capture_default_str();
  s->add_flag("--no-png", identity.no_png);
  s->add_option("--scale", identity.scale)->check(CLI::PositiveNumber);

  s = command(*this, "dynamics", "frames of the harmonic dynamics", dynamics, cli::run_dynamics);
  s->add_option("--domain", dynamics.domain)->capture_default_str();
  s->add_option("--harmonic", dynamics.harmonic, "basis id, polynomial, min:/quadrant field")->required();
  s->add_option("--start", dynamics.start, "identity, c0..c3 or a SPILE file")->capture_default_str();
  s->add_option("--frames", dynamics.frames, "frames per period")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--periods", dynamics.periods)->capture_default_str();
  s->add_option("--times", dynamics.times, "explicit times, overrides --frames")->delimiter(',');
  s->add_option("--rounding", dynamics.rounding, "floor, ceil or round")->capture_default_str();
  s->add_option("--out", dynamics.out, "output directory")->capture_default_str();
  s->add_option("--format", dynamics.format, "png, ppm, pgm or spile")
      ->capture_default_str()
      ->check(CLI::IsMember({"png", "ppm", "pgm", "spile"}));
  s->add_option("--scale", dynamics.scale)->check(CLI::PositiveNumber);
  s->add_flag("--check-period", dynamics.check_period, "verify that the start returns after one period");
  s->add_flag("--directional", dynamics.directional, "round the four side potentials separately");

  s = command(*this, "stochastic", "single-grain Markov chain", stochastic, cli::run_stochastic);
  s->add_option("--domain", stochastic.domain)->capture_default_str();
  s->add_option("--harmonic", stochastic.harmonic)->required();
  s->add_option("--start", stochastic.start)->capture_default_str();
  s->add_option("--periods", stochastic.periods)->capture_default_str();
  s->add_option("--seed", stochastic.seed)->capture_default_str();
  s->add_option("--out", stochastic.out)->capture_default_str();
  s->add_option("--vi-step", stochastic.vi_step, "VI sampling interval in periods")->capture_default_str();
  s->add_option("--vi-times", stochastic.vi_times, "explicit VI sample times")->delimiter(',');
  s->add_option("--sample-times", stochastic.sample_times, "times at which to write images")->delimiter(',');
  s->add_flag("--no-avalanches", stochastic.no_avalanches, "skip the per-drop avalanches.csv");
  s->add_option("--scale", stochastic.scale)->check(CLI::PositiveNumber);

  s = command(*this, "extended", "closed geodesics of the extended model", extended, cli::run_extended);
  s->add_option("--domain", extended.domain)->capture_default_str();
  s->add_option("--harmonic", extended.harmonic, "rational combination, e.g. '1/2:H2a;H1b'")->required();
  s->add_option("--times", extended.times)->delimiter(',');
  s->add_option("--frames", extended.frames)->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--out", extended.out)->capture_default_str();
  s->add_flag("--eta", extended.eta, "also write eta(harmonic)");
  s->add_option("--scale", extended.scale)->check(CLI::PositiveNumber);

  s = command(*this, "encode", "encode a PBM payload as a recurrent configuration", encode, cli::run_encode);
  s->add_option("--domain", encode.domain)->required();
  s->add_option("--payload", encode.payload, "PBM image matching the domain box")->required();
  s->add_option("--out", encode.out)->capture_default_str();
  s->add_flag("--no-png", encode.no_png);
  s->add_option("--scale", encode.scale)->check(CLI::PositiveNumber);

  s = command(*this, "scramble", "run the dynamics on an encoded payload", scramble, cli::run_scramble);
  s->add_option("--in", scramble.in)->required();
  s->add_option("--harmonic", scramble.harmonic)->required();
  s->add_option("--time", scramble.time)->required();
  auto* seed = s->add_option("--seed", scramble.seed, "use the stochastic chain with this seed");
  s->add_option("--out", scramble.out)->capture_default_str();
  s->add_flag("--no-png", scramble.no_png);
  s->add_option("--scale", scramble.scale)->check(CLI::PositiveNumber);
  s->callback([this, seed] {
    scramble.has_seed = seed->count() > 0;
    action = [this] { return cli::run_scramble(common, scramble); };
  });

  s = command(*this, "decode", "continue the dynamics until the payload is legible", decode, cli::run_decode);
  s->add_option("--in", decode.in)->required();
  s->add_option("--harmonic", decode.harmonic)->required();
  seed = s->add_option("--seed", decode.seed, "decode with the stochastic chain");
  s->add_option("--periods", decode.periods)->capture_default_str();
  s->add_option("--grid", decode.grid, "scramble times are multiples of 1/grid")->capture_default_str();
  s->add_option("--threshold", decode.threshold)->capture_default_str();
  s->add_option("--out", decode.out)->capture_default_str();
  s->add_option("--truth", decode.truth, "reference PBM for a pixel accuracy report");
  s->callback([this, seed] {
    decode.has_seed = seed->count() > 0;
    action = [this] { return cli::run_decode(common, decode); };
  });

  s = command(*this, "fit", "power-law fit of avalanche sizes", fit, cli::run_fit);
  s->add_option("--in", fit.in, "avalanches.csv or sizes.csv")->required()->check(CLI::ExistingFile);
  s->add_option("--xmin", fit.xmin, "fixed xmin (default: minimize KS)");

  s = command(*this, "scaling", "frames at absolute and size-scaled times", scaling, cli::run_scaling);
  s->add_option("--harmonic", scaling.harmonic)->required();
  s->add_option("--sizes", scaling.sizes)->delimiter(',')->capture_default_str();
  s->add_option("--times", scaling.times)->delimiter(',')->required();
  s->add_option("--exponents", scaling.exponents, "scale time by (N0/N)^e around --anchor; one grid per e")
      ->delimiter(',')
      ->capture_default_str();
  s->add_option("--anchor", scaling.anchor)->capture_default_str();
  s->add_option("--start", scaling.start)->capture_default_str();
  s->add_option("--out", scaling.out)->capture_default_str();
  s->add_option("--scale", scaling.scale)->check(CLI::PositiveNumber);

  s = command(*this, "render", "render a SPILE or SPILE-X file", render, cli::run_render);
  s->add_option("--in", render.in)->required()->check(CLI::ExistingFile);
  s->add_option("--out", render.out, ".png or .ppm")->required();
  s->add_option("--scale", render.scale)->check(CLI::PositiveNumber);
  s->add_flag("--allow-unstable", render.allow_unstable);

  s = command(*this, "verify", "invariant suite on tiny domains", verify, cli::run_verify);
  s->add_option("--seed", verify.seed)->capture_default_str();
}

std::string scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  throw sandpile::ParseError("unsupported experiment value " + v.dump());
}

// {"runs": [{"command": name, "args": {option: value}}], "defaults": {...}}.
// true becomes a flag, false is dropped, arrays are joined with commas.
std::vector<std::vector<std::string>> experiment_argv(const std::string& path) {
  std::ifstream in(path);
  nlohmann::json doc = nlohmann::json::parse(in);
  const nlohmann::json defaults = doc.value("defaults", nlohmann::json::object());
  std::vector<std::vector<std::string>> out;
  for (const auto& run : doc.at("runs")) {
    std::vector<std::string> argv{"sandpile", run.at("command").get<std::string>()};
    nlohmann::json args = defaults;
    args.update(run.value("args", nlohmann::json::object()));
    for (const auto& [key, value] : args.items()) {
      if (value.is_boolean()) {
        if (value.get<bool>()) argv.push_back("--" + key);
        continue;
      }
      argv.push_back("--" + key);
      if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar(item);
        argv.push_back(joined);
      } else {
        argv.push_back(scalar(value));
      }
    }
    out.push_back(std::move(argv));
  }
  return out;
}

int parse_and_run(const std::vector<std::string>& args, const cli::Common* inherited, std::string* experiment) {
  auto p = std::make_unique<Program>();
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    p->app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return p->app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return p->app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return p->app.exit(e);
  } catch (const CLI::ParseError& e) {
    p->app.exit(e);
    return 2;
  }
  if (inherited) {
    if (p->common.jobs == 0) p->common.jobs = inherited->jobs;
    if (p->common.cache_dir.empty()) p->common.cache_dir = inherited->cache_dir;
  }
  if (experiment && !p->experiment.empty()) {
    *experiment = p->experiment;
    if (p->action) {
      std::cerr << "--experiment cannot be combined with a subcommand\n";
      return 2;
    }
    int rc = 0;
    for (const auto& run : experiment_argv(p->experiment)) {
      std::string line;
      for (std::size_t k = 1; k < run.size(); ++k) line += (k > 1 ? " " : "") + run[k];
      std::printf("== %s\n", line.c_str());
      std::fflush(stdout);
      rc = parse_and_run(run, &p->common, nullptr);
      if (rc != 0) return rc;
    }
    return rc;
  }
  if (!p->action) {
    std::cerr << p->app.help();
    return 2;
  }
  return p->action();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string experiment;
  try {
    return parse_and_run(args, nullptr, &experiment);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: experiment file '" << experiment << "': " << e.what() << "\n";
    return 2;
  } catch (const sandpile::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
