#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sandpile/codec.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/extended.hpp"
#include "sandpile/group.hpp"
#include "sandpile/harmonic.hpp"
#include "sandpile/io.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/render.hpp"
#include "sandpile/stochastic.hpp"
#include "sandpile/verify.hpp"

namespace fs = std::filesystem;
using namespace sandpile;

namespace cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

unsigned job_count(const Common& c) {
  if (c.jobs > 0) return c.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Rational> parse_times(const std::vector<std::string>& items) {
  std::vector<Rational> out;
  for (const auto& s : items) out.push_back(Rational::parse(s));
  return out;
}

Potential potential_for(const std::string& harmonic, DomainPtr d) {
  if (harmonic.empty()) throw Error("--harmonic is required");
  return build_potential(parse_field_source(harmonic, *d), d);
}

// identity, c<k> (constant k), or a SPILE file.
Configuration start_for(const std::string& spec, DomainPtr d, const Common& c) {
  if (spec == "identity") return cached_identity(d, c.cache_dir);
  if (spec.size() == 2 && spec[0] == 'c' && spec[1] >= '0' && spec[1] <= '3')
    return Configuration::constant(d, spec[1] - '0');
  return read_spile(spec, d);
}

std::string stem_png(const std::string& path) { return fs::path(path).replace_extension(".png").string(); }

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void ensure_parent(const std::string& path) { ensure_dir(fs::path(path).parent_path().string()); }

void write_config(const std::string& path, const Configuration& c, int scale) {
  ensure_parent(path);
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".spile") {
    write_spile(path, c);
  } else if (ext == ".pgm") {
    write_pgm(path, c);
  } else {
    RenderOptions ro;
    ro.scale = scale;
    write_image(path, render(c, ro));
  }
}

// Nearest-neighbor resize to a square of side `side`.
Image resize(const Image& img, int side) {
  Image out{side, side, std::vector<std::uint8_t>(static_cast<std::size_t>(side) * side * 3)};
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      Rgb p = img.at(x * img.width / side, y * img.height / side);
      auto* q = &out.rgb[(static_cast<std::size_t>(y) * side + x) * 3];
      q[0] = p.r;
      q[1] = p.g;
      q[2] = p.b;
    }
  return out;
}

// Rows x columns of equally sized tiles with a white gutter.
Image tile(const std::vector<std::vector<Image>>& rows, int side, int gutter = 4) {
  const int nr = static_cast<int>(rows.size());
  int nc = 0;
  for (const auto& r : rows) nc = std::max(nc, static_cast<int>(r.size()));
  const int w = nc * side + (nc + 1) * gutter, h = nr * side + (nr + 1) * gutter;
  Image out{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, 255)};
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < static_cast<int>(rows[r].size()); ++c) {
      const Image& t = rows[r][c];
      const int ox = gutter + c * (side + gutter), oy = gutter + r * (side + gutter);
      for (int y = 0; y < side; ++y)
        std::copy_n(&t.rgb[static_cast<std::size_t>(y) * side * 3], static_cast<std::size_t>(side) * 3,
                    &out.rgb[(static_cast<std::size_t>(oy + y) * w + ox) * 3]);
    }
  return out;
}

std::string frame_name(std::size_t k, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu.%s", k, ext.c_str());
  return buf;
}

}  // namespace

int run_identity(const Common& c, const IdentityArgs& a) {
  auto d = make_domain(a.domain);
  auto t0 = Clock::now();
  Configuration id = cached_identity(d, c.cache_dir);
  write_config(a.out, id, 1);
  if (!a.no_png) write_config(stem_png(a.out), id, a.scale);
  std::printf("identity of %s (%zu vertices) -> %s in %.2fs\n", a.domain.c_str(), d->size(), a.out.c_str(),
              seconds_since(t0));
  return 0;
}

int run_dynamics(const Common& c, const DynamicsArgs& a) {
  auto d = make_domain(a.domain);
  Potential pot = potential_for(a.harmonic, d);
  Configuration start = start_for(a.start, d, c);
  const Rounding rounding = parse_rounding(a.rounding);
  std::vector<Rational> times =
      a.times.empty() ? uniform_times(a.frames, Rational::parse(a.periods)) : parse_times(a.times);
  std::printf("%s on %s: |X| = %lld, support %zu, %zu frames\n", pot.label.c_str(), a.domain.c_str(),
              static_cast<long long>(pot.total), pot.support(), times.size());
  if (a.check_period) std::printf("start: %s\n", verify_periodicity(start, pot).describe().c_str());

  ensure_dir(a.out);
  FrameIndex index((fs::path(a.out) / "frames.csv").string());
  std::vector<std::string> names(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) names[k] = frame_name(k, a.format);
  const bool periodic_check = a.times.empty() && times.size() > 1 && times.back() == Rational(times.back().floor());
  Configuration first = start, last = start;
  auto t0 = Clock::now();
  std::size_t done = 0;
  auto sink = [&](std::size_t k, const Configuration& f) {
    write_config((fs::path(a.out) / names[k]).string(), f, a.scale);
    if (k == 0) first = f;
    if (k + 1 == times.size()) last = f;
    if (++done % 100 == 0) std::fprintf(stderr, "%zu/%zu frames\n", done, times.size());
  };
  if (a.directional) {
    // Incremental and sequential: each frame is the previous one plus the
    // change in drops.
    if (!std::is_sorted(times.begin(), times.end())) throw Error("--directional needs ascending times");
    DirectionalPotentials parts = directional_potentials(parse_field_source(a.harmonic, *d), d);
    Relaxer r(d);
    r.load(start);
    std::vector<std::int64_t> prev(d->size(), 0);
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<std::int64_t> now = drops_at(parts, times[k], rounding);
      for (std::size_t v = 0; v < now.size(); ++v) r.add(static_cast<VertexId>(v), now[v] - prev[v]);
      r.stabilize();
      prev = std::move(now);
      sink(k, r.snapshot());
    }
  } else {
    frames_parallel(start, pot, times, rounding, job_count(c), Rational(1, 64), sink);
  }
  for (std::size_t k = 0; k < times.size(); ++k) index.add(k, times[k], names[k]);
  std::printf("wrote %zu frames to %s in %.1fs\n", times.size(), a.out.c_str(), seconds_since(t0));
  if (periodic_check)
    std::printf("frame 0 %s frame %zu\n", first == last ? "equals" : "DIFFERS FROM", times.size() - 1);
  return 0;
}

int run_stochastic(const Common& c, const StochasticArgs& a) {
  auto d = make_domain(a.domain);
  Potential pot = potential_for(a.harmonic, d);
  Configuration start = start_for(a.start, d, c);
  const Rational periods = Rational::parse(a.periods);
  const auto total_steps = static_cast<std::uint64_t>(ceil_mul(periods, pot.total));

  std::vector<std::uint64_t> vi_steps;
  if (!a.vi_times.empty()) {
    for (const Rational& t : parse_times(a.vi_times)) vi_steps.push_back(static_cast<std::uint64_t>(floor_mul(t, pot.total)));
  } else {
    const Rational step = Rational::parse(a.vi_step);
    if (step <= Rational(0)) throw Error("--vi-step must be positive");
    for (Rational t(0); t <= periods; t += step) vi_steps.push_back(static_cast<std::uint64_t>(floor_mul(t, pot.total)));
  }
  std::sort(vi_steps.begin(), vi_steps.end());
  std::vector<std::pair<std::uint64_t, Rational>> samples;
  for (const Rational& t : parse_times(a.sample_times))
    samples.emplace_back(static_cast<std::uint64_t>(floor_mul(t, pot.total)), t);
  std::sort(samples.begin(), samples.end());

  ensure_dir(a.out);
  const fs::path out(a.out);
  std::ofstream avalanches;
  if (!a.no_avalanches) {
    avalanches.open(out / "avalanches.csv");
    avalanches << "step,time,vertex,size\n";
  }
  std::ofstream vi(out / "vi.csv");
  vi << "step,time,vi\n";
  FrameIndex index((out / "frames.csv").string());

  StochasticChain chain(start, pot, a.seed);
  SizeHistogram sizes;
  std::size_t next_vi = 0, next_sample = 0;
  auto observe = [&] {
    const std::uint64_t k = chain.steps();
    while (next_vi < vi_steps.size() && vi_steps[next_vi] <= k) {
      vi << k << ',' << chain.time().str() << ',' << variation_of_information(start, chain.state()) << '\n';
      ++next_vi;
    }
    while (next_sample < samples.size() && samples[next_sample].first <= k) {
      std::string name = frame_name(next_sample, "png");
      write_config((out / name).string(), chain.state(), a.scale);
      index.add(next_sample, samples[next_sample].second, name);
      ++next_sample;
    }
  };
  auto t0 = Clock::now();
  observe();
  for (std::uint64_t k = 0; k < total_steps; ++k) {
    AvalancheRecord rec = chain.step();
    ++sizes[rec.size];
    if (avalanches.is_open())
      avalanches << chain.steps() << ',' << rec.time.str() << ',' << rec.drop_vertex << ',' << rec.size << '\n';
    observe();
  }
  std::ofstream hist(out / "sizes.csv");
  hist << "size,count\n";
  for (const auto& [s, n] : sizes) hist << s << ',' << n << '\n';
  write_spile((out / "final.spile").string(), chain.state());
  std::printf("%llu drops (|X| = %lld, seed %llu) in %.1fs\n", static_cast<unsigned long long>(total_steps),
              static_cast<long long>(pot.total), static_cast<unsigned long long>(a.seed), seconds_since(t0));
  try {
    PowerLawFit f = fit_power_law(sizes);
    std::printf("avalanche sizes: exponent %.4f (xmin %llu, tail %llu, ks %.4f)\n", f.exponent,
                static_cast<unsigned long long>(f.xmin), static_cast<unsigned long long>(f.tail), f.ks);
  } catch (const Error& e) {
    std::printf("avalanche sizes: no fit (%s)\n", e.what());
  }
  return 0;
}

int run_extended(const Common& c, const ExtendedArgs& a) {
  auto d = make_domain(a.domain);
  if (a.harmonic.empty()) throw Error("--harmonic is required");
  RationalHarmonic h = parse_rational_harmonic(a.harmonic);
  Configuration id = cached_identity(d, c.cache_dir);
  ensure_dir(a.out);
  const fs::path out(a.out);
  if (a.eta) {
    ExtendedConfiguration e = eta(h, id);
    write_spile_x((out / "eta.spilex").string(), e);
    write_config((out / "eta.png").string(), floor_project(e), a.scale);
    std::printf("eta(%s) -> %s\n", h.str().c_str(), (out / "eta.spilex").string().c_str());
  }
  RealPotential rp = real_potential(h, *d);
  std::vector<Rational> times = a.times.empty() ? uniform_times(a.frames) : parse_times(a.times);
  ExtendedConfiguration start = ExtendedConfiguration::from_integer(id);
  FrameIndex index((out / "frames.csv").string());
  for (std::size_t k = 0; k < times.size(); ++k) {
    ExtendedConfiguration f = geodesic_frame(start, rp.x, times[k]);
    write_spile_x((out / frame_name(k, "spilex")).string(), f);
    std::string name = frame_name(k, "png");
    write_config((out / name).string(), floor_project(f), a.scale);
    index.add(k, times[k], name);
  }
  ExtendedConfiguration back = geodesic_frame(start, rp.x, Rational(1));
  std::printf("%s on %s: k = %lld, %zu frames, geodesic %s at t = 1\n", h.str().c_str(), a.domain.c_str(),
              static_cast<long long>(rp.k), times.size(), back == start ? "closes" : "DOES NOT close");
  return 0;
}

int run_encode(const Common&, const EncodeArgs& a) {
  if (a.domain.empty() || a.payload.empty()) throw Error("--domain and --payload are required");
  auto d = make_domain(a.domain);
  Configuration p = encode(read_pbm(a.payload), d);
  write_config(a.out, p, 1);
  if (!a.no_png) write_config(stem_png(a.out), p, a.scale);
  std::printf("encoded %s -> %s (recurrent: %s)\n", a.payload.c_str(), a.out.c_str(), is_recurrent(p) ? "yes" : "no");
  return 0;
}

int run_scramble(const Common&, const ScrambleArgs& a) {
  if (a.in.empty() || a.time.empty()) throw Error("--in and --time are required");
  Configuration p = read_spile(a.in);
  Potential pot = potential_for(a.harmonic, p.domain_ptr());
  const CodecMode mode = a.has_seed ? CodecMode::chain(a.seed) : CodecMode::deterministic();
  Configuration s = scramble(p, pot, Rational::parse(a.time), mode);
  write_config(a.out, s, 1);
  if (!a.no_png) write_config(stem_png(a.out), s, a.scale);
  std::printf("scrambled to t = %s (%s) -> %s, legibility %.4f\n", a.time.c_str(),
              a.has_seed ? "stochastic" : "deterministic", a.out.c_str(), Detector{}.score(s));
  return 0;
}

int run_decode(const Common&, const DecodeArgs& a) {
  if (a.in.empty()) throw Error("--in is required");
  Configuration s = read_spile(a.in);
  Potential pot = potential_for(a.harmonic, s.domain_ptr());
  DecodeOptions opt;
  opt.max_periods = Rational::parse(a.periods);
  opt.time_grid = a.grid;
  opt.detector.threshold = a.threshold;
  const CodecMode mode = a.has_seed ? CodecMode::chain(a.seed) : CodecMode::deterministic();
  DecodeResult r = decode(s, pot, mode, opt);
  ensure_parent(a.out);
  write_pbm(a.out, r.bits);
  std::printf("decoded at t = %s, score %.4f, %llu events -> %s\n", r.time.str().c_str(), r.score,
              static_cast<unsigned long long>(r.events), a.out.c_str());
  if (!a.truth.empty())
    std::printf("pixel accuracy %.4f\n", pixel_accuracy(read_pbm(a.truth), r.bits, s.domain()));
  return 0;
}

int run_fit(const Common&, const FitArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw Error("cannot open '" + a.in + "'");
  std::string header;
  std::getline(in, header);
  // avalanches.csv (size is the 4th column) or sizes.csv (size,count).
  const bool histogram = header.rfind("size,count", 0) == 0;
  if (!histogram && header.rfind("step,time,vertex,size", 0) != 0)
    throw ParseError("expected an avalanches.csv or sizes.csv header, got '" + header + "'");
  SizeHistogram sizes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (histogram && f.size() == 2) sizes[std::stoull(f[0])] += std::stoull(f[1]);
    else if (!histogram && f.size() == 4) ++sizes[std::stoull(f[3])];
    else throw ParseError("malformed row '" + line + "'");
  }
  PowerLawFit fit = a.xmin ? fit_power_law_at(sizes, a.xmin) : fit_power_law(sizes);
  std::printf("exponent %.4f alpha %.4f xmin %llu tail %llu ks %.4f\n", fit.exponent, fit.alpha,
              static_cast<unsigned long long>(fit.xmin), static_cast<unsigned long long>(fit.tail), fit.ks);
  return 0;
}

int run_scaling(const Common& c, const ScalingArgs& a) {
  if (a.sizes.empty() || a.times.empty()) throw Error("--sizes and --times are required");
  const std::vector<Rational> times = parse_times(a.times);
  const Rational anchor = Rational::parse(a.anchor);
  const int n0 = a.sizes.front();
  const int side = *std::max_element(a.sizes.begin(), a.sizes.end()) * a.scale;

  struct Job {
    std::size_t size_idx;
    Rational time;
    std::string path;
  };
  std::vector<DomainPtr> domains;
  std::vector<Potential> pots;
  std::vector<Configuration> starts;
  for (int n : a.sizes) {
    auto d = make_domain("rect:" + std::to_string(n) + "x" + std::to_string(n));
    domains.push_back(d);
    pots.push_back(potential_for(a.harmonic, d));
    starts.push_back(start_for(a.start, d, c));
  }
  ensure_dir(a.out);
  const fs::path out(a.out);
  std::ofstream index(out / "index.csv");
  index << "exponent,size,time,scaled_time,path\n";

  for (int e : a.exponents) {
    // Time runs faster by (N / N0)^e on the larger domain near the anchor.
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < a.sizes.size(); ++s) {
      Rational factor(1);
      for (int k = 0; k < std::abs(e); ++k)
        factor *= e > 0 ? Rational(n0, a.sizes[s]) : Rational(a.sizes[s], n0);
      for (std::size_t t = 0; t < times.size(); ++t) {
        Rational ts = anchor + (times[t] - anchor) * factor;
        char name[96];
        std::snprintf(name, sizeof name, "e%d_n%d_t%02zu.png", e, a.sizes[s], t);
        jobs.push_back({s, ts, (out / name).string()});
        index << e << ',' << a.sizes[s] << ',' << times[t].str() << ',' << ts.str() << ',' << name << '\n';
      }
    }
    std::vector<Image> tiles(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(job_count(c), jobs.size()); ++w)
      pool.emplace_back([&] {
        try {
          for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
            const Job& j = jobs[k];
            Configuration f = frame(starts[j.size_idx], pots[j.size_idx], j.time);
            RenderOptions ro;
            ro.scale = a.scale;
            Image img = render(f, ro);
            write_image(j.path, img);
            tiles[k] = resize(img, side);
          }
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs.size();
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    std::vector<std::vector<Image>> rows(a.sizes.size());
    for (std::size_t k = 0; k < jobs.size(); ++k) rows[jobs[k].size_idx].push_back(std::move(tiles[k]));
    const std::string grid = (out / ("grid_e" + std::to_string(e) + ".png")).string();
    write_image(grid, tile(rows, side));
    std::printf("exponent %d: %zu frames -> %s\n", e, jobs.size(), grid.c_str());
  }
  return 0;
}

int run_render(const Common&, const RenderArgs& a) {
  if (a.in.empty() || a.out.empty()) throw Error("--in and --out are required");
  RenderOptions ro;
  ro.scale = a.scale;
  ro.allow_unstable = a.allow_unstable;
  const std::string ext = fs::path(a.in).extension().string();
  Configuration conf = ext == ".spilex" ? floor_project(read_spile_x(a.in)) : read_spile(a.in);
  ensure_parent(a.out);
  write_image(a.out, render(conf, ro));
  std::printf("%s -> %s\n", a.in.c_str(), a.out.c_str());
  return 0;
}

int run_verify(const Common&, const VerifyArgs& a) {
  int failed = 0;
  for (const CheckResult& r : verify_suite(a.seed)) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += !r.pass;
  }
  std::printf("%s\n", failed ? "verify: FAILED" : "verify: all checks passed");
  return failed ? 1 : 0;
}

}  // namespace cli
