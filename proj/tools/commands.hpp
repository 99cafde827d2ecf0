#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cli {

struct Common {
  unsigned jobs = 0;  // 0: hardware concurrency
  std::string cache_dir;
};

struct IdentityArgs {
  std::string domain = "rect:255x255";
  std::string out = "identity.spile";
  bool no_png = false;
  int scale = 1;
};

struct DynamicsArgs {
  std::string domain = "rect:255x255";
  std::string harmonic;
  std::string start = "identity";
  std::int64_t frames = 600;
  std::string periods = "1";
  std::vector<std::string> times;  // overrides frames/periods
  std::string rounding = "floor";
  std::string out = "frames";
  std::string format = "png";
  int scale = 1;
  bool check_period = false;
  bool directional = false;  // one rounded schedule per side of the domain
};

struct StochasticArgs {
  std::string domain = "rect:63x63";
  std::string harmonic;
  std::string start = "identity";
  std::string periods = "1";
  std::uint64_t seed = 1;
  std::string out = "stochastic";
  std::string vi_step = "1/16";
  std::vector<std::string> vi_times;  // overrides vi_step
  std::vector<std::string> sample_times;
  bool no_avalanches = false;
  int scale = 1;
};

struct ExtendedArgs {
  std::string domain = "rect:15x15";
  std::string harmonic;
  std::vector<std::string> times;
  std::int64_t frames = 12;
  std::string out = "extended";
  bool eta = false;
  int scale = 1;
};

struct EncodeArgs {
  std::string domain;
  std::string payload;
  std::string out = "payload.spile";
  bool no_png = false;
  int scale = 1;
};

struct ScrambleArgs {
  std::string in;
  std::string harmonic;
  std::string time;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out = "scrambled.spile";
  bool no_png = false;
  int scale = 1;
};

struct DecodeArgs {
  std::string in;
  std::string harmonic;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string periods = "2";
  std::int64_t grid = 0;
  double threshold = 0.95;
  std::string out = "decoded.pbm";
  std::string truth;  // optional reference payload for an accuracy report
};

struct FitArgs {
  std::string in;
  std::uint64_t xmin = 0;  // 0: choose by KS distance
};

struct ScalingArgs {
  std::string harmonic;
  std::vector<int> sizes{63, 255};
  std::vector<std::string> times;
  std::vector<int> exponents{0};
  std::string anchor = "0";
  std::string start = "identity";
  std::string out = "scaling";
  int scale = 1;
};

struct RenderArgs {
  std::string in;
  std::string out;
  int scale = 1;
  bool allow_unstable = false;
};

struct VerifyArgs {
  std::uint64_t seed = 1;
};

int run_identity(const Common& c, const IdentityArgs& a);
int run_dynamics(const Common& c, const DynamicsArgs& a);
int run_stochastic(const Common& c, const StochasticArgs& a);
int run_extended(const Common& c, const ExtendedArgs& a);
int run_encode(const Common& c, const EncodeArgs& a);
int run_scramble(const Common& c, const ScrambleArgs& a);
int run_decode(const Common& c, const DecodeArgs& a);
int run_fit(const Common& c, const FitArgs& a);
int run_scaling(const Common& c, const ScalingArgs& a);
int run_render(const Common& c, const RenderArgs& a);
int run_verify(const Common& c, const VerifyArgs& a);

}  // namespace cli
