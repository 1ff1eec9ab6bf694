#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "randgreen/errors.hpp"
#include "randgreen/families.hpp"
#include "randgreen/maps.hpp"
#include "randgreen/rng.hpp"
#include "randgreen/stats.hpp"

namespace randgreen {

// Base dynamics (F, Lambda) on parameter space.
//
//   IID            parameters drawn fresh each step, uniform over a product
//                  of disks; Lambda is that product law.
//   Cycle          explicit finite parameter list, advanced cyclically;
//                  Lambda is uniform on the list.
//   ParameterMap   one complex parameter on an invariant circle
//                  center + radius * u, driven by angle doubling
//                  u -> u^2 / |u^2|; Lambda is approximated by long-orbit
//                  time averages (burn-in, then stride subsampling).
enum class DriverKind { IID, Cycle, ParameterMap };

struct DriverSpec {
  DriverKind kind = DriverKind::IID;
  std::string family = "quadratic";
  int k = 1;
  int d = 2;

  // IID
  std::vector<std::complex<double>> centers;
  std::vector<double> radii;

  // Cycle
  std::vector<std::vector<std::complex<double>>> cycle;

  // ParameterMap
  std::complex<double> pmap_center = 0.0;
  double pmap_radius = 1.0;
  int burn_in = 100;
  int stride = 10;

  int param_count() const { return family_param_count(family, k); }
};

struct DriverState {
  std::vector<std::complex<double>> parameter;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::uint64_t rng_stream = 0;
};

inline constexpr double kDegeneracyFloor = 1e-8;
inline constexpr int kRejectionCap = 10000;

namespace detail {

inline RationalMap map_at(const DriverSpec& spec,
                          const std::vector<std::complex<double>>& params) {
  return make_family_map(spec.family, spec.k, spec.d, params);
}

// One admissible IID draw from the given stream.
inline std::vector<std::complex<double>> iid_draw(const DriverSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    std::vector<std::complex<double>> p(spec.param_count());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto center = i < spec.centers.size() ? spec.centers[i] : 0.0;
      const double radius = i < spec.radii.size() ? spec.radii[i] : spec.radii.back();
      p[i] = center + radius * rng.unit_disk();
    }
    if (distance_to_degenerate(map_at(spec, p)) > kDegeneracyFloor) return p;
  }
  throw RejectionExhausted{};
}

// IID parameter of absolute sequence index j, random-access: each index has
// its own counter stream, so continuations and parallel consumers agree.
inline std::vector<std::complex<double>> iid_param(const DriverSpec& spec,
                                                   std::uint64_t seed, std::uint64_t j) {
  Rng rng(seed, stream::tagged(stream::kDriver, j));
  return iid_draw(spec, rng);
}

// Angle-doubling step on the invariant circle, kept on the circle by
// renormalization (the raw square drifts radially in finite precision).
inline std::complex<double> pmap_step(std::complex<double> u) {
  u = u * u;
  return u / std::abs(u);
}

inline std::vector<std::complex<double>> pmap_params(const DriverSpec& spec,
                                                     std::complex<double> u) {
  return {spec.pmap_center + spec.pmap_radius * u};
}

}  // namespace detail

inline DriverState driver_init(const DriverSpec& spec, std::uint64_t seed) {
  DriverState st;
  st.seed = seed;
  st.rng_stream = stream::tagged(stream::kDriver, 0);
  switch (spec.kind) {
    case DriverKind::IID:
      st.parameter = detail::iid_param(spec, seed, 0);
      break;
    case DriverKind::Cycle:
      st.parameter = spec.cycle.front();
      break;
    case DriverKind::ParameterMap: {
      Rng rng(seed, st.rng_stream);
      std::complex<double> u = rng.unit_circle();
      for (int i = 0; i < spec.burn_in; ++i) u = detail::pmap_step(u);
      st.parameter = detail::pmap_params(spec, u);
      if (distance_to_degenerate(detail::map_at(spec, st.parameter)) <= kDegeneracyFloor)
        throw DegenerateEncounter(0);
      break;
    }
  }
  return st;
}

// [f_0, ..., f_n] driven from the given state.  Pure: the state is not
// mutated; the same (spec, state, n) always yields the same maps.
inline std::vector<RationalMap> generate_sequence(const DriverSpec& spec,
                                                  const DriverState& state, int n) {
  std::vector<RationalMap> maps;
  maps.reserve(n + 1);
  auto push_checked = [&](const std::vector<std::complex<double>>& params, int idx) {
    RationalMap f = detail::map_at(spec, params);
    if (distance_to_degenerate(f) <= kDegeneracyFloor) throw DegenerateEncounter(idx);
    maps.push_back(std::move(f));
  };

  switch (spec.kind) {
    case DriverKind::IID: {
      maps.push_back(detail::map_at(spec, state.parameter));
      for (int i = 1; i <= n; ++i)
        maps.push_back(detail::map_at(spec, detail::iid_param(spec, state.seed, state.step + i)));
      break;
    }
    case DriverKind::Cycle: {
      // Locate the state's position in the cycle (init always starts at 0).
      const std::size_t offset = state.step % spec.cycle.size();
      for (int i = 0; i <= n; ++i)
        push_checked(spec.cycle[(offset + i) % spec.cycle.size()], i);
      break;
    }
    case DriverKind::ParameterMap: {
      // the stored parameter already encodes a circle point; recovering it
      // verbatim keeps continuations bitwise-faithful
      std::complex<double> u = (state.parameter[0] - spec.pmap_center) / spec.pmap_radius;
      for (int i = 0; i <= n; ++i) {
        push_checked(detail::pmap_params(spec, u), i);
        u = detail::pmap_step(u);
      }
      break;
    }
  }
  return maps;
}

// Birkhoff average of log dist(f_i, M) along the driven sequence.
struct BirkhoffLogDist {
  double mean = 0.0;
  std::vector<double> prefix_means;
};

inline BirkhoffLogDist birkhoff_logdist(const DriverSpec& spec, const DriverState& state,
                                        int n) {
  const auto maps = generate_sequence(spec, state, n - 1);
  BirkhoffLogDist out;
  out.prefix_means.reserve(n);
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    acc += std::log(distance_to_degenerate(maps[i]));
    out.prefix_means.push_back(acc / double(i + 1));
  }
  out.mean = out.prefix_means.back();
  return out;
}

// One Lambda sample plus a state from which the driver's own F continues it
// forward (generate_sequence on the continuation yields [f, F(f), ...]).
struct LambdaDraw {
  std::vector<std::complex<double>> parameter;
  DriverState continuation;
};

// count samples of Lambda.  IID and Cycle draws are independent across the
// index with per-index streams; ParameterMap subsamples one long orbit
// (burn-in, then every stride-th point).
inline std::vector<LambdaDraw> sample_lambda_draws(const DriverSpec& spec,
                                                   std::uint64_t seed, int count) {
  std::vector<LambdaDraw> out;
  out.reserve(count);
  switch (spec.kind) {
    case DriverKind::IID:
      for (int i = 0; i < count; ++i) {
        Rng rng(seed, stream::tagged(stream::kLambda, i));
        LambdaDraw draw;
        draw.parameter = detail::iid_draw(spec, rng);
        draw.continuation = DriverState{draw.parameter, mix64(0xa1fa ^ std::uint64_t(i)),
                                        seed, stream::tagged(stream::kLambda, i)};
        out.push_back(std::move(draw));
      }
      break;
    case DriverKind::Cycle:
      for (int i = 0; i < count; ++i) {
        Rng rng(seed, stream::tagged(stream::kLambda, i));
        const std::uint64_t j = rng.next_u64() % spec.cycle.size();
        out.push_back({spec.cycle[j], DriverState{spec.cycle[j], j, seed, 0}});
      }
      break;
    case DriverKind::ParameterMap: {
      Rng rng(seed, stream::tagged(stream::kLambda, 0));
      std::complex<double> u = rng.unit_circle();
      for (int i = 0; i < spec.burn_in; ++i) u = detail::pmap_step(u);
      for (int i = 0; i < count; ++i) {
        const auto params = detail::pmap_params(spec, u);
        out.push_back({params, DriverState{params, 0, seed, 0}});
        for (int s = 0; s < spec.stride; ++s) u = detail::pmap_step(u);
      }
      break;
    }
  }
  return out;
}

inline std::vector<RationalMap> sample_lambda(const DriverSpec& spec, std::uint64_t seed,
                                              int count) {
  const auto draws = sample_lambda_draws(spec, seed, count);
  std::vector<RationalMap> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(detail::map_at(spec, draws[i].parameter));
    if (distance_to_degenerate(out.back()) <= kDegeneracyFloor)
      throw DegenerateEncounter(i);
  }
  return out;
}

// State advanced to the start of the continuation at step m.  Resuming a
// sequence from here reproduces the tail of the one-shot sequence.
inline DriverState advance(const DriverSpec& spec, const DriverState& state, int m) {
  DriverState st = state;
  st.step = state.step + m;
  switch (spec.kind) {
    case DriverKind::IID:
      if (m > 0) st.parameter = detail::iid_param(spec, state.seed, st.step);
      break;
    case DriverKind::Cycle:
      st.parameter = spec.cycle[st.step % spec.cycle.size()];
      break;
    case DriverKind::ParameterMap: {
      // the stored parameter already encodes a circle point; recovering it
      // verbatim keeps continuations bitwise-faithful
      std::complex<double> u = (state.parameter[0] - spec.pmap_center) / spec.pmap_radius;
      for (int i = 0; i < m; ++i) u = detail::pmap_step(u);
      st.parameter = detail::pmap_params(spec, u);
      break;
    }
  }
  return st;
}

}  // namespace randgreen
