#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "randgreen/green.hpp"
#include "randgreen/maps.hpp"
#include "randgreen/observables.hpp"
#include "randgreen/parallel.hpp"
#include "randgreen/projective.hpp"
#include "randgreen/stats.hpp"

namespace randgreen {

// ---------------------------------------------------------------------------
// Bowen metric for the driven sequence:
//   d^n(x, y) = max_{i=0..n-1} dist(f_i o ... o f_1(x), f_i o ... o f_1(y)),
// with the i = 0 term the plain distance.  maps[0] plays f_1.

inline std::vector<ProjPoint> forward_orbit(const std::vector<RationalMap>& maps,
                                            const ProjPoint& x, int len) {
  std::vector<ProjPoint> orbit;
  orbit.reserve(len);
  orbit.push_back(x);
  ProjPoint cur = x;
  for (int i = 1; i < len; ++i) {
    cur = evaluate(maps[i - 1], cur).point;
    orbit.push_back(cur);
  }
  return orbit;
}

inline double bowen_distance(const std::vector<RationalMap>& maps, const ProjPoint& x,
                             const ProjPoint& y, int n) {
  const auto ox = forward_orbit(maps, x, n);
  const auto oy = forward_orbit(maps, y, n);
  double m = 0;
  for (int i = 0; i < n; ++i) m = std::max(m, fs_distance(ox[i], oy[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Greedy (n, eps)-separated subset of M FS-uniform candidates.  The greedy
// cardinality is a lower bound for s(n, eps, f_1); ties at exactly eps go to
// the earlier candidate index.
//
// Candidates are screened against accepted points through a spatial hash on
// the step-0 position: a pair with step-0 distance >= eps is already
// separated, so only near neighbors need their orbits compared.  For k = 1
// the hash lives on the Bloch sphere embedding of P^1; higher k falls back
// to a linear scan.

namespace detail {

inline Eigen::Vector3d bloch(const ProjPoint& x) {
  const std::complex<double> a = x.coords[0], b = x.coords[1];
  const std::complex<double> ab = std::conj(a) * b;
  return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
}

struct BlochGrid {
  double cell;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;

  explicit BlochGrid(double eps) : cell(std::max(2.0 * std::sin(eps), 1e-6)) {}

  std::uint64_t key(const Eigen::Vector3d& p) const {
    const auto q = [&](double v) {
      return std::uint64_t(std::int64_t(std::floor(v / cell)) + (1 << 20));
    };
    return (q(p.x()) << 42) ^ (q(p.y()) << 21) ^ q(p.z());
  }

  void insert(const Eigen::Vector3d& p, int idx) { buckets[key(p)].push_back(idx); }

  template <typename Fn>
  void for_neighbors(const Eigen::Vector3d& p, Fn&& fn) const {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const Eigen::Vector3d q = p + cell * Eigen::Vector3d(dx, dy, dz);
          const auto it = buckets.find(key(q));
          if (it == buckets.end()) continue;
          for (int idx : it->second) fn(idx);
        }
  }
};

}  // namespace detail

inline int separated_count(const std::vector<RationalMap>& maps, int n, double epsilon,
                           int candidates, std::uint64_t seed) {
  const int k = maps.front().k;

  // orbits of all candidates, laid out candidate-major
  std::vector<std::vector<ProjPoint>> orbits(candidates);
  parallel_for(std::size_t(candidates), [&](std::size_t i) {
    Rng rng(seed, stream::tagged(stream::kCandidate, i));
    orbits[i] = forward_orbit(maps, fs_uniform_point(k, rng), n);
  });

  auto pair_separated = [&](int i, int j) {
    for (int t = 0; t < n; ++t)
      if (fs_distance(orbits[i][t], orbits[j][t]) >= epsilon) return true;
    return false;
  };

  std::vector<int> accepted;
  if (k == 1) {
    detail::BlochGrid grid(epsilon);
    std::vector<Eigen::Vector3d> pos(candidates);
    for (int i = 0; i < candidates; ++i) pos[i] = detail::bloch(orbits[i][0]);
    for (int i = 0; i < candidates; ++i) {
      bool ok = true;
      grid.for_neighbors(pos[i], [&](int j) {
        if (ok && !pair_separated(i, j)) ok = false;
      });
      if (ok) {
        accepted.push_back(i);
        grid.insert(pos[i], i);
      }
    }
  } else {
    for (int i = 0; i < candidates; ++i) {
      bool ok = true;
      for (int j : accepted) {
        // step-0 prefilter: far pairs are separated outright
        if (chordal_distance(orbits[i][0], orbits[j][0]) >= epsilon) continue;
        if (!pair_separated(i, j)) {
          ok = false;
          break;
        }
      }
      if (ok) accepted.push_back(i);
    }
  }
  return int(accepted.size());
}

// ---------------------------------------------------------------------------
// Itinerary (partition) entropy.

// Partition of P^k from hierarchical angular subdivision.  For k = 1 in the
// Z_1/Z_0 chart: an inner cell |z| < r_in, an outer cell |z| > r_out, and the
// annulus between them split into `sectors` equal angular sectors.  Doubling
// `sectors` refines the partition in place (nested grids).  For k >= 2 the
// cells are (dominant axis, angular sector of the next coordinate's relative
// phase).
struct PartitionSpec {
  int sectors = 8;
  double r_in = 0.5;
  double r_out = 2.0;

  int cell_count(int k) const { return k == 1 ? sectors + 2 : (k + 1) * sectors; }

  int cell_of(const ProjPoint& x) const {
    const int k = x.ambient_dim();
    if (k == 1) {
      const std::complex<double> z0 = x.coords[0], z1 = x.coords[1];
      const double mod = std::abs(z1) / std::max(std::abs(z0), 1e-300);
      if (mod < r_in) return sectors;
      if (mod > r_out) return sectors + 1;
      const double ang = std::arg(z1 / z0);  // (-pi, pi]
      int s = int(std::floor((ang + M_PI) / (2.0 * M_PI) * sectors));
      return std::clamp(s, 0, sectors - 1);
    }
    int axis = 0;
    for (int i = 1; i <= k; ++i)
      if (std::abs(x.coords[i]) > std::abs(x.coords[axis])) axis = i;
    const int other = (axis + 1) % (k + 1);
    const double ang = std::arg(x.coords[other] / x.coords[axis]);
    int s = int(std::floor((ang + M_PI) / (2.0 * M_PI) * sectors));
    s = std::clamp(s, 0, sectors - 1);
    return axis * sectors + s;
  }
};

struct PartitionEntropyResult {
  double rate = 0.0;              // H_n - H_{n-1}, Miller–Madow corrected
  std::vector<double> h_profile;  // H_1, ..., H_n
  double singleton_fraction = 0.0;
  bool undersampled = false;
};

// Codes each sample's length-n itinerary (cell of the i-step image,
// i = 0..n-1) and estimates the entropy rate of the coding.  The profile
// H_m is the corrected Shannon entropy of the length-m prefix codes; the
// reported rate is the last conditional increment, whose finite-n bias
// cancels the additive log-cell-count offset that (1/n) H_n carries.
inline PartitionEntropyResult partition_entropy(const std::vector<RationalMap>& maps,
                                                const std::vector<MeasureSample>& mu_samples,
                                                const PartitionSpec& partition, int n) {
  const std::size_t count = mu_samples.size();
  std::vector<std::vector<int>> itineraries(count);
  parallel_for(count, [&](std::size_t i) {
    auto orbit = forward_orbit(maps, mu_samples[i].point, n);
    std::vector<int> code(n);
    for (int t = 0; t < n; ++t) code[t] = partition.cell_of(orbit[t]);
    itineraries[i] = std::move(code);
  });

  PartitionEntropyResult out;
  double h_prev = 0.0;
  std::vector<std::uint64_t> codes(count, 0);
  const std::uint64_t base = partition.cell_count(maps.front().k) + 1;
  for (int m = 1; m <= n; ++m) {
    std::map<std::uint64_t, std::size_t> counts;
    for (std::size_t i = 0; i < count; ++i) {
      codes[i] = codes[i] * base + std::uint64_t(itineraries[i][m - 1] + 1);
      ++counts[codes[i]];
    }
    std::vector<std::size_t> hist;
    hist.reserve(counts.size());
    std::size_t singles = 0;
    for (const auto& [c, hits] : counts) {
      hist.push_back(hits);
      if (hits == 1) ++singles;
    }
    const double h = shannon_entropy_mm(hist);
    out.h_profile.push_back(h);
    if (m == n) {
      out.rate = h - h_prev;
      out.singleton_fraction = double(singles) / double(counts.size());
      out.undersampled = out.singleton_fraction > 0.10;
    }
    h_prev = h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brin–Katok local entropy table.

struct BrinKatokCell {
  int n = 0;
  double epsilon = 0.0;
  double value = 0.0;  // median over centers of -(1/n) log(empirical ball mass)
  double median_neg_log_mass = 0.0;
  bool undersampled = false;  // some center had < 30 hits
};

inline std::vector<BrinKatokCell> brin_katok_entropy(const std::vector<RationalMap>& maps,
                                                     const std::vector<MeasureSample>& mu_samples,
                                                     const std::vector<int>& n_list,
                                                     const std::vector<double>& epsilon_list,
                                                     int center_count = 256) {
  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  const std::size_t count = mu_samples.size();
  const std::size_t centers = std::min<std::size_t>(center_count, count);

  std::vector<std::vector<ProjPoint>> orbits(count);
  parallel_for(count, [&](std::size_t i) {
    orbits[i] = forward_orbit(maps, mu_samples[i].point, n_max);
  });

  // prefix-max Bowen distances center -> sample, folded immediately into
  // per-(n, eps) hit counts
  std::vector<std::vector<std::vector<std::size_t>>> hits(
      centers, std::vector<std::vector<std::size_t>>(
                   n_list.size(), std::vector<std::size_t>(epsilon_list.size(), 0)));
  parallel_for(centers, [&](std::size_t c) {
    for (std::size_t s = 0; s < count; ++s) {
      if (s == c) continue;
      double running = 0.0;
      std::size_t ni = 0;
      for (int t = 0; t < n_max && ni < n_list.size(); ++t) {
        running = std::max(running, fs_distance(orbits[c][t], orbits[s][t]));
        while (ni < n_list.size() && n_list[ni] == t + 1) {
          for (std::size_t e = 0; e < epsilon_list.size(); ++e)
            if (running < epsilon_list[e]) ++hits[c][ni][e];
          ++ni;
        }
      }
    }
  });

  std::vector<BrinKatokCell> table;
  const double denom = double(count - 1);
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    for (std::size_t e = 0; e < epsilon_list.size(); ++e) {
      BrinKatokCell cell;
      cell.n = n_list[ni];
      cell.epsilon = epsilon_list[e];
      std::vector<double> neg_log_mass;
      neg_log_mass.reserve(centers);
      for (std::size_t c = 0; c < centers; ++c) {
        const std::size_t h = hits[c][ni][e];
        if (h < 30) cell.undersampled = true;
        neg_log_mass.push_back(-std::log(std::max<double>(h, 1) / denom));
      }
      cell.median_neg_log_mass = median(neg_log_mass);
      cell.value = cell.median_neg_log_mass / double(cell.n);
      table.push_back(cell);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Mixing correlation:
//   | <mu(f_0), (F_{n-1})^* phi . psi>  -  <mu(f_n), phi> <mu(f_0), psi> |.

struct MixingResult {
  double corr = 0.0;
  double stderr_ = 0.0;
};

inline MixingResult mixing_correlation(const std::vector<RationalMap>& maps,
                                       const std::vector<MeasureSample>& mu0_samples,
                                       const std::vector<MeasureSample>& mun_samples,
                                       const Observable& phi, const Observable& psi,
                                       int n) {
  const std::size_t N0 = mu0_samples.size(), Nn = mun_samples.size();
  std::vector<double> prod(N0), psi0(N0), phin(Nn);
  parallel_for(N0, [&](std::size_t i) {
    ProjPoint x = mu0_samples[i].point;
    for (int t = 0; t < n; ++t) x = evaluate(maps[t], x).point;
    prod[i] = phi.value(x) * psi.value(mu0_samples[i].point);
    psi0[i] = psi.value(mu0_samples[i].point);
  });
  parallel_for(Nn, [&](std::size_t i) { phin[i] = phi.value(mun_samples[i].point); });

  const auto mp = mean_stderr(prod);
  const auto ms = mean_stderr(psi0);
  const auto mf = mean_stderr(phin);
  MixingResult r;
  r.corr = std::abs(mp.mean - mf.mean * ms.mean);
  // delta method; the mu(f_n) sample set is independent of the mu(f_0) set
  r.stderr_ = std::sqrt(mp.stderr_ * mp.stderr_ +
                        std::pow(mf.mean * ms.stderr_, 2) +
                        std::pow(ms.mean * mf.stderr_, 2));
  return r;
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum by QR-reorthonormalized cocycle products.

struct LyapunovReport {
  std::vector<double> exponents;  // sorted descending, with multiplicity
  std::vector<double> stderr_;
  int n_steps = 0;
  int n_orbits = 0;
  int discarded_orbits = 0;
  double qr_logdet_gap = 0.0;  // max |sum log|R_ii| - log|det product|| observed
};

namespace detail {

// One orbit: returns the k accumulated log|R_ii| sums, descending.
inline std::vector<double> lyapunov_orbit(const std::vector<RationalMap>& maps,
                                          const ProjPoint& start, int n_steps,
                                          double* logdet_gap) {
  const int k = maps.front().k;
  ProjPoint x = start;
  TangentFrame frame = tangent_frame(x);
  std::vector<double> acc(k, 0.0);
  double logdet_direct = 0.0;
  for (int t = 0; t < n_steps; ++t) {
    const CMat M = fs_jacobian(maps[t], x, frame);
    x = evaluate(maps[t], x).point;
    const TangentFrame canonical = tangent_frame(x);
    Eigen::HouseholderQR<CMat> qr(M);
    const CMat Q = qr.householderQ() * CMat::Identity(k, k);
    const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j) {
      const double rjj = std::abs(R(j, j));
      if (rjj < 1e-300) throw CriticalOrbit("zero diagonal in cocycle QR");
      acc[j] += std::log(rjj);
    }
    logdet_direct += std::log(std::abs(M.determinant()));
    frame.base = x;
    frame.vectors = canonical.vectors * Q;
  }
  if (logdet_gap) {
    double sum = 0;
    for (double a : acc) sum += a;
    *logdet_gap = std::abs(sum - logdet_direct);
  }
  std::sort(acc.begin(), acc.end(), std::greater<>());
  return acc;
}

}  // namespace detail

inline LyapunovReport lyapunov_spectrum(const std::vector<RationalMap>& maps,
                                        const std::vector<MeasureSample>& mu_samples,
                                        int n_steps) {
  const int k = maps.front().k;
  const std::size_t orbits = mu_samples.size();
  std::vector<std::vector<double>> per_orbit(orbits);
  std::vector<double> gaps(orbits, 0.0);
  std::vector<char> ok(orbits, 0);
  parallel_for(orbits, [&](std::size_t i) {
    try {
      per_orbit[i] = detail::lyapunov_orbit(maps, mu_samples[i].point, n_steps, &gaps[i]);
      ok[i] = 1;
    } catch (const CriticalOrbit&) {
      ok[i] = 0;
    }
  });

  LyapunovReport rep;
  rep.n_steps = n_steps;
  for (std::size_t i = 0; i < orbits; ++i)
    if (!ok[i]) ++rep.discarded_orbits;
  rep.n_orbits = int(orbits) - rep.discarded_orbits;

  rep.exponents.resize(k, 0.0);
  rep.stderr_.resize(k, 0.0);
  for (int j = 0; j < k; ++j) {
    std::vector<double> vals;
    vals.reserve(orbits);
    for (std::size_t i = 0; i < orbits; ++i)
      if (ok[i]) vals.push_back(per_orbit[i][j] / double(n_steps));
    const auto ms = mean_stderr(vals);
    rep.exponents[j] = ms.mean;
    rep.stderr_[j] = ms.stderr_;
  }
  for (std::size_t i = 0; i < orbits; ++i)
    if (ok[i]) rep.qr_logdet_gap = std::max(rep.qr_logdet_gap, gaps[i]);
  return rep;
}

// ---------------------------------------------------------------------------
// Integrability of the cocycle:  mean and tail of log+ ||A|| over alpha.

struct LogMomentReport {
  double mean = 0.0;
  double stderr_ = 0.0;
  double q999 = 0.0;
  std::vector<double> values;
};

inline LogMomentReport log_moment_check(const std::vector<AlphaSample>& samples) {
  std::vector<double> vals(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    const CMat A = fs_jacobian(s.map, s.point, tangent_frame(s.point));
    const double opnorm = A.jacobiSvd().singularValues()(0);
    vals[i] = std::max(0.0, std::log(opnorm));
  });
  LogMomentReport rep;
  const auto ms = mean_stderr(vals);
  rep.mean = ms.mean;
  rep.stderr_ = ms.stderr_;
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  rep.q999 = sorted[std::size_t(0.999 * double(sorted.size() - 1))];
  rep.values = std::move(vals);
  return rep;
}

// ---------------------------------------------------------------------------
// Gromov graph-volume cross-check (k = 1):
//   integral over P^1 of sum_{i=1}^{n} (f_{i-1} o ... o f_1)^* omega,
// Monte-Carlo against the exact cohomological value sum d^{i-1}.

struct GraphVolumeResult {
  double numeric = 0.0;
  double numeric_stderr = 0.0;
  double exact = 0.0;
  std::vector<double> term_means;  // per-i estimates, i = 1..n
};

inline GraphVolumeResult graph_volume_check(const std::vector<RationalMap>& maps, int n,
                                            int quadrature_points, std::uint64_t seed) {
  const int k = maps.front().k;
  if (k != 1) throw std::invalid_argument("graph_volume_check: k must be 1");

  std::vector<std::vector<double>> terms(std::size_t(n),
                                         std::vector<double>(quadrature_points, 0.0));
  parallel_for(std::size_t(quadrature_points), [&](std::size_t i) {
    Rng rng(seed, stream::tagged(stream::kQuadrature, i));
    ProjPoint x = fs_uniform_point(1, rng);
    terms[0][i] = 1.0;  // identity factor
    TangentFrame frame = tangent_frame(x);
    double log_prod = 0.0;
    for (int t = 1; t < n; ++t) {
      const CMat M = fs_jacobian(maps[t - 1], x, frame);
      log_prod += std::log(std::abs(M(0, 0)));
      x = evaluate(maps[t - 1], x).point;
      frame = tangent_frame(x);
      terms[t][i] = std::exp(2.0 * log_prod);
    }
  });

  GraphVolumeResult res;
  double var_acc = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto ms = mean_stderr(terms[t]);
    res.term_means.push_back(ms.mean);
    res.numeric += ms.mean;
    var_acc += ms.stderr_ * ms.stderr_;
  }
  res.numeric_stderr = std::sqrt(var_acc);
  double power = 1.0;
  for (int i = 1; i <= n; ++i) {
    res.exact += power;
    power *= double(maps.front().d);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Birkhoff ergodic bench on the skew product.

struct BirkhoffAlphaResult {
  double spread = 0.0;      // std of per-orbit time averages
  double alpha_mean = 0.0;  // space average over fresh alpha samples
  double mean_of_time_averages = 0.0;
};

inline BirkhoffAlphaResult birkhoff_alpha_test(const DriverSpec& spec,
                                               const PairObservable& obs, int n_steps,
                                               int n_orbits, int depth,
                                               std::uint64_t seed) {
  const auto starts = alpha_sample(spec, depth, n_orbits, seed);
  const auto draws = sample_lambda_draws(spec, seed, n_orbits);
  std::vector<double> time_avgs(n_orbits, 0.0);
  parallel_for(std::size_t(n_orbits), [&](std::size_t i) {
    // skew orbit (f, x) -> (F(f), f(x)) along the driver's own sequence,
    // started from an alpha sample
    const auto seq = generate_sequence(spec, draws[i].continuation, n_steps - 1);
    ProjPoint x = starts[i].point;
    std::vector<double> vals(n_steps);
    for (int t = 0; t < n_steps; ++t) {
      vals[t] = obs.value(seq[t], x);
      if (t + 1 < n_steps) x = evaluate(seq[t], x).point;
    }
    time_avgs[i] = pairwise_sum(vals) / double(n_steps);
  });

  const auto fresh = alpha_sample(spec, depth, std::max(n_orbits, 512),
                                  mix64(seed ^ 0xa5a5));
  std::vector<double> space(fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i)
    space[i] = obs.value(fresh[i].map, fresh[i].point);

  BirkhoffAlphaResult res;
  const auto mt = mean_stderr(time_avgs);
  res.mean_of_time_averages = mt.mean;
  res.spread = sample_std(time_avgs);
  res.alpha_mean = mean_stderr(space).mean;
  return res;
}

}  // namespace randgreen
