#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's CRF or LSTM code paths.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "nertk/crf.hpp"
#include "nertk/rng.hpp"

namespace oracle {

using Path = std::vector<std::size_t>;

struct Instance {
  Eigen::MatrixXd emissions;  // L x K
  Eigen::MatrixXd transitions;
  Eigen::VectorXd start, end;
  std::vector<char> allowed;  // K*K, row-major from->to
  std::vector<char> start_ok, end_ok;
};

inline Instance random_instance(nertk::Rng& rng, std::size_t L, std::size_t K, double lo = -3.0, double hi = 3.0) {
  Instance in;
  const auto l = static_cast<Eigen::Index>(L), k = static_cast<Eigen::Index>(K);
  in.emissions.resize(l, k);
  in.transitions.resize(k, k);
  in.start.resize(k);
  in.end.resize(k);
  for (Eigen::Index r = 0; r < l; ++r)
    for (Eigen::Index c = 0; c < k; ++c) in.emissions(r, c) = rng.uniform(lo, hi);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) in.transitions(r, c) = rng.uniform(lo, hi);
  for (Eigen::Index c = 0; c < k; ++c) in.start(c) = rng.uniform(lo, hi);
  for (Eigen::Index c = 0; c < k; ++c) in.end(c) = rng.uniform(lo, hi);
  in.allowed.assign(K * K, 1);
  in.start_ok.assign(K, 1);
  in.end_ok.assign(K, 1);
  return in;
}

inline nertk::CrfParams to_params(const Instance& in) {
  nertk::CrfParams p;
  p.transitions = in.transitions;
  p.start = in.start;
  p.end = in.end;
  p.mask = {in.allowed, in.start_ok, in.end_ok};
  return p;
}

/// Every path in lexicographic order (odometer enumeration).
inline std::vector<Path> all_paths(std::size_t L, std::size_t K) {
  std::vector<Path> out;
  Path p(L, 0);
  for (;;) {
    out.push_back(p);
    std::size_t pos = L;
    while (pos > 0) {
      --pos;
      if (++p[pos] < K) break;
      p[pos] = 0;
      if (pos == 0) return out;
    }
    if (L == 0) return out;
  }
}

inline bool legal(const Instance& in, const Path& p) {
  const std::size_t K = static_cast<std::size_t>(in.start.size());
  if (!in.start_ok[p.front()] || !in.end_ok[p.back()]) return false;
  for (std::size_t t = 0; t + 1 < p.size(); ++t)
    if (!in.allowed[p[t] * K + p[t + 1]]) return false;
  return true;
}

inline double path_score(const Instance& in, const Path& p) {
  double s = in.start(static_cast<Eigen::Index>(p.front()));
  for (std::size_t t = 0; t < p.size(); ++t) {
    s += in.emissions(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p[t]));
    if (t + 1 < p.size()) s += in.transitions(static_cast<Eigen::Index>(p[t]), static_cast<Eigen::Index>(p[t + 1]));
  }
  return s + in.end(static_cast<Eigen::Index>(p.back()));
}

/// log sum exp over all legal paths, by direct enumeration.
inline double brute_log_partition(const Instance& in) {
  const auto L = static_cast<std::size_t>(in.emissions.rows());
  const auto K = static_cast<std::size_t>(in.emissions.cols());
  std::vector<double> scores;
  for (const auto& p : all_paths(L, K))
    if (legal(in, p)) scores.push_back(path_score(in, p));
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  long double sum = 0;
  for (double s : scores) sum += std::exp(static_cast<long double>(s - m));
  return m + static_cast<double>(std::log(sum));
}

struct Best {
  Path path;
  double score = -std::numeric_limits<double>::infinity();
};

/// Highest-scoring legal path; enumeration is lexicographic so the first
/// strict maximum is also the lexicographically smallest.
inline Best brute_viterbi(const Instance& in) {
  const auto L = static_cast<std::size_t>(in.emissions.rows());
  const auto K = static_cast<std::size_t>(in.emissions.cols());
  Best best;
  for (const auto& p : all_paths(L, K)) {
    if (!legal(in, p)) continue;
    const double s = path_score(in, p);
    if (s > best.score) {
      best.score = s;
      best.path = p;
    }
  }
  return best;
}

/// Central difference of f at x along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double>& x, std::size_t i, double h = 1e-5) {
  const double saved = x[i];
  x[i] = saved + h;
  const double plus = f(x);
  x[i] = saved - h;
  const double minus = f(x);
  x[i] = saved;
  return (plus - minus) / (2 * h);
}

}  // namespace oracle
