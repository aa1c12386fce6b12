#include "nertk/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nertk/error.hpp"

namespace nertk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_shapes(const CrfParams& p, const Mat& emissions) {
  const auto K = static_cast<Eigen::Index>(p.num_tags());
  if (K == 0) throw Error("CRF has no tags");
  if (emissions.rows() == 0) throw Error("emission matrix has no rows");
  if (emissions.cols() != K) {
    throw Error("emission matrix has " + std::to_string(emissions.cols()) + " columns, CRF has " +
                std::to_string(K) + " tags");
  }
  if (p.mask.num_tags() != p.num_tags()) throw Error("constraint mask size does not match CRF");
}

double start_score(const CrfParams& p, std::size_t j) { return p.mask.start[j] ? p.start(static_cast<Eigen::Index>(j)) : kNegInf; }
double end_score(const CrfParams& p, std::size_t j) { return p.mask.end[j] ? p.end(static_cast<Eigen::Index>(j)) : kNegInf; }
double trans_score(const CrfParams& p, std::size_t i, std::size_t j) {
  return p.mask.allowed(i, j) ? p.transitions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) : kNegInf;
}

// alpha(t, j): log-sum of all legal prefixes ending in j at t (emission included).
Mat forward_table(const CrfParams& p, const Mat& e) {
  const std::size_t K = p.num_tags();
  const Eigen::Index L = e.rows();
  Mat alpha(L, static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) alpha(0, static_cast<Eigen::Index>(j)) = start_score(p, j) + e(0, static_cast<Eigen::Index>(j));
  for (Eigen::Index t = 1; t < L; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      double acc = kNegInf;
      for (std::size_t i = 0; i < K; ++i) {
        if (!p.mask.allowed(i, j)) continue;
        acc = log_add(acc, alpha(t - 1, static_cast<Eigen::Index>(i)) + trans_score(p, i, j));
      }
      alpha(t, static_cast<Eigen::Index>(j)) = acc + e(t, static_cast<Eigen::Index>(j));
    }
  }
  return alpha;
}

// beta(t, i): log-sum of all legal suffixes after position t given tag i at t.
Mat backward_table(const CrfParams& p, const Mat& e) {
  const std::size_t K = p.num_tags();
  const Eigen::Index L = e.rows();
  Mat beta(L, static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < K; ++i) beta(L - 1, static_cast<Eigen::Index>(i)) = end_score(p, i);
  for (Eigen::Index t = L - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      double acc = kNegInf;
      for (std::size_t j = 0; j < K; ++j) {
        if (!p.mask.allowed(i, j)) continue;
        acc = log_add(acc, trans_score(p, i, j) + e(t + 1, static_cast<Eigen::Index>(j)) +
                               beta(t + 1, static_cast<Eigen::Index>(j)));
      }
      beta(t, static_cast<Eigen::Index>(i)) = acc;
    }
  }
  return beta;
}

double log_partition_from(const CrfParams& p, const Mat& alpha) {
  const Eigen::Index last = alpha.rows() - 1;
  double z = kNegInf;
  for (std::size_t j = 0; j < p.num_tags(); ++j) {
    z = log_add(z, alpha(last, static_cast<Eigen::Index>(j)) + end_score(p, j));
  }
  if (z == kNegInf) throw Error("no tag sequence is legal under the constraint mask");
  return z;
}

}  // namespace

ConstraintMask ConstraintMask::allow_all(std::size_t num_tags) {
  return {std::vector<char>(num_tags * num_tags, 1), std::vector<char>(num_tags, 1),
          std::vector<char>(num_tags, 1)};
}

ConstraintMask build_iob2_mask(std::span<const std::string> tagset) {
  const std::size_t K = tagset.size();
  ConstraintMask mask = ConstraintMask::allow_all(K);
  std::map<std::string, std::size_t> begins;
  for (std::size_t j = 0; j < K; ++j) {
    if (tagset[j].rfind("B-", 0) == 0) begins[tagset[j].substr(2)] = j;
  }
  for (std::size_t j = 0; j < K; ++j) {
    const std::string& tag = tagset[j];
    if (tag.rfind("I-", 0) != 0) continue;
    const std::string type = tag.substr(2);
    if (!begins.count(type)) throw Error("tag set has " + tag + " without B-" + type);
    mask.start[j] = 0;
    for (std::size_t i = 0; i < K; ++i) {
      const bool continues = tagset[i] == "B-" + type || tagset[i] == "I-" + type;
      mask.transition[i * K + j] = continues ? 1 : 0;
    }
  }
  return mask;
}

CrfParams CrfParams::zeros(std::size_t num_tags) {
  const auto K = static_cast<Eigen::Index>(num_tags);
  return {Mat::Zero(K, K), Vec::Zero(K), Vec::Zero(K), ConstraintMask::allow_all(num_tags)};
}

CrfParams CrfParams::unconstrained() const {
  CrfParams out = *this;
  out.mask = ConstraintMask::allow_all(num_tags());
  return out;
}

double score_sequence(const CrfParams& p, const Mat& e, std::span<const std::size_t> tags) {
  check_shapes(p, e);
  if (tags.size() != static_cast<std::size_t>(e.rows())) {
    throw Error("tag sequence length " + std::to_string(tags.size()) + " does not match " +
                std::to_string(e.rows()) + " emission rows");
  }
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] >= p.num_tags()) throw Error("tag index out of range at position " + std::to_string(t));
  }
  if (!p.mask.start[tags.front()]) throw Error("sequence starts with a forbidden tag");
  if (!p.mask.end[tags.back()]) throw Error("sequence ends with a forbidden tag");
  double score = p.start(static_cast<Eigen::Index>(tags.front()));
  for (std::size_t t = 0; t < tags.size(); ++t) {
    score += e(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(tags[t]));
    if (t + 1 < tags.size()) {
      if (!p.mask.allowed(tags[t], tags[t + 1])) {
        throw Error("forbidden transition at position " + std::to_string(t + 1));
      }
      score += p.transitions(static_cast<Eigen::Index>(tags[t]), static_cast<Eigen::Index>(tags[t + 1]));
    }
  }
  return score + p.end(static_cast<Eigen::Index>(tags.back()));
}

double forward_log_partition(const CrfParams& p, const Mat& e) {
  check_shapes(p, e);
  return log_partition_from(p, forward_table(p, e));
}

ViterbiResult viterbi_decode(const CrfParams& p, const Mat& e) {
  check_shapes(p, e);
  const std::size_t K = p.num_tags();
  const Eigen::Index L = e.rows();
  // best(t, j): best score of positions t..L-1 given tag j at t, end included.
  Mat best(L, static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) {
    best(L - 1, static_cast<Eigen::Index>(j)) = e(L - 1, static_cast<Eigen::Index>(j)) + end_score(p, j);
  }
  for (Eigen::Index t = L - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      double m = kNegInf;
      for (std::size_t j = 0; j < K; ++j) {
        if (!p.mask.allowed(i, j)) continue;
        m = std::max(m, trans_score(p, i, j) + best(t + 1, static_cast<Eigen::Index>(j)));
      }
      best(t, static_cast<Eigen::Index>(i)) = e(t, static_cast<Eigen::Index>(i)) + m;
    }
  }

  // Walking forward and taking the first maximiser at each position yields
  // the lexicographically smallest optimal path.
  ViterbiResult result;
  result.tags.reserve(static_cast<std::size_t>(L));
  for (Eigen::Index t = 0; t < L; ++t) {
    double top = kNegInf;
    std::size_t arg = K;
    for (std::size_t j = 0; j < K; ++j) {
      double s;
      if (t == 0) {
        s = start_score(p, j) + best(0, static_cast<Eigen::Index>(j));
      } else {
        if (!p.mask.allowed(result.tags.back(), j)) continue;
        s = trans_score(p, result.tags.back(), j) + best(t, static_cast<Eigen::Index>(j));
      }
      if (s > top) {
        top = s;
        arg = j;
      }
    }
    if (arg == K) throw Error("no tag sequence is legal under the constraint mask");
    result.tags.push_back(arg);
  }
  result.score = score_sequence(p, e, result.tags);
  return result;
}

Mat tag_marginals(const CrfParams& p, const Mat& e) {
  check_shapes(p, e);
  const Mat alpha = forward_table(p, e);
  const Mat beta = backward_table(p, e);
  const double log_z = log_partition_from(p, alpha);
  return (alpha + beta).unaryExpr([log_z](double v) { return std::exp(v - log_z); });
}

NllResult nll_loss_and_grad(const CrfParams& p, const Mat& e, std::span<const std::size_t> gold) {
  const double gold_score = score_sequence(p, e, gold);
  const std::size_t K = p.num_tags();
  const Eigen::Index L = e.rows();
  const Mat alpha = forward_table(p, e);
  const Mat beta = backward_table(p, e);
  const double log_z = log_partition_from(p, alpha);

  NllResult r;
  // Rounding can push an all-mass gold path a few ulps below zero.
  r.loss = std::max(0.0, log_z - gold_score);
  r.grad.emissions = (alpha + beta).unaryExpr([log_z](double v) { return std::exp(v - log_z); });
  r.grad.start = r.grad.emissions.row(0).transpose();
  r.grad.end = r.grad.emissions.row(L - 1).transpose();
  r.grad.transitions = Mat::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  for (Eigen::Index t = 0; t + 1 < L; ++t) {
    for (std::size_t i = 0; i < K; ++i) {
      const double a = alpha(t, static_cast<Eigen::Index>(i));
      if (a == kNegInf) continue;
      for (std::size_t j = 0; j < K; ++j) {
        if (!p.mask.allowed(i, j)) continue;
        const double lp = a + trans_score(p, i, j) + e(t + 1, static_cast<Eigen::Index>(j)) +
                          beta(t + 1, static_cast<Eigen::Index>(j)) - log_z;
        r.grad.transitions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += std::exp(lp);
      }
    }
  }
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto g = static_cast<Eigen::Index>(gold[static_cast<std::size_t>(t)]);
    r.grad.emissions(t, g) -= 1.0;
    if (t + 1 < L) {
      r.grad.transitions(g, static_cast<Eigen::Index>(gold[static_cast<std::size_t>(t + 1)])) -= 1.0;
    }
  }
  r.grad.start(static_cast<Eigen::Index>(gold.front())) -= 1.0;
  r.grad.end(static_cast<Eigen::Index>(gold.back())) -= 1.0;
  return r;
}

}  // namespace nertk
