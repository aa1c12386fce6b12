#pragma once

#include <span>
#include <string>
#include <vector>

#include "nertk/lstm.hpp"

namespace nertk {

/// Which transitions, start tags and end tags are legal. Illegal entries
/// score -inf and are excluded from every sum and max.
struct ConstraintMask {
  std::vector<char> transition;  ///< K*K, row-major: [from * K + to]
  std::vector<char> start;
  std::vector<char> end;

  static ConstraintMask allow_all(std::size_t num_tags);

  std::size_t num_tags() const { return start.size(); }
  bool allowed(std::size_t from, std::size_t to) const { return transition[from * num_tags() + to]; }
};

/// Forbids entering I-X from anything but B-X / I-X, and starting at I-X.
/// Tag strings use the IOB2 spelling ("O", "B-PER", "I-PER").
ConstraintMask build_iob2_mask(std::span<const std::string> tagset);

struct CrfParams {
  Mat transitions;  ///< K x K, [from, to]
  Vec start;
  Vec end;
  ConstraintMask mask;

  static CrfParams zeros(std::size_t num_tags);
  std::size_t num_tags() const { return static_cast<std::size_t>(start.size()); }
  /// Copy with every transition allowed.
  CrfParams unconstrained() const;
};

using TagSequence = std::vector<std::size_t>;

double score_sequence(const CrfParams& params, const Mat& emissions, std::span<const std::size_t> tags);

double forward_log_partition(const CrfParams& params, const Mat& emissions);

struct ViterbiResult {
  TagSequence tags;
  double score = 0.0;
};

/// Highest-scoring legal path; among equal scores the lexicographically
/// smallest tag sequence wins.
ViterbiResult viterbi_decode(const CrfParams& params, const Mat& emissions);

struct CrfGradient {
  Mat emissions;
  Mat transitions;
  Vec start;
  Vec end;
};

struct NllResult {
  double loss = 0.0;
  CrfGradient grad;
};

/// log Z - score(gold) with its gradient (marginals minus gold indicators),
/// computed by forward-backward in the log domain.
NllResult nll_loss_and_grad(const CrfParams& params, const Mat& emissions,
                            std::span<const std::size_t> gold);

/// Per-position tag marginals, L x K.
Mat tag_marginals(const CrfParams& params, const Mat& emissions);

}  // namespace nertk
