#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "nertk/rng.hpp"

namespace nertk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One LSTM direction with diagonal peephole connections:
///   f = σ(W_fx x + W_fh h' + w_fc ⊙ c' + b_f)
///   i = σ(W_ix x + W_ih h' + w_ic ⊙ c' + b_i)
///   c = f ⊙ c' + i ⊙ tanh(W_cx x + W_ch h' + b_c)
///   o = σ(W_ox x + W_oh h' + w_oc ⊙ c + b_o)
///   h = o ⊙ tanh(c)
struct LstmParams {
  Mat w_fx, w_ix, w_cx, w_ox;  // H x D
  Mat w_fh, w_ih, w_ch, w_oh;  // H x H
  Vec peep_f, peep_i, peep_o;  // H
  Vec b_f, b_i, b_c, b_o;      // H

  static LstmParams zeros(Eigen::Index input_dim, Eigen::Index hidden);
  /// Glorot-uniform weights; biases and peepholes start at zero.
  static LstmParams random(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng);

  Eigen::Index input_dim() const { return w_fx.cols(); }
  Eigen::Index hidden() const { return w_fx.rows(); }
};

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  static BiLstmParams zeros(Eigen::Index input_dim, Eigen::Index hidden);
  static BiLstmParams random(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng);

  Eigen::Index hidden() const { return forward.hidden(); }
};

/// Everything the backward pass needs from one step.
struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec f, i, g, o;
  Vec c, tanh_c, h;
};

std::pair<Vec, Vec> lstm_step(const LstmParams& p, const Vec& x, const Vec& h_prev,
                              const Vec& c_prev);

LstmStepCache lstm_step_cached(const LstmParams& p, const Vec& x, const Vec& h_prev,
                               const Vec& c_prev);

/// Backpropagates dh (total gradient reaching h_t) and dc (gradient reaching
/// c_t from step t+1) through one step. Parameter gradients are accumulated
/// into `grad`; the input and recurrent gradients are written to the outputs.
void lstm_step_backward(const LstmParams& p, const LstmStepCache& cache, const Vec& dh,
                        const Vec& dc, LstmParams& grad, Vec& dx, Vec& dh_prev, Vec& dc_prev);

/// Step caches of one direction in traversal order.
struct LstmTrace {
  std::vector<LstmStepCache> steps;
  bool reversed = false;

  /// Hidden state for sequence position t (independent of traversal order).
  const Vec& hidden_at(std::size_t t) const {
    return reversed ? steps[steps.size() - 1 - t].h : steps[t].h;
  }
};

LstmTrace lstm_run(const LstmParams& p, std::span<const Vec> inputs, bool reversed);

/// Given dL/dh for each sequence position, accumulates parameter gradients
/// and returns dL/dx per sequence position.
std::vector<Vec> lstm_run_backward(const LstmParams& p, const LstmTrace& trace,
                                   std::span<const Vec> dh, LstmParams& grad);

struct BiLstmTrace {
  LstmTrace forward;
  LstmTrace backward;

  /// concat(h_fwd[t], h_bwd[t])
  Vec output(std::size_t t) const;
  std::size_t size() const { return forward.steps.size(); }
};

BiLstmTrace bilstm_trace(const BiLstmParams& p, std::span<const Vec> inputs);

/// Per position concat of the forward and backward hidden states (width 2H).
std::vector<Vec> bilstm_run(const BiLstmParams& p, std::span<const Vec> inputs);

/// Backward pass for per-position output gradients of width 2H.
std::vector<Vec> bilstm_backward(const BiLstmParams& p, const BiLstmTrace& trace,
                                 std::span<const Vec> d_outputs, BiLstmParams& grad);

}  // namespace nertk
