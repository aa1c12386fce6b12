#include "nertk/lstm.hpp"

#include <cmath>

#include "nertk/error.hpp"

namespace nertk {

namespace {

Vec sigmoid(const Vec& a) {
  return a.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Vec tanh_vec(const Vec& a) {
  return a.unaryExpr([](double v) { return std::tanh(v); });
}

Mat glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  // Row-major draw order so the stream matches the on-disk layout.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

}  // namespace

LstmParams LstmParams::zeros(Eigen::Index input_dim, Eigen::Index hidden) {
  LstmParams p;
  for (Mat* m : {&p.w_fx, &p.w_ix, &p.w_cx, &p.w_ox}) *m = Mat::Zero(hidden, input_dim);
  for (Mat* m : {&p.w_fh, &p.w_ih, &p.w_ch, &p.w_oh}) *m = Mat::Zero(hidden, hidden);
  for (Vec* v : {&p.peep_f, &p.peep_i, &p.peep_o, &p.b_f, &p.b_i, &p.b_c, &p.b_o}) {
    *v = Vec::Zero(hidden);
  }
  return p;
}

LstmParams LstmParams::random(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng) {
  LstmParams p = zeros(input_dim, hidden);
  for (Mat* m : {&p.w_fx, &p.w_ix, &p.w_cx, &p.w_ox}) *m = glorot(hidden, input_dim, rng);
  for (Mat* m : {&p.w_fh, &p.w_ih, &p.w_ch, &p.w_oh}) *m = glorot(hidden, hidden, rng);
  return p;
}

BiLstmParams BiLstmParams::zeros(Eigen::Index input_dim, Eigen::Index hidden) {
  return {LstmParams::zeros(input_dim, hidden), LstmParams::zeros(input_dim, hidden)};
}

BiLstmParams BiLstmParams::random(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng) {
  LstmParams fwd = LstmParams::random(input_dim, hidden, rng);
  LstmParams bwd = LstmParams::random(input_dim, hidden, rng);
  return {std::move(fwd), std::move(bwd)};
}

LstmStepCache lstm_step_cached(const LstmParams& p, const Vec& x, const Vec& h_prev,
                               const Vec& c_prev) {
  const Eigen::Index H = p.hidden();
  if (x.size() != p.input_dim()) {
    throw Error("LSTM input has width " + std::to_string(x.size()) + ", expected " +
                std::to_string(p.input_dim()));
  }
  if (h_prev.size() != H || c_prev.size() != H) {
    throw Error("LSTM state has width " + std::to_string(h_prev.size()) + ", expected " +
                std::to_string(H));
  }
  LstmStepCache s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.f = sigmoid(p.w_fx * x + p.w_fh * h_prev + p.peep_f.cwiseProduct(c_prev) + p.b_f);
  s.i = sigmoid(p.w_ix * x + p.w_ih * h_prev + p.peep_i.cwiseProduct(c_prev) + p.b_i);
  s.g = tanh_vec(p.w_cx * x + p.w_ch * h_prev + p.b_c);
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.o = sigmoid(p.w_ox * x + p.w_oh * h_prev + p.peep_o.cwiseProduct(s.c) + p.b_o);
  s.tanh_c = tanh_vec(s.c);
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

std::pair<Vec, Vec> lstm_step(const LstmParams& p, const Vec& x, const Vec& h_prev,
                              const Vec& c_prev) {
  LstmStepCache s = lstm_step_cached(p, x, h_prev, c_prev);
  return {std::move(s.h), std::move(s.c)};
}

void lstm_step_backward(const LstmParams& p, const LstmStepCache& s, const Vec& dh,
                        const Vec& dc_next, LstmParams& grad, Vec& dx, Vec& dh_prev,
                        Vec& dc_prev) {
  const Vec ones = Vec::Ones(s.h.size());
  const Vec da_o = dh.cwiseProduct(s.tanh_c).cwiseProduct(s.o).cwiseProduct(ones - s.o);
  const Vec dc = dc_next +
                 dh.cwiseProduct(s.o).cwiseProduct(ones - s.tanh_c.cwiseProduct(s.tanh_c)) +
                 da_o.cwiseProduct(p.peep_o);
  const Vec da_f = dc.cwiseProduct(s.c_prev).cwiseProduct(s.f).cwiseProduct(ones - s.f);
  const Vec da_i = dc.cwiseProduct(s.g).cwiseProduct(s.i).cwiseProduct(ones - s.i);
  const Vec da_g = dc.cwiseProduct(s.i).cwiseProduct(ones - s.g.cwiseProduct(s.g));

  grad.w_fx.noalias() += da_f * s.x.transpose();
  grad.w_ix.noalias() += da_i * s.x.transpose();
  grad.w_cx.noalias() += da_g * s.x.transpose();
  grad.w_ox.noalias() += da_o * s.x.transpose();
  grad.w_fh.noalias() += da_f * s.h_prev.transpose();
  grad.w_ih.noalias() += da_i * s.h_prev.transpose();
  grad.w_ch.noalias() += da_g * s.h_prev.transpose();
  grad.w_oh.noalias() += da_o * s.h_prev.transpose();
  grad.peep_f += da_f.cwiseProduct(s.c_prev);
  grad.peep_i += da_i.cwiseProduct(s.c_prev);
  grad.peep_o += da_o.cwiseProduct(s.c);
  grad.b_f += da_f;
  grad.b_i += da_i;
  grad.b_c += da_g;
  grad.b_o += da_o;

  dx = p.w_fx.transpose() * da_f + p.w_ix.transpose() * da_i + p.w_cx.transpose() * da_g +
       p.w_ox.transpose() * da_o;
  dh_prev = p.w_fh.transpose() * da_f + p.w_ih.transpose() * da_i + p.w_ch.transpose() * da_g +
            p.w_oh.transpose() * da_o;
  dc_prev = dc.cwiseProduct(s.f) + da_f.cwiseProduct(p.peep_f) + da_i.cwiseProduct(p.peep_i);
}

LstmTrace lstm_run(const LstmParams& p, std::span<const Vec> inputs, bool reversed) {
  LstmTrace trace;
  trace.reversed = reversed;
  trace.steps.reserve(inputs.size());
  Vec h = Vec::Zero(p.hidden());
  Vec c = Vec::Zero(p.hidden());
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const std::size_t t = reversed ? inputs.size() - 1 - n : n;
    trace.steps.push_back(lstm_step_cached(p, inputs[t], h, c));
    h = trace.steps.back().h;
    c = trace.steps.back().c;
  }
  return trace;
}

std::vector<Vec> lstm_run_backward(const LstmParams& p, const LstmTrace& trace,
                                   std::span<const Vec> dh, LstmParams& grad) {
  const std::size_t L = trace.steps.size();
  std::vector<Vec> dx(L);
  Vec dh_carry = Vec::Zero(p.hidden());
  Vec dc_carry = Vec::Zero(p.hidden());
  Vec dh_prev, dc_prev;
  for (std::size_t n = L; n-- > 0;) {
    const std::size_t t = trace.reversed ? L - 1 - n : n;
    const Vec dh_total = dh[t] + dh_carry;
    lstm_step_backward(p, trace.steps[n], dh_total, dc_carry, grad, dx[t], dh_prev, dc_prev);
    dh_carry = dh_prev;
    dc_carry = dc_prev;
  }
  return dx;
}

Vec BiLstmTrace::output(std::size_t t) const {
  const Vec& f = forward.hidden_at(t);
  const Vec& b = backward.hidden_at(t);
  Vec out(f.size() + b.size());
  out << f, b;
  return out;
}

BiLstmTrace bilstm_trace(const BiLstmParams& p, std::span<const Vec> inputs) {
  if (inputs.empty()) throw Error("BiLSTM input sequence is empty");
  return {lstm_run(p.forward, inputs, false), lstm_run(p.backward, inputs, true)};
}

std::vector<Vec> bilstm_run(const BiLstmParams& p, std::span<const Vec> inputs) {
  const BiLstmTrace trace = bilstm_trace(p, inputs);
  std::vector<Vec> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) out[t] = trace.output(t);
  return out;
}

std::vector<Vec> bilstm_backward(const BiLstmParams& p, const BiLstmTrace& trace,
                                 std::span<const Vec> d_outputs, BiLstmParams& grad) {
  const std::size_t L = trace.size();
  const Eigen::Index Hf = p.forward.hidden();
  const Eigen::Index Hb = p.backward.hidden();
  std::vector<Vec> dh_f(L), dh_b(L);
  for (std::size_t t = 0; t < L; ++t) {
    dh_f[t] = d_outputs[t].head(Hf);
    dh_b[t] = d_outputs[t].tail(Hb);
  }
  std::vector<Vec> dx = lstm_run_backward(p.forward, trace.forward, dh_f, grad.forward);
  const std::vector<Vec> dx_b = lstm_run_backward(p.backward, trace.backward, dh_b, grad.backward);
  for (std::size_t t = 0; t < L; ++t) dx[t] += dx_b[t];
  return dx;
}

}  // namespace nertk
