// Single-layer, peephole-free LSTM cell:
//
//   i_t = σ(W_xi x_t + W_hi h_{t-1} + b_i)
//   f_t = σ(W_xf x_t + W_hf h_{t-1} + b_f)
//   o_t = σ(W_xo x_t + W_ho h_{t-1} + b_o)
//   c̃_t = tanh(W_xc x_t + W_hc h_{t-1} + b_c)
//   c_t = f_t ⊙ c_{t-1} + i_t ⊙ c̃_t
//   h_t = o_t ⊙ tanh(c_t)
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <utility>

namespace eoc {

struct ModelDims {
  std::int64_t vocab = 0;
  std::int64_t embed = 0;
  std::int64_t hidden = 0;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

template <typename Scalar>
struct LstmParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix W_xi, W_xf, W_xo, W_xc;  // hidden x embed
  Matrix W_hi, W_hf, W_ho, W_hc;  // hidden x hidden
  Vector b_i, b_f, b_o, b_c;
  Matrix embedding;  // vocab x embed; row 0 is padding and stays zero
  Vector w_out;
  Scalar b_out = Scalar(0);

  LstmParams() = default;

  explicit LstmParams(const ModelDims& d) { resize(d); }

  static LstmParams zeros(const ModelDims& d) { return LstmParams(d); }

  void resize(const ModelDims& d) {
    const auto h = static_cast<Eigen::Index>(d.hidden);
    const auto e = static_cast<Eigen::Index>(d.embed);
    for (Matrix* m : {&W_xi, &W_xf, &W_xo, &W_xc}) {
      m->setZero(h, e);
    }
    for (Matrix* m : {&W_hi, &W_hf, &W_ho, &W_hc}) {
      m->setZero(h, h);
    }
    for (Vector* v : {&b_i, &b_f, &b_o, &b_c}) {
      v->setZero(h);
    }
    embedding.setZero(static_cast<Eigen::Index>(d.vocab), e);
    w_out.setZero(h);
    b_out = Scalar(0);
  }

  ModelDims dims() const { return {embedding.rows(), embedding.cols(), W_hi.rows()}; }

  /// Visits every tensor in the fixed serialization order as
  /// fn(name, Eigen::Map<Matrix>) (const-qualified for const params).
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    visit_impl(*this, fn);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    visit_impl(*this, fn);
  }

  /// Sum of squared entries over every tensor.
  Scalar squared_norm() const {
    Scalar total = Scalar(0);
    for_each_tensor([&](std::string_view, const auto& t) { total += t.squaredNorm(); });
    return total;
  }

  bool all_finite() const {
    bool ok = true;
    for_each_tensor([&](std::string_view, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for_each_tensor([&](std::string_view, const auto& t) { n += t.size(); });
    return n;
  }

 private:
  template <typename Self, typename Fn>
  static void visit_impl(Self& self, Fn& fn) {
    using Target = std::conditional_t<std::is_const_v<Self>, const Matrix, Matrix>;
    using MapType = Eigen::Map<Target>;
    auto mat = [&](std::string_view name, auto& m) { fn(name, MapType(m.data(), m.rows(), m.cols())); };
    mat("embedding", self.embedding);
    mat("W_xi", self.W_xi);
    mat("W_xf", self.W_xf);
    mat("W_xo", self.W_xo);
    mat("W_xc", self.W_xc);
    mat("W_hi", self.W_hi);
    mat("W_hf", self.W_hf);
    mat("W_ho", self.W_ho);
    mat("W_hc", self.W_hc);
    mat("b_i", self.b_i);
    mat("b_f", self.b_f);
    mat("b_o", self.b_o);
    mat("b_c", self.b_c);
    mat("w_out", self.w_out);
    fn(std::string_view("b_out"), MapType(&self.b_out, 1, 1));
  }
};

template <typename Scalar>
struct LstmState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector h;
  Vector c;

  static LstmState zeros(std::int64_t hidden) {
    return {Vector::Zero(static_cast<Eigen::Index>(hidden)),
            Vector::Zero(static_cast<Eigen::Index>(hidden))};
  }
};

/// Per-timestep activations of one cell update.
template <typename Scalar>
struct GateStep {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector i, f, o, g, c, h, x;  // g is the candidate c̃
};

/// Activations of a whole sequence, one column per timestep.
template <typename Scalar>
struct GateCache {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix i, f, o, g, c, h, x;
  LstmState<Scalar> init;

  Eigen::Index steps() const { return h.cols(); }
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
  }
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

namespace detail {

template <typename Scalar>
void check_dims(const LstmParams<Scalar>& p, Eigen::Index x_rows, Eigen::Index h_rows,
                Eigen::Index c_rows) {
  if (x_rows != p.W_xi.cols() || h_rows != p.W_hi.rows() || c_rows != p.W_hi.rows()) {
    throw std::invalid_argument("lstm: input or state dimension mismatch");
  }
}

/// Writes one cell update into caller-owned buffers. Every sequence routine
/// funnels through here so single steps and folds agree bit for bit.
template <typename Scalar, typename XIn, typename HIn, typename CIn, typename Out>
void step_into(const LstmParams<Scalar>& p, const XIn& x, const HIn& h_prev, const CIn& c_prev,
               Out& i, Out& f, Out& o, Out& g, Out& c, Out& h) {
  i.noalias() = p.W_xi * x;
  i.noalias() += p.W_hi * h_prev;
  i += p.b_i;
  f.noalias() = p.W_xf * x;
  f.noalias() += p.W_hf * h_prev;
  f += p.b_f;
  o.noalias() = p.W_xo * x;
  o.noalias() += p.W_ho * h_prev;
  o += p.b_o;
  g.noalias() = p.W_xc * x;
  g.noalias() += p.W_hc * h_prev;
  g += p.b_c;
  i = i.unaryExpr([](Scalar v) { return sigmoid(v); });
  f = f.unaryExpr([](Scalar v) { return sigmoid(v); });
  o = o.unaryExpr([](Scalar v) { return sigmoid(v); });
  g = g.array().tanh().matrix();
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  h = o.cwiseProduct(c.array().tanh().matrix());
}

}  // namespace detail

template <typename Scalar>
std::pair<LstmState<Scalar>, GateStep<Scalar>> lstm_step(
    const LstmParams<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
    const LstmState<Scalar>& state) {
  detail::check_dims(p, x.rows(), state.h.rows(), state.c.rows());
  const Eigen::Index n = p.W_hi.rows();
  GateStep<Scalar> s;
  for (auto* v : {&s.i, &s.f, &s.o, &s.g, &s.c, &s.h}) {
    v->resize(n);
  }
  detail::step_into(p, x, state.h, state.c, s.i, s.f, s.o, s.g, s.c, s.h);
  s.x = x;
  return {LstmState<Scalar>{s.h, s.c}, std::move(s)};
}

template <typename Scalar>
struct SequenceResult {
  LstmState<Scalar> final;
  std::optional<GateCache<Scalar>> cache;
};

/// Left fold of lstm_step over the columns of `inputs` (embed x T).
template <typename Scalar>
SequenceResult<Scalar> run_sequence(const LstmParams<Scalar>& p,
                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& inputs,
                                    const LstmState<Scalar>& init, bool keep_cache) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (inputs.cols() == 0) {
    throw std::invalid_argument("run_sequence: empty input sequence");
  }
  detail::check_dims(p, inputs.rows(), init.h.rows(), init.c.rows());
  const Eigen::Index n = p.W_hi.rows();
  const Eigen::Index steps = inputs.cols();

  SequenceResult<Scalar> out;
  if (keep_cache) {
    GateCache<Scalar> cache;
    for (auto* m : {&cache.i, &cache.f, &cache.o, &cache.g, &cache.c, &cache.h}) {
      m->resize(n, steps);
    }
    cache.x = inputs;
    cache.init = init;
    Vector i(n), f(n), o(n), g(n), c(n), h(n);
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (t == 0) {
        detail::step_into(p, inputs.col(0), init.h, init.c, i, f, o, g, c, h);
      } else {
        detail::step_into(p, inputs.col(t), cache.h.col(t - 1), cache.c.col(t - 1), i, f, o, g, c,
                          h);
      }
      cache.i.col(t) = i;
      cache.f.col(t) = f;
      cache.o.col(t) = o;
      cache.g.col(t) = g;
      cache.c.col(t) = c;
      cache.h.col(t) = h;
    }
    out.final = {cache.h.col(steps - 1), cache.c.col(steps - 1)};
    out.cache = std::move(cache);
    return out;
  }

  Vector i(n), f(n), o(n), g(n);
  Vector h = init.h;
  Vector c = init.c;
  Vector h_next(n), c_next(n);
  for (Eigen::Index t = 0; t < steps; ++t) {
    detail::step_into(p, inputs.col(t), h, c, i, f, o, g, c_next, h_next);
    h.swap(h_next);
    c.swap(c_next);
  }
  out.final = {std::move(h), std::move(c)};
  return out;
}

using Params = LstmParams<double>;
using State = LstmState<double>;
using Cache = GateCache<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace eoc
