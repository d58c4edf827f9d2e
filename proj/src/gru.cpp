#include <algorithm>
#include <cmath>

#include "derail/error.hpp"
#include "derail/gru.hpp"
#include "derail/random.hpp"

namespace derail {

namespace {

Vector logistic(const Vector& a) {
  Vector out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out(i) = a(i) >= 0.0 ? 1.0 / (1.0 + std::exp(-a(i))) : std::exp(a(i)) / (1.0 + std::exp(a(i)));
  }
  return out;
}

double scalar_sigmoid(double a) {
  return a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}

template <typename F>
void for_each_block(GruParams& p, F&& f) {
  for (Matrix* m : {&p.Wz, &p.Wr, &p.Wh, &p.Uz, &p.Ur, &p.Uh}) f(m->data(), m->size());
  for (Vector* v : {&p.bz, &p.br, &p.bh, &p.head}) f(v->data(), v->size());
  f(&p.head_bias, 1);
}

template <typename F>
void for_each_block(const GruParams& p, F&& f) {
  for (const Matrix* m : {&p.Wz, &p.Wr, &p.Wh, &p.Uz, &p.Ur, &p.Uh}) f(m->data(), m->size());
  for (const Vector* v : {&p.bz, &p.br, &p.bh, &p.head}) f(v->data(), v->size());
  f(&p.head_bias, 1);
}

}  // namespace

GruParams GruParams::zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
  if (input_dim <= 0 || hidden_dim <= 0) throw ValidationError("GRU dimensions must be positive");
  GruParams p;
  p.Wz = p.Wr = p.Wh = Matrix::Zero(hidden_dim, input_dim);
  p.Uz = p.Ur = p.Uh = Matrix::Zero(hidden_dim, hidden_dim);
  p.bz = p.br = p.bh = p.head = Vector::Zero(hidden_dim);
  p.head_bias = 0.0;
  return p;
}

GruParams GruParams::random(Eigen::Index input_dim, Eigen::Index hidden_dim, std::uint64_t seed) {
  auto p = zeros(input_dim, hidden_dim);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for_each_block(p, [&](double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-bound, bound);
  });
  return p;
}

std::size_t GruParams::parameter_count() const {
  std::size_t n = 0;
  for_each_block(*this, [&](const double*, Eigen::Index k) { n += static_cast<std::size_t>(k); });
  return n;
}

Vector GruParams::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for_each_block(*this, [&](const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) flat(at++) = data[i];
  });
  return flat;
}

void GruParams::unflatten(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw DimensionError("flat GRU parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  for_each_block(*this, [&](double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) data[i] = flat(at++);
  });
}

bool GruParams::all_finite() const {
  bool ok = true;
  for_each_block(*this, [&](const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) ok &= std::isfinite(data[i]);
  });
  return ok;
}

GruOutput gru_forward(const GruParams& params, const Matrix& sequence) {
  if (sequence.rows() == 0) throw DimensionError("GRU input sequence is empty");
  if (sequence.cols() != params.input_dim()) {
    throw DimensionError("GRU expects " + std::to_string(params.input_dim()) +
                         " inputs per step, got " + std::to_string(sequence.cols()));
  }
  if (!sequence.allFinite()) throw NumericError("GRU input contains non-finite values");

  const auto H = params.hidden_dim();
  GruOutput out;
  auto& c = out.cache;
  c.h.reserve(static_cast<std::size_t>(sequence.rows()) + 1);
  c.h.push_back(Vector::Zero(H));
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    const Vector x = sequence.row(t).transpose();
    const Vector& h = c.h.back();
    Vector z = logistic(params.Wz * x + params.Uz * h + params.bz);
    Vector r = logistic(params.Wr * x + params.Ur * h + params.br);
    Vector cand = (params.Wh * x + params.Uh * r.cwiseProduct(h) + params.bh).array().tanh().matrix();
    Vector next = (1.0 - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(cand);
    c.z.push_back(std::move(z));
    c.r.push_back(std::move(r));
    c.c.push_back(std::move(cand));
    c.h.push_back(std::move(next));
  }
  c.logit = params.head.dot(c.h.back()) + params.head_bias;
  if (!std::isfinite(c.logit) || !c.h.back().allFinite()) throw NumericError("GRU activation is not finite");
  out.probability = scalar_sigmoid(c.logit);
  return out;
}

double bce_loss(double probability, double label) {
  constexpr double eps = 1e-12;
  const double p = std::clamp(probability, eps, 1.0 - eps);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

GruParams gru_backward(const GruParams& params, const Matrix& sequence, const GruCache& cache,
                       double label) {
  const auto H = params.hidden_dim();
  auto g = GruParams::zeros(params.input_dim(), H);
  const double dlogit = scalar_sigmoid(cache.logit) - label;
  g.head = dlogit * cache.h.back();
  g.head_bias = dlogit;

  Vector dh = dlogit * params.head;
  for (Eigen::Index t = sequence.rows() - 1; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const Vector x = sequence.row(t).transpose();
    const Vector& h_prev = cache.h[ti];
    const Vector& z = cache.z[ti];
    const Vector& r = cache.r[ti];
    const Vector& cand = cache.c[ti];

    const Vector dcand = dh.cwiseProduct(z);
    const Vector dz = dh.cwiseProduct(cand - h_prev);
    Vector dh_prev = dh.cwiseProduct((1.0 - z.array()).matrix());

    const Vector da_c = dcand.cwiseProduct((1.0 - cand.array().square()).matrix());
    const Vector rh = r.cwiseProduct(h_prev);
    g.Wh.noalias() += da_c * x.transpose();
    g.Uh.noalias() += da_c * rh.transpose();
    g.bh += da_c;
    const Vector drh = params.Uh.transpose() * da_c;
    const Vector dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);

    const Vector da_z = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
    g.Wz.noalias() += da_z * x.transpose();
    g.Uz.noalias() += da_z * h_prev.transpose();
    g.bz += da_z;
    dh_prev.noalias() += params.Uz.transpose() * da_z;

    const Vector da_r = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
    g.Wr.noalias() += da_r * x.transpose();
    g.Ur.noalias() += da_r * h_prev.transpose();
    g.br += da_r;
    dh_prev.noalias() += params.Ur.transpose() * da_r;

    dh = std::move(dh_prev);
  }
  return g;
}

double gru_predict(const GruParams& params, const Matrix& sequence) {
  return gru_forward(params, sequence).probability;
}

GradientCheck gradient_check(const GruParams& params, const Matrix& sequence, double label,
                             double step) {
  const auto fwd = gru_forward(params, sequence);
  const Vector analytic = gru_backward(params, sequence, fwd.cache, label).flatten();

  // Loss from the logit directly, which keeps finite differences accurate
  // when p is close to 0 or 1.
  auto loss_at = [&](const GruParams& p) {
    const double logit = gru_forward(p, sequence).cache.logit;
    auto softplus = [](double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); };
    return label * softplus(-logit) + (1.0 - label) * softplus(logit);
  };

  GradientCheck result;
  Vector flat = params.flatten();
  GruParams probe = params;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double saved = flat(i);
    flat(i) = saved + step;
    probe.unflatten(flat);
    const double up = loss_at(probe);
    flat(i) = saved - step;
    probe.unflatten(flat);
    const double down = loss_at(probe);
    flat(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic(i);
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = static_cast<std::size_t>(i);
    }
    ++result.checked;
  }
  return result;
}

}  // namespace derail
