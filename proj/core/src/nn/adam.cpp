#include "s2p/nn/adam.hpp"

#include <cmath>

namespace s2p::nn {

Adam::Adam(const ParamStore& ps, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(ps.size());
  v_.reserve(ps.size());
  for (const auto& e : ps.entries()) {
    m_.push_back(Matrix::Zero(e.value.rows(), e.value.cols()));
    v_.push_back(Matrix::Zero(e.value.rows(), e.value.cols()));
  }
}

void Adam::step(ParamStore& ps, GradStore& grads) {
  if (grads.grads().size() != m_.size()) throw ValidationError("Adam::step: gradient size mismatch");
  if (cfg_.clip_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > cfg_.clip_norm) grads.scale(cfg_.clip_norm / norm);
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const Matrix& g = grads.grads()[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    Matrix mhat = m_[i] / bc1;
    Matrix vhat = v_[i] / bc2;
    ps.entries()[i].value.array() -=
        cfg_.lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
  }
}

}  // namespace s2p::nn
