#include "s2p/nn/params.hpp"

#include <cmath>

namespace s2p::nn {

Matrix& ParamStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (index_.count(name)) throw ValidationError("duplicate parameter name: " + name);
  index_[name] = static_cast<int>(entries_.size());
  entries_.push_back({name, Matrix::Zero(rows, cols)});
  return entries_.back().value;
}

const Matrix& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return entries_[static_cast<std::size_t>(it->second)].value;
}

Matrix& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return entries_[static_cast<std::size_t>(it->second)].value;
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) > 0; }

int ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second;
}

GradStore::GradStore(const ParamStore& ps) {
  grads_.reserve(ps.size());
  for (const auto& e : ps.entries()) grads_.push_back(Matrix::Zero(e.value.rows(), e.value.cols()));
}

void GradStore::zero() {
  for (auto& g : grads_) g.setZero();
}

void GradStore::add(const GradStore& other) {
  if (other.grads_.size() != grads_.size()) throw ValidationError("GradStore::add: size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i] += other.grads_[i];
}

void GradStore::scale(double c) {
  for (auto& g : grads_) g *= c;
}

double GradStore::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) s += g.squaredNorm();
  return s;
}

ParamLease::ParamLease(Tape& tape, const ParamStore& ps, GradStore* gs)
    : tape_(tape), ps_(ps), gs_(gs) {
  cache_.resize(ps.size());
}

Var ParamLease::operator()(const std::string& name) {
  const int i = ps_.index_of(name);
  if (!cache_[static_cast<std::size_t>(i)].valid()) {
    Matrix* sink = gs_ ? &gs_->grads()[static_cast<std::size_t>(i)] : nullptr;
    cache_[static_cast<std::size_t>(i)] =
        tape_.leaf(ps_.entries()[static_cast<std::size_t>(i)].value, sink);
  }
  return cache_[static_cast<std::size_t>(i)];
}

void xavier_fill(Matrix& w, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-a, a);
}

}  // namespace s2p::nn
