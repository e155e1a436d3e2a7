#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "s2p/nn/tape.hpp"

namespace s2p::nn {

// Ordered collection of named parameter matrices. Order is the creation
// order and fixes the (deterministic) update order of the optimizer.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix value;
  };

  Matrix& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  bool has(const std::string& name) const;
  int index_of(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Gradient buffers parallel to a ParamStore. Workers each own one and the
// trainer reduces them in a fixed order.
class GradStore {
 public:
  GradStore() = default;
  explicit GradStore(const ParamStore& ps);
  void zero();
  void add(const GradStore& other);
  void scale(double c);
  double squared_norm() const;

  std::vector<Matrix>& grads() { return grads_; }
  const std::vector<Matrix>& grads() const { return grads_; }

 private:
  std::vector<Matrix> grads_;
};

// Binds a ParamStore (and optionally its GradStore) to a tape, handing out
// one leaf Var per parameter. With a null GradStore the parameters act as
// plain inputs and receive no gradient.
class ParamLease {
 public:
  ParamLease(Tape& tape, const ParamStore& ps, GradStore* gs = nullptr);
  Var operator()(const std::string& name);

 private:
  Tape& tape_;
  const ParamStore& ps_;
  GradStore* gs_;
  std::vector<Var> cache_;
};

// Fills a matrix with Xavier-uniform samples: U(-a, a), a = sqrt(6/(fan_in
// + fan_out)) with fan_in = rows, fan_out = cols.
void xavier_fill(Matrix& w, Rng& rng);

}  // namespace s2p::nn
