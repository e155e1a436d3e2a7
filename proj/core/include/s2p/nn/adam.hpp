#pragma once

#include "s2p/nn/params.hpp"

namespace s2p::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // L2 norm ceiling applied to the whole gradient before the update;
  // 0 disables clipping.
  double clip_norm = 0.0;
};

class Adam {
 public:
  Adam(const ParamStore& ps, AdamConfig cfg);
  void step(ParamStore& ps, GradStore& grads);
  long steps_taken() const { return step_; }

 private:
  AdamConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long step_ = 0;
};

}  // namespace s2p::nn
