#pragma once

#include "pickopt/chain.hpp"

namespace testutil {

// Tree-less GBDT stage that always predicts `value`.
inline pickopt::GbdtModel const_stage(int dim, double value) {
  pickopt::GbdtModel m;
  m.input_dim = dim;
  m.base_prediction = value;
  m.learning_rate = 0.05;
  return m;
}

// Chain predicting a fixed (dx, dy, dr) for every input.
inline pickopt::AutoregressiveChain const_chain(double dx, double dy,
                                                double dr) {
  pickopt::AutoregressiveChain c;
  c.kind = pickopt::ModelKind::Gbdt;
  c.gbdt = {const_stage(pickopt::kFeatureDim, dx),
            const_stage(pickopt::kFeatureDim + 1, dy),
            const_stage(pickopt::kFeatureDim + 2, dr)};
  return c;
}

}  // namespace testutil
