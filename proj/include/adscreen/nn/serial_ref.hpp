#pragma once

#include <vector>

#include "adscreen/nn/matrix.hpp"

// Naive single-threaded reference implementations of the convolution and
// dense kernels. Intentionally written as plain triple loops over an
// explicitly padded input, independent of the OpenMP code paths in
// nn/kernels.hpp. Linked by tests (as the oracle) and by the kernel
// benchmark; never by the pipeline itself.

namespace adscreen::nnref {

using nn::Kernel3;
using nn::Matrix;

// valid convolution: Y is K x (T-N+1)
Matrix conv1d_valid(const Matrix& X, const Kernel3& W, const std::vector<double>& bias);

// causal convolution with N-1 left zeros: Y is K x T
Matrix conv1d_causal(const Matrix& X, const Kernel3& W, const std::vector<double>& bias);

// (V*X + e) .* sigmoid(W*X + b), causal padding
Matrix gated_conv(const Matrix& X, const Kernel3& V, const std::vector<double>& e,
                  const Kernel3& W, const std::vector<double>& b);

std::vector<double> dense(const Matrix& W, const std::vector<double>& bias,
                          const std::vector<double>& x);

}  // namespace adscreen::nnref
