#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rgne {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Errc {
  DimensionMismatch,
  InvalidArgument,
  NotConverged,
  Diverged,
  UnsupportedDimension,
  IoError,
};

/// Library error carrying a machine-checkable code. Iterative routines that
/// fail to converge also attach their final residual.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), code_(code), residual_(residual) {}

  Errc code() const { return code_; }
  double residual() const { return residual_; }

 private:
  Errc code_;
  double residual_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline void require_dim(const Vec& x, Eigen::Index n, const char* name) {
  if (x.size() != n)
    throw Error(Errc::DimensionMismatch,
                std::string(name) + ": expected length " + std::to_string(n) +
                    ", got " + std::to_string(x.size()));
}

}  // namespace rgne
