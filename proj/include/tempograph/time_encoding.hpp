#pragma once

#include <cmath>

#include <Eigen/Core>

#include "tempograph/common.hpp"

namespace tempograph {

/// Fixed cosine time encoding: phi(dt) = cos(dt * omega) with
/// omega_i = alpha^(-(i-1)/beta), i = 1..d. alpha = beta = sqrt(d) by default.
template <typename Scalar>
class TimeEncoder {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  TimeEncoder() = default;

  explicit TimeEncoder(Eigen::Index dim)
      : TimeEncoder(dim, std::sqrt(static_cast<Scalar>(dim)), std::sqrt(static_cast<Scalar>(dim))) {}

  TimeEncoder(Eigen::Index dim, Scalar alpha, Scalar beta) : alpha_(alpha), beta_(beta) {
    if (dim < 0) throw Error(ErrorCode::InvalidArgument, "time_encoding", "negative dimension");
    if (!(alpha > 0) || !(beta > 0)) {
      throw Error(ErrorCode::InvalidArgument, "time_encoding", "alpha and beta must be positive");
    }
    omega_.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      omega_[i] = std::pow(alpha, -static_cast<Scalar>(i) / beta);
    }
  }

  /// Encoder with explicit frequencies.
  static TimeEncoder from_frequencies(Vector omega) {
    TimeEncoder enc;
    enc.omega_ = std::move(omega);
    return enc;
  }

  Eigen::Index dim() const { return omega_.size(); }
  const Vector& frequencies() const { return omega_; }
  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }

  /// Element-wise cos(dt * omega).
  auto operator()(Scalar dt) const { return (omega_.array() * dt).cos().matrix(); }

  template <typename Derived>
  void encode_into(Scalar dt, Eigen::MatrixBase<Derived> const& out) const {
    const_cast<Eigen::MatrixBase<Derived>&>(out) = (*this)(dt);
  }

 private:
  Scalar alpha_ = Scalar(1);
  Scalar beta_ = Scalar(1);
  Vector omega_;
};

/// Free-function form of the encoder call.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> time_encode(Scalar dt, const TimeEncoder<Scalar>& enc) {
  return enc(dt);
}

}  // namespace tempograph
