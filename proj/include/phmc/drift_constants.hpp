#pragma once

#include <cstddef>

#include <nlohmann/json.hpp>

namespace phmc {

/// Constants of a drift b: global Lipschitz constant L >= 1, drift-condition constants
/// K > 0 and A >= 0, and the number n of modes on which b may deviate from -x.
/// Construction enforces K <= L.
class DriftConstants {
 public:
  DriftConstants(double L, double K, double A, std::size_t n);

  double L() const noexcept { return L_; }
  double K() const noexcept { return K_; }
  double A() const noexcept { return A_; }
  std::size_t n() const noexcept { return n_; }

 private:
  double L_, K_, A_;
  std::size_t n_;
};

nlohmann::json to_json(const DriftConstants& c);

}  // namespace phmc
