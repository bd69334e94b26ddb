#include "privlr/mechanisms.hpp"

#include <string>

namespace privlr {

double ofaa_sensitivity(int degree, Index dimension, int truncation) {
  if (dimension < 1) throw InvalidArgument("ofaa_sensitivity: dimension must be >= 1");
  if (truncation < 2) throw InvalidArgument("ofaa_sensitivity: truncation degree must be >= 2");
  const double d = static_cast<double>(dimension);
  const double spread = 2.0 * (truncation + 1);
  switch (degree) {
    case 0:
      return spread * taylor_coefficients().value;
    case 1:
      return 4.5 * d;
    case 2:
      return spread * (taylor_coefficients().curvature / 2.0) * (d + 1.0) * (d + 1.0);
    default:
      throw InvalidArgument("ofaa_sensitivity: degree must be 0, 1 or 2 (got " + std::to_string(degree) + ")");
  }
}

}  // namespace privlr
