#include "genrf/errors.hpp"

namespace genrf {

DegenerateStatistic::DegenerateStatistic(const std::string& what,
                                         double numerator, double denominator,
                                         double residual_norm_sq)
    : NumericalError(what),
      numerator_(numerator),
      denominator_(denominator),
      residual_norm_sq_(residual_norm_sq) {}

}  // namespace genrf
