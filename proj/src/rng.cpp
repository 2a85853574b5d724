#include "rankest/rng.hpp"

#include "rankest/core.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace rankest {

double CounterRng::normal() { return normal_quantile(uniform()); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "normal quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace rankest
