#include "hcd/distortion.hpp"

#include <cmath>

namespace hcd {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double sigma(const DistortionParams& p) {
    if (!(p.N > 0.0)) throw OutOfDomain("sigma requires N > 0");
    if (p.K == 0.0) return p.t;
    const double u = p.theta * std::sqrt(std::abs(p.K) / p.N);
    if (p.K > 0.0) {
        if (!(p.K * p.theta * p.theta < p.N * kPi * kPi))
            throw OutOfDomain("sigma is +infinity for K theta^2 >= N pi^2");
        if (u < 1e-8) {
            // sin(tu)/sin(u) = t (1 - (1-t^2) u^2/6 + O(u^4))
            return p.t * (1.0 - (1.0 - p.t * p.t) * u * u / 6.0);
        }
        return std::sin(p.t * u) / std::sin(u);
    }
    if (u < 1e-8) return p.t * (1.0 + (1.0 - p.t * p.t) * u * u / 6.0);
    return std::sinh(p.t * u) / std::sinh(u);
}

double tau(const DistortionParams& p) {
    if (!(p.N > 1.0)) throw OutOfDomain("tau requires N > 1");
    if (p.K == 0.0) return p.t;
    DistortionParams q = p;
    q.N = p.N - 1.0;
    const double s = sigma(q);
    return std::pow(p.t, 1.0 / p.N) * std::pow(s, 1.0 - 1.0 / p.N);
}

}  // namespace hcd
