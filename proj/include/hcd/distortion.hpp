#pragma once

#include "hcd/errors.hpp"

namespace hcd {

struct DistortionParams {
    double K = 0.0;   // curvature bound
    double N = 2.0;   // dimension bound, > 1
    double t = 0.0;   // interpolation parameter in [0, 1]
    double theta = 0.0;  // distance argument, >= 0
};

// sigma_{K,N}^{(t)}(theta); throws OutOfDomain when K theta^2 >= N pi^2
double sigma(const DistortionParams& p);

// tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K,N-1}^{(t)}(theta)^{1-1/N}
double tau(const DistortionParams& p);

}  // namespace hcd
