#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "hcd/heisenberg.hpp"

namespace hcd {

struct MeasureEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long long n_samples = 0;
    double voxel = 0.0;  // 0 for pure Monte Carlo
    std::uint64_t seed = 0;
};

// Counter-based stream: the k-th draw for a given (seed, index) is a pure
// function of its arguments, so estimates are identical for any worker count.
class IndexRng {
  public:
    IndexRng(std::uint64_t seed, std::uint64_t index);
    double uniform();                          // [0, 1)
    double uniform(double lo, double hi);
    std::uint64_t next_u64();

  private:
    std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

struct Box3 {
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{1, 1, 1};
    double volume() const;
};

int resolve_workers(int workers);  // 0 -> HCDLAB_THREADS or hardware concurrency

// Hit-fraction Monte Carlo volume of {indicator} inside box.
MeasureEstimate mc_volume(const std::function<bool(double, double, double)>& indicator,
                          const Box3& box, long long n, std::uint64_t seed, int workers = 0);

// Deterministic point sampler: index -> point (seed baked in by the caller).
using PointSampler = std::function<HPoint(std::uint64_t index)>;

// Occupied-voxel volume of a point cloud at a given cubic voxel size.
double voxel_volume(const std::vector<HPoint>& pts, double voxel);
long long voxel_count(const std::vector<HPoint>& pts, double voxel);

// Volume of an anisotropic occupancy grid adapted to the cloud's bounding
// box, cells_per_axis cells per axis. Returns (volume, occupied cells).
std::pair<double, long long> adaptive_grid_volume(const std::vector<HPoint>& pts,
                                                  int cells_per_axis);

// t-midpoints of sampled pairs; throws OnVerticalAxis past a 0.1% drop rate.
std::vector<HPoint> sample_midpoints(const Heisenberg& H, const PointSampler& a_sampler,
                                     const PointSampler& b_sampler, double t, long long n_pairs,
                                     int workers = 0);

MeasureEstimate midpoint_set_volume(const Heisenberg& H, const PointSampler& a_sampler,
                                    const PointSampler& b_sampler, double t, long long n_pairs,
                                    double voxel, std::uint64_t seed, int workers = 0);

// uniform sampler in a Euclidean coordinate ball (deterministic per index)
PointSampler ball_sampler(HPoint center, double radius, std::uint64_t seed);

}  // namespace hcd
