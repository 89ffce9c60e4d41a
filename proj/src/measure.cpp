#include "hcd/measure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <unordered_set>

namespace hcd {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

template <typename Fn>
void parallel_chunks(long long n, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 4096) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    const long long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long long lo = w * chunk;
        const long long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, w, lo, hi] { fn(w, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

IndexRng::IndexRng(std::uint64_t seed, std::uint64_t index) {
    state_ = seed ^ (0x2545f4914f6cdd1dull * (index + 0x9e3779b97f4a7c15ull));
    // warm up so neighbouring indices decorrelate
    splitmix64(state_);
    splitmix64(state_);
}

std::uint64_t IndexRng::next_u64() { return splitmix64(state_); }

double IndexRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double IndexRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (salt * 0xda942042e4dd58b5ull);
    splitmix64(s);
    return splitmix64(s);
}

double Box3::volume() const {
    return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
}

int resolve_workers(int workers) {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("HCDLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

MeasureEstimate mc_volume(const std::function<bool(double, double, double)>& indicator,
                          const Box3& box, long long n, std::uint64_t seed, int workers) {
    const double vol = box.volume();
    if (!(vol > 0.0)) throw EmptyBox("mc_volume needs a box of positive volume");
    if (n <= 0) throw EmptyBox("mc_volume needs a positive sample count");
    workers = resolve_workers(workers);
    std::vector<long long> hits(static_cast<std::size_t>(std::max(1, workers)), 0);
    parallel_chunks(n, workers, [&](int w, long long lo, long long hi) {
        long long h = 0;
        for (long long i = lo; i < hi; ++i) {
            IndexRng rng(seed, static_cast<std::uint64_t>(i));
            const double x = rng.uniform(box.lo[0], box.hi[0]);
            const double y = rng.uniform(box.lo[1], box.hi[1]);
            const double z = rng.uniform(box.lo[2], box.hi[2]);
            if (indicator(x, y, z)) ++h;
        }
        hits[static_cast<std::size_t>(w)] = h;
    });
    long long total = 0;
    for (long long h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(n);
    MeasureEstimate est;
    est.value = p * vol;
    est.stderr_ = vol * std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(n)));
    est.n_samples = n;
    est.voxel = 0.0;
    est.seed = seed;
    return est;
}

namespace {

std::uint64_t voxel_key(double v, double h, int shift) {
    const long long idx = static_cast<long long>(std::floor(v / h));
    return static_cast<std::uint64_t>(idx + (1ll << 40)) << shift;
}

long long count_occupied(const std::vector<HPoint>& pts, double hx, double hy, double hz) {
    std::unordered_set<std::uint64_t> cells;
    cells.reserve(pts.size());
    for (const auto& p : pts) {
        const std::uint64_t kx = static_cast<std::uint64_t>(
            static_cast<long long>(std::floor(p.x / hx)) & 0x1fffff);
        const std::uint64_t ky = static_cast<std::uint64_t>(
            static_cast<long long>(std::floor(p.y / hy)) & 0x1fffff);
        const std::uint64_t kz = static_cast<std::uint64_t>(
            static_cast<long long>(std::floor(p.z / hz)) & 0x1fffff);
        cells.insert(kx | (ky << 21) | (kz << 42));
    }
    return static_cast<long long>(cells.size());
}

}  // namespace

long long voxel_count(const std::vector<HPoint>& pts, double voxel) {
    if (!(voxel > 0.0)) throw EmptyBox("voxel size must be positive");
    return count_occupied(pts, voxel, voxel, voxel);
}

double voxel_volume(const std::vector<HPoint>& pts, double voxel) {
    return static_cast<double>(voxel_count(pts, voxel)) * voxel * voxel * voxel;
}

std::pair<double, long long> adaptive_grid_volume(const std::vector<HPoint>& pts,
                                                  int cells_per_axis) {
    if (pts.empty()) return {0.0, 0};
    double lo[3] = {pts[0].x, pts[0].y, pts[0].z};
    double hi[3] = {pts[0].x, pts[0].y, pts[0].z};
    for (const auto& p : pts) {
        lo[0] = std::min(lo[0], p.x);
        hi[0] = std::max(hi[0], p.x);
        lo[1] = std::min(lo[1], p.y);
        hi[1] = std::max(hi[1], p.y);
        lo[2] = std::min(lo[2], p.z);
        hi[2] = std::max(hi[2], p.z);
    }
    double h[3];
    for (int k = 0; k < 3; ++k) {
        double ext = hi[k] - lo[k];
        if (ext <= 0.0) ext = std::max(1e-300, 1e-12 * (std::abs(lo[k]) + 1.0));
        h[k] = ext / cells_per_axis * (1.0 + 1e-12);
    }
    std::unordered_set<std::uint64_t> cells;
    cells.reserve(pts.size());
    for (const auto& p : pts) {
        const std::uint64_t kx =
            static_cast<std::uint64_t>(static_cast<long long>((p.x - lo[0]) / h[0]) & 0x1fffff);
        const std::uint64_t ky =
            static_cast<std::uint64_t>(static_cast<long long>((p.y - lo[1]) / h[1]) & 0x1fffff);
        const std::uint64_t kz =
            static_cast<std::uint64_t>(static_cast<long long>((p.z - lo[2]) / h[2]) & 0x1fffff);
        cells.insert(kx | (ky << 21) | (kz << 42));
    }
    const double cell_vol = h[0] * h[1] * h[2];
    return {static_cast<double>(cells.size()) * cell_vol, static_cast<long long>(cells.size())};
}

std::vector<HPoint> sample_midpoints(const Heisenberg& H, const PointSampler& a_sampler,
                                     const PointSampler& b_sampler, double t, long long n_pairs,
                                     int workers) {
    workers = resolve_workers(workers);
    std::vector<HPoint> out(static_cast<std::size_t>(n_pairs));
    std::vector<unsigned char> ok(static_cast<std::size_t>(n_pairs), 0);
    std::atomic<long long> dropped{0};
    parallel_chunks(n_pairs, workers, [&](int, long long lo, long long hi) {
        long long local_drop = 0;
        for (long long i = lo; i < hi; ++i) {
            const HPoint a = a_sampler(static_cast<std::uint64_t>(i));
            const HPoint b = b_sampler(static_cast<std::uint64_t>(i));
            try {
                out[static_cast<std::size_t>(i)] = H.t_midpoint(a, b, t);
                ok[static_cast<std::size_t>(i)] = 1;
            } catch (const OnVerticalAxis&) {
                ++local_drop;
            } catch (const NoConvergence&) {
                ++local_drop;
            }
        }
        dropped += local_drop;
    });
    if (dropped > 0 && static_cast<double>(dropped.load()) > 1e-3 * static_cast<double>(n_pairs))
        throw OnVerticalAxis("midpoint sampling drop rate exceeded 0.1%");
    std::vector<HPoint> kept;
    kept.reserve(static_cast<std::size_t>(n_pairs));
    for (long long i = 0; i < n_pairs; ++i)
        if (ok[static_cast<std::size_t>(i)]) kept.push_back(out[static_cast<std::size_t>(i)]);
    return kept;
}

MeasureEstimate midpoint_set_volume(const Heisenberg& H, const PointSampler& a_sampler,
                                    const PointSampler& b_sampler, double t, long long n_pairs,
                                    double voxel, std::uint64_t seed, int workers) {
    const auto mids = sample_midpoints(H, a_sampler, b_sampler, t, n_pairs, workers);
    const long long cells = voxel_count(mids, voxel);
    MeasureEstimate est;
    est.value = static_cast<double>(cells) * voxel * voxel * voxel;
    est.stderr_ = std::sqrt(static_cast<double>(cells)) * voxel * voxel * voxel;
    est.n_samples = n_pairs;
    est.voxel = voxel;
    est.seed = seed;
    return est;
}

PointSampler ball_sampler(HPoint center, double radius, std::uint64_t seed) {
    return [center, radius, seed](std::uint64_t index) {
        IndexRng rng(seed, index);
        // rejection from the bounding cube, deterministic per index
        for (int k = 0; k < 1024; ++k) {
            const double x = rng.uniform(-radius, radius);
            const double y = rng.uniform(-radius, radius);
            const double z = rng.uniform(-radius, radius);
            if (x * x + y * y + z * z <= radius * radius)
                return HPoint{center.x + x, center.y + y, center.z + z};
        }
        return center;  // unreachable in practice
    };
}

}  // namespace hcd
