#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcd/distortion.hpp"
#include "hcd/jacobian.hpp"
#include "hcd/measure.hpp"

namespace hcd {

struct NamedEstimate {
    std::string name;
    MeasureEstimate est;
};

// One estimated set volume at three voxel refinements (coarse to fine).
struct VolumeSeries {
    std::array<double, 3> voxel{};
    std::array<double, 3> value{};
    bool stabilized = false;
    double final_value = 0.0;
};

VolumeSeries make_series(std::array<double, 3> voxel, std::array<double, 3> value);

struct ViolationRecord {
    std::string experiment;
    std::string norm;
    double K = 0.0, N = 0.0, t = 0.5, rho = 0.0;
    std::uint64_t seed = 0;
    double lhs = 0.0;   // measure side of the inequality being tested
    double rhs = 0.0;   // distortion-coefficient side
    double margin = 0.0;
    bool violated = false;
    std::vector<NamedEstimate> estimates;
    std::vector<double> provenance_grid;
    std::vector<double> provenance_voxels;
    long long provenance_samples = 0;
    std::string to_json_string() const;  // stable key order, round-trip floats
};

// --- Brunn-Minkowski falsification -----------------------------------------

struct BmOptions {
    long long pairs = 1'000'000;       // midpoint pairs per voxel level
    long long vol_samples = 400'000;   // points for the A/B volume estimates
    double t_base = 0.0625;            // horizon of the base geodesic
    bool degenerate_same_ball = false; // control experiment with A = B
    int workers = 0;
};

// Shared set construction: a short geodesic, the ball B around its endpoint,
// A the inverse-geodesic image of B through the midpoint, and the volume
// estimates of A, B and of the midpoint set at three voxel sizes. The
// evaluation against the inequality is per (K, N).
class BmExperiment {
  public:
    BmExperiment(const NormSpec& norm, double rho, std::uint64_t seed, const BmOptions& opt = {});
    ViolationRecord evaluate(double K, double N) const;
    const VolumeSeries& vol_A() const { return vol_a_; }
    const VolumeSeries& vol_B() const { return vol_b_; }
    const VolumeSeries& vol_M() const { return vol_m_; }

  private:
    NormSpec norm_;
    double rho_;
    std::uint64_t seed_;
    BmOptions opt_;
    VolumeSeries vol_a_, vol_b_, vol_m_;
    double theta_inf_ = 0.0, theta_sup_ = 0.0;
    double vol_b_exact_ = 0.0;
};

ViolationRecord bm_report(const NormSpec& norm, double K, double N, double rho,
                          std::uint64_t seed, const BmOptions& opt = {});

// --- measure contraction property ------------------------------------------

struct SetSpec {
    PointSampler sampler;  // deterministic by index
    double volume = 0.0;   // reference measure of the set
};

struct McpOptions {
    long long pairs = 400'000;      // midpoints for the contracted-set volume
    long long rhs_samples = 20'000; // Monte-Carlo integral samples
    std::array<int, 3> grid_cells{12, 24, 48};
    int workers = 0;
};

ViolationRecord mcp_report(const NormSpec& norm, const HPoint& apex, const SetSpec& target,
                           double t, double K, double N, std::uint64_t seed,
                           const McpOptions& opt = {});

// --- singular-norm witness ---------------------------------------------------

struct McpWitness {
    // covector box around (phi0, rbar, rbar)
    double phi0 = 0.0, rbar = 0.0, eps = 0.0;
    std::array<double, 2> box_phi{}, box_omega{}, box_r{};
    double psi0 = 0.0, psi1 = 0.0;  // angle interval of the flat part
    double phi1 = 0.0;
    double t0 = 0.0;                // confinement holds for t < t0
    FlatSegment flat;
    MeasureEstimate A_volume;
    double max_abs_y = 0.0;  // transverse coordinate over the default probe
    double max_abs_z = 0.0;
    // branching exhibit
    Covector branch_a, branch_b;
    double branch_time = 0.0;       // geodesics coincide before this time
    double branch_gap_time = 0.0;   // and differ by > 1e-3 at this time
    double branch_gap = 0.0;
};

struct WitnessOptions {
    long long volume_samples = 200'000;
    int grid_cells = 32;
    int zline_probes = 16;
    long long confinement_covectors = 1000;
    int workers = 0;
};

McpWitness mcp_singular_witness(const NormSpec& norm, std::uint64_t seed,
                                const WitnessOptions& opt = {});

// re-probe confinement: max transverse |y| and |z| over covectors x times
std::pair<double, double> confinement_probe(const Heisenberg& H, const McpWitness& w,
                                            long long n_covectors,
                                            const std::vector<double>& times,
                                            std::uint64_t seed);

// uniform covector sampler in the witness box mapped through exp_map(., 1)
PointSampler witness_set_sampler(const Heisenberg& H, const McpWitness& w, std::uint64_t seed);

// --- geodesic-dimension fit --------------------------------------------------

struct HomothetyOptions {
    long long pairs = 120'000;
    int grid_cells = 32;
    int t_hi_pow = 1, t_lo_pow = 6;  // dyadic grid 2^-1 .. 2^-6
    int workers = 0;
};

ExponentFit homothety_exponent(const NormSpec& norm, const HPoint& p, const SetSpec& target,
                               std::uint64_t seed, const HomothetyOptions& opt = {});

// --- level-line lemma oracle -------------------------------------------------

struct AreaChordRow {
    double s = 0.0;
    double area = 0.0;
    double chord = 0.0;
    double ratio = 0.0;
};

struct AreaChordResult {
    bool strictly_decreasing = false;
    std::vector<AreaChordRow> table;
};

// f concave and positive on (a0, b0) with f(a0) = f(b0) = 0; checks whether
// s -> a(s)/d(s)^2 is strictly decreasing along s_grid
AreaChordResult area_chord_check(const std::function<double(double)>& f, double a0, double b0,
                                 const std::vector<double>& s_grid);

}  // namespace hcd
